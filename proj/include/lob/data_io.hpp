#ifndef LOB_DATA_IO_HPP
#define LOB_DATA_IO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lob/estimator.hpp"
#include "lob/model.hpp"

namespace lob {

struct QuoteRecord {
  std::int64_t ts_ns = 0;
  double bid_px = 0;
  long bid_sz = 0;
  double ask_px = 0;
  long ask_sz = 0;
};

struct TradeRecord {
  std::int64_t ts_ns = 0;
  double px = 0;
  long sz = 0;
};

inline constexpr const char* kQuoteHeader = "ts_ns,bid_px,bid_sz,ask_px,ask_sz";
inline constexpr const char* kTradeHeader = "ts_ns,px,sz";

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string format_price(double px) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", px);
  return buf;
}

[[noreturn]] inline void bad_row(const std::string& path, std::size_t line_no,
                                 const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row (" + what + ")");
}

}  // namespace detail

// Loads the quote CSV. Out-of-order timestamps are stable-sorted; the count of
// out-of-order rows is reported through `warnings` when provided.
inline std::vector<QuoteRecord> load_quotes(const std::string& path, std::size_t* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kQuoteHeader) throw std::runtime_error(path + ": unexpected header '" + line + "'");
  std::vector<QuoteRecord> out;
  std::size_t line_no = 1, disorder = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = detail::split_csv(line);
    if (f.size() != 5) detail::bad_row(path, line_no, "expected 5 fields");
    QuoteRecord r;
    try {
      r.ts_ns = std::stoll(f[0]);
      r.bid_px = std::stod(f[1]);
      r.bid_sz = std::stol(f[2]);
      r.ask_px = std::stod(f[3]);
      r.ask_sz = std::stol(f[4]);
    } catch (const std::exception& e) {
      detail::bad_row(path, line_no, e.what());
    }
    if (r.bid_sz < 0 || r.ask_sz < 0) detail::bad_row(path, line_no, "negative size");
    if (!out.empty() && r.ts_ns < out.back().ts_ns) ++disorder;
    out.push_back(r);
  }
  if (disorder > 0)
    std::stable_sort(out.begin(), out.end(),
                     [](const QuoteRecord& a, const QuoteRecord& b) { return a.ts_ns < b.ts_ns; });
  if (warnings) *warnings = disorder;
  return out;
}

inline std::vector<TradeRecord> load_trades(const std::string& path, std::size_t* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTradeHeader) throw std::runtime_error(path + ": unexpected header '" + line + "'");
  std::vector<TradeRecord> out;
  std::size_t line_no = 1, disorder = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = detail::split_csv(line);
    if (f.size() != 3) detail::bad_row(path, line_no, "expected 3 fields");
    TradeRecord r;
    try {
      r.ts_ns = std::stoll(f[0]);
      r.px = std::stod(f[1]);
      r.sz = std::stol(f[2]);
    } catch (const std::exception& e) {
      detail::bad_row(path, line_no, e.what());
    }
    if (r.sz < 1) detail::bad_row(path, line_no, "trade size must be positive");
    if (!out.empty() && r.ts_ns < out.back().ts_ns) ++disorder;
    out.push_back(r);
  }
  if (disorder > 0)
    std::stable_sort(out.begin(), out.end(),
                     [](const TradeRecord& a, const TradeRecord& b) { return a.ts_ns < b.ts_ns; });
  if (warnings) *warnings = disorder;
  return out;
}

inline void write_quotes(const std::string& path, const std::vector<QuoteRecord>& quotes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kQuoteHeader << "\n";
  for (const auto& q : quotes)
    out << q.ts_ns << ',' << detail::format_price(q.bid_px) << ',' << q.bid_sz << ','
        << detail::format_price(q.ask_px) << ',' << q.ask_sz << "\n";
}

inline void write_trades(const std::string& path, const std::vector<TradeRecord>& trades) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kTradeHeader << "\n";
  for (const auto& t : trades)
    out << t.ts_ns << ',' << detail::format_price(t.px) << ',' << t.sz << "\n";
}

// ---------------------------------------------------------------------------
// Session filtering
// ---------------------------------------------------------------------------

struct TimeOfDay {
  int hour = 0;
  int minute = 0;
  int second = 0;

  std::int64_t ns_of_day() const {
    return ((static_cast<std::int64_t>(hour) * 60 + minute) * 60 + second) * 1000000000LL;
  }
};

inline TimeOfDay parse_time_of_day(const std::string& s) {
  TimeOfDay t;
  char sep1 = 0, sep2 = 0;
  std::istringstream in(s);
  in >> t.hour >> sep1 >> t.minute;
  if (in.fail() || sep1 != ':') throw std::invalid_argument("bad time of day: " + s);
  if (in >> sep2 >> t.second) {
    if (sep2 != ':') throw std::invalid_argument("bad time of day: " + s);
  } else {
    t.second = 0;
  }
  if (t.hour < 0 || t.hour > 23 || t.minute < 0 || t.minute > 59 || t.second < 0 || t.second > 59)
    throw std::invalid_argument("bad time of day: " + s);
  return t;
}

inline constexpr std::int64_t kNsPerDay = 86400LL * 1000000000LL;

// Groups records into per-UTC-day sessions, keeping timestamps whose
// time-of-day lies in [start, end). Days with no surviving records yield no
// session.
template <typename Rec>
std::vector<std::vector<Rec>> filter_session(const std::vector<Rec>& records,
                                             TimeOfDay start = {9, 40, 0},
                                             TimeOfDay end = {15, 30, 0}) {
  if (start.ns_of_day() >= end.ns_of_day())
    throw std::invalid_argument("session start must precede session end");
  std::vector<std::vector<Rec>> sessions;
  std::int64_t current_day = std::numeric_limits<std::int64_t>::min();
  for (const Rec& r : records) {
    std::int64_t day = r.ts_ns >= 0 ? r.ts_ns / kNsPerDay
                                    : (r.ts_ns - kNsPerDay + 1) / kNsPerDay;
    std::int64_t tod = r.ts_ns - day * kNsPerDay;
    if (tod < start.ns_of_day() || tod >= end.ns_of_day()) continue;
    if (day != current_day) {
      sessions.emplace_back();
      current_day = day;
    }
    sessions.back().push_back(r);
  }
  return sessions;
}

// ---------------------------------------------------------------------------
// Trade matching
// ---------------------------------------------------------------------------

enum class MatchSide { Ask, Bid };

struct MatchEntry {
  std::size_t trade_index = 0;
  std::size_t quote_change_index = 0;  // index into the quote stream of the post-change quote
  MatchSide side = MatchSide::Ask;
  long s = 0;  // extra demand; 0 for non-depleting matches
};

struct MatchReport {
  std::vector<MatchEntry> matched;
  std::size_t unmatched_count = 0;
  double match_rate = 0;
};

namespace detail {

// Consistency of a trade with the quote change from prev -> cur on one side.
// Returns the s value on a depleting match, 0 on an in-place decrement, and
// nullopt when inconsistent.
inline std::optional<long> trade_consistency(const QuoteRecord& prev, const QuoteRecord& cur,
                                             const TradeRecord& trade, MatchSide side,
                                             double tick_size) {
  const double half_tick = 0.5 * tick_size;
  if (side == MatchSide::Ask) {
    if (std::abs(trade.px - prev.ask_px) > half_tick) return std::nullopt;
    if (cur.ask_px == prev.ask_px && prev.ask_sz - cur.ask_sz == trade.sz) return 0L;
    if (cur.ask_px > prev.ask_px && prev.ask_sz <= trade.sz) return trade.sz - prev.ask_sz;
  } else {
    if (std::abs(trade.px - prev.bid_px) > half_tick) return std::nullopt;
    if (cur.bid_px == prev.bid_px && prev.bid_sz - cur.bid_sz == trade.sz) return 0L;
    if (cur.bid_px < prev.bid_px && prev.bid_sz <= trade.sz) return trade.sz - prev.bid_sz;
  }
  return std::nullopt;
}

}  // namespace detail

// Attributes trades to quote changes within +/- window_ns. A trade is matched
// only when exactly one quote change in its window is consistent with it, and
// a quote change absorbs at most one trade (conflicts unmatch the later
// trade).
inline MatchReport match_trades(const std::vector<QuoteRecord>& quotes,
                                const std::vector<TradeRecord>& trades,
                                std::int64_t window_ns = 1000000000LL,
                                MatchSide side = MatchSide::Ask, double tick_size = 0.01) {
  MatchReport rep;
  if (trades.empty()) return rep;
  std::vector<char> taken(quotes.size(), 0);
  for (std::size_t ti = 0; ti < trades.size(); ++ti) {
    const TradeRecord& tr = trades[ti];
    std::optional<MatchEntry> candidate;
    bool ambiguous = false;
    for (std::size_t qi = 1; qi < quotes.size(); ++qi) {
      if (quotes[qi].ts_ns < tr.ts_ns - window_ns) continue;
      if (quotes[qi].ts_ns > tr.ts_ns + window_ns) break;
      const QuoteRecord& prev = quotes[qi - 1];
      const QuoteRecord& cur = quotes[qi];
      if (prev.ask_px == cur.ask_px && prev.ask_sz == cur.ask_sz && prev.bid_px == cur.bid_px &&
          prev.bid_sz == cur.bid_sz)
        continue;  // not a change
      auto s = detail::trade_consistency(prev, cur, tr, side, tick_size);
      if (!s) continue;
      if (candidate) {
        ambiguous = true;
        break;
      }
      candidate = MatchEntry{ti, qi, side, *s};
    }
    if (candidate && !ambiguous && !taken[candidate->quote_change_index]) {
      taken[candidate->quote_change_index] = 1;
      rep.matched.push_back(*candidate);
    } else {
      ++rep.unmatched_count;
    }
  }
  rep.match_rate =
      static_cast<double>(rep.matched.size()) / static_cast<double>(trades.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Sample construction
// ---------------------------------------------------------------------------

struct SampleConfig {
  Mode mode = Mode::Zi;
  std::size_t max_in_sample = 5000;
  std::size_t min_observations = 20;
  std::int64_t match_window_ns = 1000000000LL;
};

// Infers the tick grid from the data: price_offset is one tick below the
// minimum quoted price, n is the maximum observed ask tick plus the margin.
inline TickGrid infer_grid(const std::vector<std::vector<QuoteRecord>>& sessions,
                           double tick_size, int margin = 64) {
  double min_px = std::numeric_limits<double>::infinity();
  double max_ask = -std::numeric_limits<double>::infinity();
  for (const auto& sess : sessions)
    for (const auto& q : sess) {
      min_px = std::min({min_px, q.bid_px, q.ask_px});
      max_ask = std::max(max_ask, q.ask_px);
    }
  if (!std::isfinite(min_px)) throw std::invalid_argument("infer_grid: no quotes");
  TickGrid grid;
  grid.tick_size = tick_size;
  grid.price_offset = min_px - tick_size;
  grid.n = grid.price_to_tick(max_ask) + margin;
  return grid;
}

// Builds the estimation sample from session-grouped quotes (and, in GZI mode,
// session-grouped trades matched against them). ZI observations are all
// up-jumps of the ask; GZI keeps only up-jumps attributed to a trade, whose
// extra demand s is then known. Unclassifiable quote changes still advance
// the event skeleton's clock.
inline Sample build_sample(const std::vector<std::vector<QuoteRecord>>& quote_sessions,
                           const std::vector<std::vector<TradeRecord>>& trade_sessions,
                           const TickGrid& grid, const SampleConfig& config = {}) {
  if (config.mode == Mode::Gzi && trade_sessions.size() != quote_sessions.size())
    throw std::invalid_argument("build_sample: per-session trades required in gzi mode");
  Sample sample;
  sample.n = grid.n;
  sample.mode = config.mode;

  for (std::size_t si = 0; si < quote_sessions.size(); ++si) {
    const auto& quotes = quote_sessions[si];
    if (quotes.size() < 2) continue;

    // trade attribution for this session (GZI only): quote index -> s
    std::vector<std::optional<long>> s_at(quotes.size());
    if (config.mode == Mode::Gzi) {
      MatchReport mr = match_trades(quotes, trade_sessions[si], config.match_window_ns,
                                    MatchSide::Ask, grid.tick_size);
      for (const auto& m : mr.matched) s_at[m.quote_change_index] = m.s;
    }

    SessionSkeleton sk;
    auto to_state = [&](const QuoteRecord& q) {
      L1State st;
      st.a = q.ask_sz > 0 ? grid.price_to_tick(q.ask_px) : grid.n + 1;
      st.b = q.bid_sz > 0 ? grid.price_to_tick(q.bid_px) : 0;
      st.q = q.ask_sz;
      st.r = q.bid_sz;
      return st;
    };
    sk.initial = to_state(quotes[0]);
    L1State prev = sk.initial;
    std::vector<Observation> session_obs;
    for (std::size_t qi = 1; qi < quotes.size(); ++qi) {
      L1State cur = to_state(quotes[qi]);
      if (cur == prev) continue;
      double dt = (quotes[qi].ts_ns - quotes[qi - 1].ts_ns) * 1e-9;
      sk.dts.push_back(dt);
      sk.states.push_back(cur);
      bool up_jump = cur.a > prev.a;
      bool qualifies = up_jump && (config.mode == Mode::Zi || s_at[qi].has_value());
      if (qualifies) {
        Observation o;
        o.session = static_cast<int>(sample.sessions.size());
        o.step = sk.states.size() - 1;
        o.a_prev = prev.a;
        o.q_prev = prev.q;
        o.a_new = cur.a;
        o.q_new = cur.a <= grid.n ? cur.q : 0;
        o.s = config.mode == Mode::Gzi ? *s_at[qi] : 0;
        session_obs.push_back(o);
      }
      prev = cur;
    }
    if (!sk.states.empty()) {
      sample.sessions.push_back(std::move(sk));
      for (auto& o : session_obs) sample.obs.push_back(o);
    }
  }

  std::size_t total = sample.obs.size();
  sample.n_in = std::min(total, config.max_in_sample);
  std::size_t want_out = (sample.n_in + 9) / 10;  // ceil(N/10)
  std::size_t keep = std::min(total, sample.n_in + want_out);
  sample.obs.resize(keep);
  sample.n_out = keep - sample.n_in;
  sample.insufficient = total < config.min_observations;
  sample.all_unit_jumps = total > 0;
  for (const auto& o : sample.obs)
    if (o.a_new - o.a_prev != 1) sample.all_unit_jumps = false;
  return sample;
}

// Convenience overload for ZI mode without trades.
inline Sample build_sample(const std::vector<std::vector<QuoteRecord>>& quote_sessions,
                           const TickGrid& grid, const SampleConfig& config = {}) {
  return build_sample(quote_sessions, std::vector<std::vector<TradeRecord>>(quote_sessions.size()),
                      grid, config);
}

// ---------------------------------------------------------------------------
// Simulator output -> CSV records
// ---------------------------------------------------------------------------

// Renders an L1 path as quote records on the price grid; seconds are scaled
// to nanoseconds from base_ts. Empty sides are written with size 0 and the
// boundary price.
inline std::vector<QuoteRecord> quotes_from_history(const std::vector<L1Record>& history,
                                                    const TickGrid& grid,
                                                    std::int64_t base_ts_ns = 0) {
  std::vector<QuoteRecord> out;
  out.reserve(history.size());
  for (const auto& rec : history) {
    QuoteRecord q;
    q.ts_ns = base_ts_ns + static_cast<std::int64_t>(std::llround(rec.t * 1e9));
    q.ask_px = grid.tick_to_price(std::min(rec.state.a, grid.n));
    q.ask_sz = rec.state.a <= grid.n ? rec.state.q : 0;
    q.bid_px = grid.tick_to_price(std::max(rec.state.b, 1));
    q.bid_sz = rec.state.b >= 1 ? rec.state.r : 0;
    out.push_back(q);
  }
  return out;
}

inline std::vector<TradeRecord> trades_from_history(const std::vector<L1Record>& history,
                                                    const TickGrid& grid,
                                                    std::int64_t base_ts_ns = 0) {
  std::vector<TradeRecord> out;
  for (std::size_t i = 1; i < history.size(); ++i) {
    const auto& rec = history[i];
    if (rec.trade == 0) continue;
    TradeRecord t;
    t.ts_ns = base_ts_ns + static_cast<std::int64_t>(std::llround(rec.t * 1e9));
    // a buy (negative sign) executes at the pre-event ask, a sell at the bid
    const L1State& before = history[i - 1].state;
    t.px = rec.trade < 0 ? grid.tick_to_price(std::min(before.a, grid.n))
                         : grid.tick_to_price(std::max(before.b, 1));
    t.sz = std::abs(rec.trade);
    out.push_back(t);
  }
  return out;
}

}  // namespace lob

#endif  // LOB_DATA_IO_HPP
