#ifndef LOB_SIMULATOR_HPP
#define LOB_SIMULATOR_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lob/model.hpp"
#include "lob/rng.hpp"

namespace lob {

struct GziConfig {
  double eta = 1.0;                    // survival probability of displaced quote orders
  std::vector<double> mo_volume_pmf = {1.0};  // P[z = 1], P[z = 2], ...
  double shift_prob = 0.0;             // fraction of events that are quote shifts
  // law on (tick displacement, order count) for shift events; empty means
  // "shift the whole quote by one tick"
  std::vector<std::pair<int, double>> shift_displacement_pmf;
  long volume_cap = 100000;            // book-size cap enforcing a dominating chain

  void validate() const {
    if (!(eta > 0 && eta <= 1)) throw std::invalid_argument("GziConfig: eta must be in (0,1]");
    if (!(shift_prob >= 0 && shift_prob < 1))
      throw std::invalid_argument("GziConfig: shift_prob must be in [0,1)");
    if (volume_cap < 1) throw std::invalid_argument("GziConfig: volume_cap must be positive");
    double total = 0;
    for (double w : mo_volume_pmf) {
      if (w < 0) throw std::invalid_argument("GziConfig: negative volume probability");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("GziConfig: mo_volume_pmf must sum to 1");
  }
};

struct SimConfig {
  IntensitySpec spec;
  TickGrid grid;
  std::optional<GziConfig> gzi;
  long max_events = 0;
  long burn_in_events = 0;
  std::uint64_t seed = 0;
  int initial_a = 0;  // deterministic a_0
  int initial_b = 0;  // deterministic b_0
  bool record_books = false;

  void validate() const {
    grid.validate();
    if (initial_b >= initial_a) throw std::invalid_argument("SimConfig: initial book crossed");
    if (initial_a < 1 || initial_a > grid.n + 1 || initial_b < 0 || initial_b > grid.n)
      throw std::invalid_argument("SimConfig: initial quotes off the grid");
    if (max_events < 0) throw std::invalid_argument("SimConfig: max_events must be >= 0");
    if (gzi) gzi->validate();
  }
};

struct SimResult {
  L1History history;
  std::vector<BookState> books;  // book after each recorded jump (if requested)
  std::map<EventKind, long> event_counts;
  double final_time = 0;
  bool absorbed = false;  // chain hit a zero-intensity state
};

// Initial book: one order pinning each quote, Poisson(iota_p) depth beyond it.
inline BookState sample_initial_book(const IntensitySpec& spec, const TickGrid& grid,
                                     int a0, int b0, CounterRng& rng) {
  if (b0 >= a0) throw std::invalid_argument("sample_initial_book: crossed quotes");
  BookState book(grid.n);
  if (a0 <= grid.n) book.ask_depth[a0] = 1;
  for (int p = a0 + 1; p <= grid.n; ++p) book.ask_depth[p] = rng.poisson(spec.iota_at(p));
  if (b0 >= 1) book.bid_depth[b0] = 1;
  for (int p = b0 - 1; p >= 1; --p) book.bid_depth[p] = rng.poisson(spec.iota_at(grid.n + 1 - p));
  return book;
}

// Total jump intensity of the chain in the current state.
inline double total_intensity(const BookState& book, const IntensitySpec& spec,
                              const TickGrid& grid) {
  const int a = book.ask(), b = book.bid();
  double lam = spec.theta(a, b) + spec.vartheta(a, b);
  for (int p = b + 1; p <= grid.n; ++p) lam += spec.kappa(a, b, p);
  for (int p = 1; p <= a - 1 && p <= grid.n; ++p) lam += spec.lambda(a, b, p);
  for (int p = 1; p <= grid.n; ++p) {
    if (book.ask_depth[p] > 0) lam += book.ask_depth[p] * spec.rho(a, b, p);
    if (book.bid_depth[p] > 0) lam += book.bid_depth[p] * spec.sigma(a, b, p);
  }
  return lam;
}

struct StepResult {
  double dt = 0;
  Event event;
  long executed = 0;  // traded volume (market orders only)
};

namespace detail {

struct EventMenu {
  std::vector<double> weights;
  std::vector<Event> events;
  double total = 0;

  void add(const Event& e, double w) {
    if (w <= 0) return;
    weights.push_back(w);
    events.push_back(e);
    total += w;
  }
};

inline EventMenu build_menu(const BookState& book, const IntensitySpec& spec,
                            const TickGrid& grid) {
  const int a = book.ask(), b = book.bid();
  EventMenu menu;
  menu.add({EventKind::BMO}, spec.theta(a, b));
  menu.add({EventKind::SMO}, spec.vartheta(a, b));
  for (int p = b + 1; p <= grid.n; ++p) menu.add({EventKind::SLO, p}, spec.kappa(a, b, p));
  for (int p = 1; p <= a - 1 && p <= grid.n; ++p)
    menu.add({EventKind::BLO, p}, spec.lambda(a, b, p));
  for (int p = 1; p <= grid.n; ++p) {
    if (book.ask_depth[p] > 0) menu.add({EventKind::CA, p}, book.ask_depth[p] * spec.rho(a, b, p));
    if (book.bid_depth[p] > 0) menu.add({EventKind::CB, p}, book.bid_depth[p] * spec.sigma(a, b, p));
  }
  return menu;
}

}  // namespace detail

// One transition of the unit-volume chain. Mutates the book; returns the
// sampled holding time and event. Throws if the chain is absorbed.
inline StepResult step(BookState& book, const IntensitySpec& spec, const TickGrid& grid,
                       CounterRng& rng) {
  auto menu = detail::build_menu(book, spec, grid);
  if (!(menu.total > 0)) throw std::runtime_error("step: chain absorbed (zero total intensity)");
  StepResult out;
  out.dt = rng.exponential(menu.total);
  out.event = menu.events[rng.categorical(menu.weights, menu.total)];
  const Event& e = out.event;
  switch (e.kind) {
    case EventKind::BMO: {
      int a = book.ask();
      if (a <= grid.n) {
        --book.ask_depth[a];
        out.executed = 1;
      }
      break;
    }
    case EventKind::SMO: {
      int b = book.bid();
      if (b >= 1) {
        --book.bid_depth[b];
        out.executed = 1;
      }
      break;
    }
    case EventKind::SLO: ++book.ask_depth[e.price]; break;
    case EventKind::BLO: ++book.bid_depth[e.price]; break;
    case EventKind::CA: --book.ask_depth[e.price]; break;
    case EventKind::CB: --book.bid_depth[e.price]; break;
    default: throw std::logic_error("step: GZI event in ZI step");
  }
  return out;
}

namespace detail {

inline long sample_mo_volume(const GziConfig& gzi, CounterRng& rng) {
  double u = rng.uniform();
  for (std::size_t i = 0; i < gzi.mo_volume_pmf.size(); ++i) {
    u -= gzi.mo_volume_pmf[i];
    if (u <= 0) return static_cast<long>(i) + 1;
  }
  return static_cast<long>(gzi.mo_volume_pmf.size());
}

// Removes the non-surviving displaced quote orders after an in-spread
// insertion on the given side (Bi(count, eta) thinning).
inline void thin_displaced(std::vector<long>& depth, int tick, double eta, CounterRng& rng) {
  if (eta >= 1.0 || depth[tick] == 0) return;
  depth[tick] = rng.binomial(depth[tick], eta);
}

}  // namespace detail

// One transition of the generalized chain: non-unit market orders, survival
// thinning of displaced quotes, and quote shifts.
inline StepResult gzi_step(BookState& book, const IntensitySpec& spec, const GziConfig& gzi,
                           const TickGrid& grid, CounterRng& rng) {
  auto menu = detail::build_menu(book, spec, grid);
  if (!(menu.total > 0)) throw std::runtime_error("gzi_step: chain absorbed");
  StepResult out;
  // Shift events ride on top of the base flow so that a fraction
  // shift_prob of all transitions is a quote shift.
  double shift_rate = gzi.shift_prob > 0 ? menu.total * gzi.shift_prob / (1 - gzi.shift_prob) : 0;
  double grand_total = menu.total + shift_rate;
  out.dt = rng.exponential(grand_total);

  const int a = book.ask(), b = book.bid();
  bool is_shift = shift_rate > 0 && rng.uniform() * grand_total < shift_rate;
  if (is_shift && (a <= grid.n || b >= 1)) {
    // Pick the side (ask if both present and a fair coin says so).
    bool ask_side = a <= grid.n && (b < 1 || rng.uniform() < 0.5);
    int d = 1;
    if (!gzi.shift_displacement_pmf.empty()) {
      double u = rng.uniform();
      for (auto& [disp, w] : gzi.shift_displacement_pmf) {
        u -= w;
        d = disp;
        if (u <= 0) break;
      }
    }
    bool outward = rng.uniform() < 0.5;  // away from the spread
    if (ask_side) {
      long z = book.ask_depth[a];
      if (outward) {
        out.event = {EventKind::SAR, a, z, d};
        book.ask_depth[a] = 0;
        int target = a + d;
        if (target <= grid.n) book.ask_depth[target] += z;  // off-grid shifts cancel
      } else {
        int target = std::max(b + 1, a - d);  // price-crossing shifts are forbidden
        out.event = {EventKind::SAL, a, z, a - target};
        if (target != a) {
          book.ask_depth[a] = 0;
          book.ask_depth[target] += z;
        }
      }
    } else {
      long z = book.bid_depth[b];
      if (outward) {
        out.event = {EventKind::SAL, b, z, d};  // bid-side mirror of SAR
        book.bid_depth[b] = 0;
        int target = b - d;
        if (target >= 1) book.bid_depth[target] += z;
      } else {
        int target = std::min(a - 1, b + d);
        out.event = {EventKind::SAR, b, z, target - b};
        if (target != b) {
          book.bid_depth[b] = 0;
          book.bid_depth[target] += z;
        }
      }
    }
    return out;
  }

  for (int attempt = 0; attempt < 64; ++attempt) {
    Event e = menu.events[rng.categorical(menu.weights, menu.total)];
    // Assumption E device: arrivals that would exceed the cap are resampled.
    if ((e.kind == EventKind::SLO || e.kind == EventKind::BLO) &&
        book.total_orders() + 1 > gzi.volume_cap)
      continue;
    out.event = e;
    switch (e.kind) {
      case EventKind::BMO: {
        long z = detail::sample_mo_volume(gzi, rng);
        out.event.volume = z;
        long remaining = z;
        for (int p = book.ask(); p <= grid.n && remaining > 0; ++p) {
          long take = std::min(remaining, book.ask_depth[p]);
          book.ask_depth[p] -= take;
          remaining -= take;
        }
        out.executed = z - remaining;
        break;
      }
      case EventKind::SMO: {
        long z = detail::sample_mo_volume(gzi, rng);
        out.event.volume = z;
        long remaining = z;
        for (int p = book.bid(); p >= 1 && remaining > 0; --p) {
          long take = std::min(remaining, book.bid_depth[p]);
          book.bid_depth[p] -= take;
          remaining -= take;
        }
        out.executed = z - remaining;
        break;
      }
      case EventKind::SLO:
        ++book.ask_depth[e.price];
        // In-spread insertion displaces the former quote orders; each
        // survives with probability eta.
        if (e.price < a && a <= grid.n) detail::thin_displaced(book.ask_depth, a, gzi.eta, rng);
        break;
      case EventKind::BLO:
        ++book.bid_depth[e.price];
        if (e.price > b && b >= 1) detail::thin_displaced(book.bid_depth, b, gzi.eta, rng);
        break;
      case EventKind::CA: --book.ask_depth[e.price]; break;
      case EventKind::CB: --book.bid_depth[e.price]; break;
      default: break;
    }
    return out;
  }
  // Every draw hit the cap; treat the step as a capped no-op arrival.
  out.event = {EventKind::SLO, std::min(a, grid.n), 0, 0};
  out.event.volume = 0;
  return out;
}

// Runs the chain: burn-in, then max_events transitions. The history records
// only the instants where the L1 state changes.
inline SimResult simulate(const SimConfig& config) {
  config.validate();
  CounterRng rng(config.seed);
  CounterRng init_rng = rng.stream(0);
  CounterRng path_rng = rng.stream(1);

  BookState book = sample_initial_book(config.spec, config.grid, config.initial_a,
                                       config.initial_b, init_rng);
  SimResult result;
  double t = 0;
  L1State x = l1_of(book);

  auto one_step = [&]() -> StepResult {
    return config.gzi ? gzi_step(book, config.spec, *config.gzi, config.grid, path_rng)
                      : step(book, config.spec, config.grid, path_rng);
  };

  for (long i = 0; i < config.burn_in_events; ++i) {
    if (!(total_intensity(book, config.spec, config.grid) > 0)) {
      result.absorbed = true;
      return result;
    }
    StepResult s = one_step();
    t += s.dt;
    x = l1_of(book);
  }

  double last_jump_t = t;
  for (long i = 0; i < config.max_events; ++i) {
    if (!(total_intensity(book, config.spec, config.grid) > 0)) {
      result.absorbed = true;
      break;
    }
    StepResult s = one_step();
    t += s.dt;
    ++result.event_counts[s.event.kind];
    L1State nx = l1_of(book);
    if (nx != x) {
      L1Record rec;
      rec.t = t;
      rec.dt = t - last_jump_t;
      rec.state = nx;
      rec.event = s.event;
      if (s.executed > 0)
        rec.trade = s.event.kind == EventKind::SMO ? s.executed : -s.executed;
      result.history.push_back(rec);
      if (config.record_books) result.books.push_back(book);
      last_jump_t = t;
      x = nx;
    }
  }
  result.final_time = t;
  return result;
}

}  // namespace lob

#endif  // LOB_SIMULATOR_HPP
