// Command-line front end: simulate / estimate / select / predict / match /
// compare, with plain-text config files and versioned JSON reports.
//
// Exit codes: 0 success, 2 insufficient data, 3 timeout, 4 input error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lob/data_io.hpp"
#include "lob/density.hpp"
#include "lob/estimator.hpp"
#include "lob/model.hpp"
#include "lob/report.hpp"
#include "lob/simulator.hpp"
#include "lob/stats.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInsufficient = 2;
constexpr int kExitTimeout = 3;
constexpr int kExitInput = 4;

// 2020-01-06 (Monday) 09:40:00 UTC, in nanoseconds since the epoch.
constexpr std::int64_t kDefaultBaseTs = 1578303600LL * 1000000000LL;

void write_json(const std::string& path, const lob::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

lob::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return lob::json::parse(in);
}

struct GridOptions {
  double tick_size = 0.01;
  int margin = 64;
};

struct SessionOptions {
  std::string start = "09:40";
  std::string end = "15:30";
  bool no_filter = false;
};

struct DataOptions {
  std::string quotes_path;
  std::string trades_path;
  std::string mode = "zi";
  GridOptions grid;
  SessionOptions session;
  std::size_t max_in_sample = 5000;
};

void add_data_options(CLI::App* cmd, DataOptions& d, bool need_trades_flag = true) {
  cmd->add_option("--quotes", d.quotes_path, "quote CSV file")->required();
  if (need_trades_flag) cmd->add_option("--trades", d.trades_path, "trade CSV file");
  cmd->add_option("--mode", d.mode, "zi or gzi")->check(CLI::IsMember({"zi", "gzi"}));
  cmd->add_option("--tick-size", d.grid.tick_size, "price tick size");
  cmd->add_option("--margin", d.grid.margin, "grid margin above the max observed ask tick");
  cmd->add_option("--session-start", d.session.start, "session window start (HH:MM)");
  cmd->add_option("--session-end", d.session.end, "session window end (HH:MM)");
  cmd->add_flag("--no-session-filter", d.session.no_filter,
                "treat the whole stream as one session");
  cmd->add_option("--max-in-sample", d.max_in_sample, "in-sample observation cap");
}

lob::json data_config_json(const DataOptions& d) {
  lob::json j;
  j["quotes"] = d.quotes_path;
  j["trades"] = d.trades_path;
  j["mode"] = d.mode;
  j["tick_size"] = d.grid.tick_size;
  j["margin"] = d.grid.margin;
  j["session_start"] = d.session.start;
  j["session_end"] = d.session.end;
  j["no_session_filter"] = d.session.no_filter;
  j["max_in_sample"] = d.max_in_sample;
  return j;
}

struct LoadedData {
  lob::TickGrid grid;
  lob::Sample sample;
};

LoadedData load_data(const DataOptions& d) {
  std::vector<lob::QuoteRecord> quotes = lob::load_quotes(d.quotes_path);
  std::vector<std::vector<lob::QuoteRecord>> quote_sessions;
  std::vector<std::vector<lob::TradeRecord>> trade_sessions;
  const bool gzi = d.mode == "gzi";
  std::vector<lob::TradeRecord> trades;
  if (gzi) {
    if (d.trades_path.empty()) throw std::runtime_error("gzi mode requires --trades");
    trades = lob::load_trades(d.trades_path);
  }
  if (d.session.no_filter) {
    quote_sessions.push_back(std::move(quotes));
    trade_sessions.push_back(std::move(trades));
  } else {
    lob::TimeOfDay start = lob::parse_time_of_day(d.session.start);
    lob::TimeOfDay end = lob::parse_time_of_day(d.session.end);
    quote_sessions = lob::filter_session(quotes, start, end);
    if (gzi) {
      // align per-day trade sessions with the quote sessions
      auto t_sessions = lob::filter_session(trades, start, end);
      for (const auto& qs : quote_sessions) {
        std::int64_t day = qs.front().ts_ns / lob::kNsPerDay;
        std::vector<lob::TradeRecord> match;
        for (auto& ts : t_sessions)
          if (!ts.empty() && ts.front().ts_ns / lob::kNsPerDay == day) match = ts;
        trade_sessions.push_back(std::move(match));
      }
    } else {
      trade_sessions.resize(quote_sessions.size());
    }
  }
  LoadedData out;
  out.grid = lob::infer_grid(quote_sessions, d.grid.tick_size, d.grid.margin);
  lob::SampleConfig sc;
  sc.mode = gzi ? lob::Mode::Gzi : lob::Mode::Zi;
  sc.max_in_sample = d.max_in_sample;
  out.sample = lob::build_sample(quote_sessions, trade_sessions, out.grid, sc);
  return out;
}

lob::ModelParams params_from_json(const lob::json& j) {
  lob::ModelParams p;
  auto v = lob::variant_from_string(j.at("variant").get<std::string>());
  if (!v) throw std::runtime_error("unknown variant in report");
  p.variant = *v;
  p.kappa_levels = j.at("kappa_levels").get<std::vector<double>>();
  p.rho_levels = j.at("rho_levels").get<std::vector<double>>();
  if (j.contains("alpha_kappa")) p.alpha_kappa = j.at("alpha_kappa").get<double>();
  if (j.contains("alpha_rho")) p.alpha_rho = j.at("alpha_rho").get<double>();
  if (j.contains("eta")) p.eta = j.at("eta").get<double>();
  return p;
}

// --------------------------------------------------------------------------
// simulate
// --------------------------------------------------------------------------

struct SimulateOptions {
  std::string preset = "smith";
  int n = 32;
  double theta = 1.0;
  double kappa = 0.5;
  double rho = 0.2;
  long events = 10000;
  long burn_in = 0;
  std::uint64_t seed = 1;
  int initial_a = 0;
  int initial_b = 0;
  double tick_size = 0.01;
  double price_offset = 0.0;
  std::string out_dir = ".";
  bool gzi = false;
  double eta = 1.0;
  std::string mo_pmf = "1.0";
  double shift_prob = 0.0;
};

std::vector<double> parse_pmf(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

int cmd_simulate(const SimulateOptions& o) {
  lob::TickGrid grid{o.n, o.tick_size, o.price_offset};
  lob::SimConfig cfg;
  cfg.grid = grid;
  if (o.preset == "smith") {
    cfg.spec = lob::smith_preset(o.theta, o.kappa, o.rho, grid);
  } else if (o.preset == "stigler") {
    cfg.spec = lob::stigler_preset(grid);
  } else if (o.preset == "cont") {
    double kap = o.kappa, rh = o.rho;
    cfg.spec = lob::cont_preset(
        o.theta, [kap](int d) { return d >= 1 ? kap / d : kap; },
        [rh](int d) { return d >= 1 ? rh / d : rh; }, grid);
  } else {
    std::cerr << "unknown preset: " << o.preset << "\n";
    return kExitInput;
  }
  cfg.max_events = o.events;
  cfg.burn_in_events = o.burn_in;
  cfg.seed = o.seed;
  cfg.initial_a = o.initial_a > 0 ? o.initial_a : (o.n + 2) / 2 + 1;
  cfg.initial_b = o.initial_b > 0 ? o.initial_b : (o.n + 2) / 2 - 1;
  if (o.gzi) {
    lob::GziConfig g;
    g.eta = o.eta;
    g.mo_volume_pmf = parse_pmf(o.mo_pmf);
    g.shift_prob = o.shift_prob;
    cfg.gzi = g;
  }

  lob::SimResult result = lob::simulate(cfg);

  namespace fs = std::filesystem;
  fs::create_directories(o.out_dir);
  auto quotes = lob::quotes_from_history(result.history, grid, kDefaultBaseTs);
  auto trades = lob::trades_from_history(result.history, grid, kDefaultBaseTs);
  lob::write_quotes((fs::path(o.out_dir) / "quotes.csv").string(), quotes);
  lob::write_trades((fs::path(o.out_dir) / "trades.csv").string(), trades);

  lob::json config;
  config["preset"] = o.preset;
  config["n"] = o.n;
  config["theta"] = o.theta;
  config["kappa"] = o.kappa;
  config["rho"] = o.rho;
  config["events"] = o.events;
  config["burn_in"] = o.burn_in;
  config["seed"] = o.seed;
  config["initial_a"] = cfg.initial_a;
  config["initial_b"] = cfg.initial_b;
  config["tick_size"] = o.tick_size;
  config["price_offset"] = o.price_offset;
  config["gzi"] = o.gzi;
  if (o.gzi) {
    config["eta"] = o.eta;
    config["mo_pmf"] = o.mo_pmf;
    config["shift_prob"] = o.shift_prob;
  }
  lob::json body;
  lob::json counts;
  for (auto& [kind, c] : result.event_counts) counts[lob::to_string(kind)] = c;
  body["event_counts"] = counts;
  body["l1_changes"] = result.history.size();
  body["trades"] = trades.size();
  body["final_time_s"] = result.final_time;
  body["absorbed"] = result.absorbed;
  write_json((fs::path(o.out_dir) / "manifest.json").string(),
             lob::make_report("simulate", body, config));

  if (result.absorbed) {
    std::cerr << "chain absorbed before reaching the requested event count\n";
    return kExitInsufficient;
  }
  return kExitOk;
}

// --------------------------------------------------------------------------
// estimate / select / predict
// --------------------------------------------------------------------------

struct FitCliOptions {
  std::string variant = "S";
  double budget_seconds = 2500;
  int max_iterations = 300;
  double fix_eta = -1;  // < 0 means "estimate it"
  double level = 0.05;
  std::string out_path;
  bool table = false;
};

void add_fit_options(CLI::App* cmd, FitCliOptions& f) {
  cmd->add_option("--budget", f.budget_seconds, "wall-clock budget in seconds");
  cmd->add_option("--max-iter", f.max_iterations, "optimizer iteration cap");
  cmd->add_option("--fix-eta", f.fix_eta, "pin eta at the given value (gzi mode)");
  cmd->add_option("--level", f.level, "significance level for Wald and LR tests");
  cmd->add_option("--out", f.out_path, "report output path");
  cmd->add_flag("--table", f.table, "print a plain-text coefficient table");
}

lob::FitOptions make_fit_options(const FitCliOptions& f) {
  lob::FitOptions opts;
  opts.budget.wall_seconds = f.budget_seconds;
  opts.budget.max_iterations = f.max_iterations;
  if (f.fix_eta >= 0) opts.fixed_eta = f.fix_eta;
  return opts;
}

lob::json fit_config_json(const DataOptions& d, const FitCliOptions& f, bool with_variant) {
  lob::json j = data_config_json(d);
  if (with_variant) j["variant"] = f.variant;
  j["budget_s"] = f.budget_seconds;
  j["max_iterations"] = f.max_iterations;
  if (f.fix_eta >= 0) j["fix_eta"] = f.fix_eta;
  j["level"] = f.level;
  return j;
}

int cmd_estimate(const DataOptions& d, const FitCliOptions& f) {
  LoadedData data = load_data(d);
  if (data.sample.insufficient) {
    std::cerr << "insufficient data: " << data.sample.size() << " observations\n";
    return kExitInsufficient;
  }
  auto variant = lob::variant_from_string(f.variant);
  if (!variant) {
    std::cerr << "unknown variant: " << f.variant << "\n";
    return kExitInput;
  }
  lob::Mode mode = d.mode == "gzi" ? lob::Mode::Gzi : lob::Mode::Zi;
  lob::FitResult fit = lob::fit(data.sample, *variant, mode, std::nullopt, make_fit_options(f));
  lob::json body = lob::fit_to_json(fit);
  body["sample"] = lob::sample_to_json(data.sample);
  lob::json report = lob::make_report("estimate", body, fit_config_json(d, f, true));
  if (!f.out_path.empty()) write_json(f.out_path, report);
  if (f.table) std::cout << lob::fit_table(fit);
  if (f.out_path.empty() && !f.table) std::cout << report.dump(2) << "\n";
  if (fit.timed_out) {
    std::cerr << "fit timed out\n";
    return kExitTimeout;
  }
  return kExitOk;
}

int cmd_select(const DataOptions& d, const FitCliOptions& f) {
  LoadedData data = load_data(d);
  if (data.sample.insufficient) {
    std::cerr << "insufficient data: " << data.sample.size() << " observations\n";
    return kExitInsufficient;
  }
  lob::Mode mode = d.mode == "gzi" ? lob::Mode::Gzi : lob::Mode::Zi;
  lob::SelectionOutcome sel =
      lob::select_model(data.sample, mode, make_fit_options(f), f.level);
  lob::json body = lob::selection_to_json(sel);
  body["sample"] = lob::sample_to_json(data.sample);
  lob::json report = lob::make_report("select", body, fit_config_json(d, f, false));
  if (!f.out_path.empty()) write_json(f.out_path, report);
  if (f.table) {
    for (const auto& entry : sel.ladder) {
      std::cout << "variant " << lob::to_string(entry.variant) << ":\n"
                << lob::fit_table(entry.fit);
      if (entry.lr_pvalue_vs_next)
        std::printf("LR p-value vs next: %.6g\n", *entry.lr_pvalue_vs_next);
    }
    std::cout << "chosen: " << (sel.chosen ? lob::to_string(*sel.chosen) : "none") << "\n";
  }
  if (f.out_path.empty() && !f.table) std::cout << report.dump(2) << "\n";
  if (sel.stopped_reason == lob::StopReason::Timeout && !sel.chosen) {
    std::cerr << "selection timed out\n";
    return kExitTimeout;
  }
  return kExitOk;
}

int cmd_predict(const DataOptions& d, const std::string& fit_report_path,
                const std::string& key, const std::string& out_path, bool full_benchmark) {
  LoadedData data = load_data(d);
  if (data.sample.insufficient || data.sample.n_out == 0) {
    std::cerr << "insufficient data for prediction\n";
    return kExitInsufficient;
  }
  lob::json fit_report = read_json(fit_report_path);
  const lob::json& body = fit_report.at("body");
  lob::json params_json;
  if (body.contains("params")) {
    params_json = body.at("params");
  } else if (body.contains("ladder")) {
    // selection report: take the chosen variant's fit
    std::string chosen = body.at("chosen").get<std::string>();
    for (const auto& entry : body.at("ladder"))
      if (entry.at("variant").get<std::string>() == chosen)
        params_json = entry.at("fit").at("params");
  }
  if (params_json.is_null()) throw std::runtime_error("no parameters found in " + fit_report_path);
  lob::ModelParams params = params_from_json(params_json);

  lob::PredictionReport rep = lob::prediction_power(data.sample, params, full_benchmark);
  lob::json config = data_config_json(d);
  config["fit_report"] = fit_report_path;
  config["key"] = key;
  config["benchmark_full_sample"] = full_benchmark;
  lob::json out_body = lob::prediction_to_json(rep);
  out_body["params"] = params_json;
  out_body["sample"] = lob::sample_to_json(data.sample);
  lob::json report = lob::make_report("predict", out_body, config);
  if (!out_path.empty()) write_json(out_path, report);
  else std::cout << report.dump(2) << "\n";
  return kExitOk;
}

// --------------------------------------------------------------------------
// match / compare
// --------------------------------------------------------------------------

int cmd_match(const DataOptions& d, double window_seconds, const std::string& side,
              const std::string& out_path) {
  std::vector<lob::QuoteRecord> quotes = lob::load_quotes(d.quotes_path);
  std::vector<lob::TradeRecord> trades = lob::load_trades(d.trades_path);
  auto window_ns = static_cast<std::int64_t>(window_seconds * 1e9);
  lob::MatchReport rep =
      lob::match_trades(quotes, trades, window_ns,
                        side == "bid" ? lob::MatchSide::Bid : lob::MatchSide::Ask,
                        d.grid.tick_size);
  lob::json config = data_config_json(d);
  config["window_s"] = window_seconds;
  config["side"] = side;
  lob::json report = lob::make_report("match", lob::match_to_json(rep), config);
  if (!out_path.empty()) write_json(out_path, report);
  else std::cout << report.dump(2) << "\n";
  return kExitOk;
}

int cmd_compare(const std::vector<std::string>& left, const std::vector<std::string>& right,
                const std::string& out_path, std::size_t min_pairs) {
  auto read_pm = [](const std::string& path) {
    lob::json j = read_json(path);
    std::string key = j.at("config").value("key", path);
    const auto& pm = j.at("body").at("p_m");
    double v = pm.is_string() ? -std::numeric_limits<double>::infinity() : pm.get<double>();
    return std::pair<std::string, double>(key, v);
  };
  std::map<std::string, double> a, b;
  for (const auto& p : left) a.insert(read_pm(p));
  for (const auto& p : right) b.insert(read_pm(p));
  std::vector<std::string> unmatched;
  std::vector<std::pair<double, double>> pairs;
  std::vector<double> av, bv;
  for (auto& [k, v] : a) {
    auto it = b.find(k);
    if (it == b.end()) {
      unmatched.push_back(k);
      continue;
    }
    pairs.push_back({v, it->second});
    av.push_back(v);
    bv.push_back(it->second);
  }
  for (auto& [k, v] : b)
    if (!a.count(k)) unmatched.push_back(k);
  if (!unmatched.empty()) {
    std::cerr << "unmatched pairing keys:";
    for (auto& k : unmatched) std::cerr << " " << k;
    std::cerr << "\n";
    return kExitInput;
  }
  if (pairs.size() < min_pairs) {
    std::cerr << "need at least " << min_pairs << " pairs, got " << pairs.size() << "\n";
    return kExitInsufficient;
  }
  lob::WilcoxonResult w = lob::wilcoxon_signed_rank(pairs);
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  lob::json config;
  config["left"] = left;
  config["right"] = right;
  lob::json body = lob::wilcoxon_to_json(w);
  body["n_pairs"] = pairs.size();
  body["median_left"] = median(av);
  body["median_right"] = median(bv);
  lob::json report = lob::make_report("compare", body, config);
  if (!out_path.empty()) write_json(out_path, report);
  else std::cout << report.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"limit-order-book model simulator and estimator"};
  app.require_subcommand(1);
  app.set_config("--config", "", "plain-text key=value config file");

  SimulateOptions sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "simulate a model and write CSV data");
  c_sim->add_option("--preset", sim.preset, "smith | cont | stigler");
  c_sim->add_option("--n", sim.n, "grid size in ticks");
  c_sim->add_option("--theta", sim.theta, "market-order rate");
  c_sim->add_option("--kappa", sim.kappa, "limit-order rate per tick");
  c_sim->add_option("--rho", sim.rho, "per-order cancellation rate");
  c_sim->add_option("--events", sim.events, "number of transitions to simulate");
  c_sim->add_option("--burn-in", sim.burn_in, "transitions to discard first");
  c_sim->add_option("--seed", sim.seed, "random seed");
  c_sim->add_option("--initial-a", sim.initial_a, "initial ask tick (0 = grid midpoint)");
  c_sim->add_option("--initial-b", sim.initial_b, "initial bid tick (0 = grid midpoint)");
  c_sim->add_option("--tick-size", sim.tick_size, "price tick size");
  c_sim->add_option("--price-offset", sim.price_offset, "currency value of tick 1");
  c_sim->add_option("--out-dir", sim.out_dir, "output directory");
  c_sim->add_flag("--gzi", sim.gzi, "generalized model");
  c_sim->add_option("--eta", sim.eta, "displaced-quote survival probability");
  c_sim->add_option("--mo-pmf", sim.mo_pmf, "comma-separated market-order volume pmf");
  c_sim->add_option("--shift-prob", sim.shift_prob, "fraction of events that are quote shifts");

  DataOptions d_est, d_sel, d_pred, d_match;
  FitCliOptions f_est, f_sel;
  CLI::App* c_est = app.add_subcommand("estimate", "fit one model variant");
  add_data_options(c_est, d_est);
  c_est->add_option("--variant", f_est.variant, "S | T1 | T2 | T3");
  add_fit_options(c_est, f_est);

  CLI::App* c_sel = app.add_subcommand("select", "run the model-selection ladder");
  add_data_options(c_sel, d_sel);
  add_fit_options(c_sel, f_sel);

  std::string pred_fit_report, pred_key = "default", pred_out;
  bool pred_full_benchmark = false;
  CLI::App* c_pred = app.add_subcommand("predict", "out-of-sample prediction power");
  add_data_options(c_pred, d_pred);
  c_pred->add_option("--fit-report", pred_fit_report, "estimate or select report to read parameters from")
      ->required();
  c_pred->add_option("--key", pred_key, "pairing key recorded in the report");
  c_pred->add_option("--out", pred_out, "report output path");
  c_pred->add_flag("--benchmark-full-sample", pred_full_benchmark,
                   "benchmark against the full-sample mean jump");

  double match_window = 1.0;
  std::string match_side = "ask", match_out;
  CLI::App* c_match = app.add_subcommand("match", "attribute trades to quote changes");
  add_data_options(c_match, d_match);
  c_match->get_option("--trades")->required();
  c_match->add_option("--window", match_window, "matching window in seconds");
  c_match->add_option("--side", match_side, "ask | bid")->check(CLI::IsMember({"ask", "bid"}));
  c_match->add_option("--out", match_out, "report output path");

  std::vector<std::string> cmp_left, cmp_right;
  std::string cmp_out;
  std::size_t cmp_min_pairs = 6;
  CLI::App* c_cmp = app.add_subcommand("compare", "Wilcoxon test on paired prediction reports");
  c_cmp->add_option("--left", cmp_left, "prediction reports, first group")->required();
  c_cmp->add_option("--right", cmp_right, "prediction reports, second group")->required();
  c_cmp->add_option("--min-pairs", cmp_min_pairs, "minimum number of pairs");
  c_cmp->add_option("--out", cmp_out, "report output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_sim) return cmd_simulate(sim);
    if (*c_est) return cmd_estimate(d_est, f_est);
    if (*c_sel) return cmd_select(d_sel, f_sel);
    if (*c_pred)
      return cmd_predict(d_pred, pred_fit_report, pred_key, pred_out, pred_full_benchmark);
    if (*c_match) return cmd_match(d_match, match_window, match_side, match_out);
    if (*c_cmp) return cmd_compare(cmp_left, cmp_right, cmp_out, cmp_min_pairs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
