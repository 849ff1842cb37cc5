#ifndef LOB_REPORT_HPP
#define LOB_REPORT_HPP

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lob/data_io.hpp"
#include "lob/estimator.hpp"
#include "lob/stats.hpp"

namespace lob {

inline constexpr const char* kReportSchemaVersion = "1.0";

using json = nlohmann::ordered_json;

// Significance stars at the 0.05 / 0.01 / 0.001 levels.
inline std::string significance_stars(double p_value) {
  if (p_value < 0.001) return "***";
  if (p_value < 0.01) return "**";
  if (p_value < 0.05) return "*";
  return "";
}

namespace detail {

// JSON has no representation for infinities; encode them as strings.
inline json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace detail

inline json params_to_json(const ModelParams& p) {
  json j;
  j["variant"] = to_string(p.variant);
  j["kappa_levels"] = p.kappa_levels;
  j["rho_levels"] = p.rho_levels;
  if (has_tail(p.variant)) {
    j["alpha_kappa"] = p.alpha_kappa;
    j["alpha_rho"] = p.alpha_rho;
  }
  if (p.eta) j["eta"] = *p.eta;
  return j;
}

inline json fit_to_json(const FitResult& fit, bool include_timing = true) {
  json j;
  j["params"] = params_to_json(fit.params);
  j["log_lik"] = detail::num(fit.log_lik);
  json table = json::array();
  std::vector<std::string> names = fit.params.names();
  std::vector<double> values = to_natural(fit.params);
  for (std::size_t i = 0; i < names.size(); ++i) {
    json row;
    row["name"] = names[i];
    row["estimate"] = detail::num(values[i]);
    row["std_error"] = i < fit.std_errors.size() ? detail::num(fit.std_errors[i]) : json("nan");
    double pv = i < fit.param_pvalues.size() ? fit.param_pvalues[i] : 1.0;
    row["p_value"] = detail::num(pv);
    row["stars"] = significance_stars(pv);
    table.push_back(row);
  }
  j["coefficients"] = table;
  j["converged"] = fit.converged;
  j["timed_out"] = fit.timed_out;
  j["std_errors_available"] = fit.std_errors_available;
  j["boundary_flag"] = fit.boundary_flag;
  j["iterations"] = fit.iterations;
  if (include_timing) j["wall_time_s"] = fit.wall_time;
  return j;
}

inline json selection_to_json(const SelectionOutcome& sel, bool include_timing = true) {
  json j;
  j["chosen"] = sel.chosen ? json(to_string(*sel.chosen)) : json(nullptr);
  j["stopped_reason"] = to_string(sel.stopped_reason);
  j["reduced_sample"] = sel.reduced_sample;
  json ladder = json::array();
  for (const auto& entry : sel.ladder) {
    json e;
    e["variant"] = to_string(entry.variant);
    e["fit"] = fit_to_json(entry.fit, include_timing);
    e["lr_pvalue_vs_next"] =
        entry.lr_pvalue_vs_next ? detail::num(*entry.lr_pvalue_vs_next) : json(nullptr);
    ladder.push_back(e);
  }
  j["ladder"] = ladder;
  return j;
}

inline json prediction_to_json(const PredictionReport& rep) {
  json j;
  j["p_m"] = detail::num(rep.p_m);
  j["naive_mae"] = detail::num(rep.naive_mae);
  j["model_mae"] = detail::num(rep.model_mae);
  j["n_out"] = rep.n_out;
  j["benchmark_full_sample"] = rep.benchmark_full_sample;
  return j;
}

inline json match_to_json(const MatchReport& rep) {
  json j;
  json matched = json::array();
  for (const auto& m : rep.matched) {
    json e;
    e["trade_index"] = m.trade_index;
    e["quote_change_index"] = m.quote_change_index;
    e["side"] = m.side == MatchSide::Ask ? "ask" : "bid";
    e["s"] = m.s;
    matched.push_back(e);
  }
  j["matched"] = matched;
  j["matched_count"] = rep.matched.size();
  j["unmatched_count"] = rep.unmatched_count;
  j["match_rate"] = detail::num(rep.match_rate);
  return j;
}

inline json sample_to_json(const Sample& sample) {
  json j;
  j["mode"] = to_string(sample.mode);
  j["n"] = sample.n;
  j["sessions"] = sample.sessions.size();
  j["n_in"] = sample.n_in;
  j["n_out"] = sample.n_out;
  j["insufficient"] = sample.insufficient;
  j["all_unit_jumps"] = sample.all_unit_jumps;
  return j;
}

inline json wilcoxon_to_json(const WilcoxonResult& w) {
  json j;
  j["statistic"] = detail::num(w.statistic);
  j["p_value"] = detail::num(w.p_value);
  j["n_used"] = w.n_used;
  j["exact"] = w.exact;
  j["all_tied"] = w.all_tied;
  return j;
}

// Wraps a report body with the schema version and the fully resolved run
// configuration, making every report reproducible from itself.
inline json make_report(const std::string& kind, json body, json resolved_config) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = kind;
  j["config"] = std::move(resolved_config);
  j["body"] = std::move(body);
  return j;
}

// Plain-text coefficient table in the conventional layout
// (estimate (std error) stars, one row per parameter).
inline std::string fit_table(const FitResult& fit) {
  std::string out;
  std::vector<std::string> names = fit.params.names();
  std::vector<double> values = to_natural(fit.params);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s %14s %14s %8s\n", "parameter", "estimate", "std_error",
                "sig");
  out += buf;
  for (std::size_t i = 0; i < names.size(); ++i) {
    double se = i < fit.std_errors.size() ? fit.std_errors[i] : std::nan("");
    double pv = i < fit.param_pvalues.size() ? fit.param_pvalues[i] : 1.0;
    std::snprintf(buf, sizeof(buf), "%-12s %14.6g %14.6g %8s\n", names[i].c_str(), values[i], se,
                  significance_stars(pv).c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "log-likelihood: %.6f\n", fit.log_lik);
  out += buf;
  return out;
}

}  // namespace lob

#endif  // LOB_REPORT_HPP
