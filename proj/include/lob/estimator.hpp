#ifndef LOB_ESTIMATOR_HPP
#define LOB_ESTIMATOR_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lob/density.hpp"
#include "lob/model.hpp"
#include "lob/optim.hpp"
#include "lob/stats.hpp"

namespace lob {

enum class Mode { Zi, Gzi };

inline const char* to_string(Mode m) { return m == Mode::Zi ? "zi" : "gzi"; }

// One likelihood observation: an up-jump of the ask at a known step of the
// session skeleton. s is the extra demand of the depleting event (GZI only).
struct Observation {
  int session = 0;
  std::size_t step = 0;  // index into the session's steps
  int a_prev = 0;
  long q_prev = 0;
  int a_new = 0;
  long q_new = 0;
  long s = 0;
};

// The parameter-independent event skeleton of one trading session: the full
// L1 path with inter-event times, re-swept for every parameter value.
struct SessionSkeleton {
  L1State initial;
  std::vector<double> dts;       // dt of step i
  std::vector<L1State> states;   // state after step i
};

struct Sample {
  int n = 0;  // grid size
  Mode mode = Mode::Zi;
  std::vector<SessionSkeleton> sessions;
  std::vector<Observation> obs;  // chronological; first n_in are in-sample
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  bool insufficient = false;
  bool all_unit_jumps = false;   // degenerate-sample flag (P_m = -inf risk)

  std::size_t size() const { return obs.size(); }
};

namespace detail {

// Sweeps the posterior recursion over every session, invoking fn(obs_index,
// posterior) with the posterior decayed to the observation instant.
// Stops after the last observation with index < limit.
template <typename Fn>
void sweep_sample(const Sample& sample, const ModelParams& params, std::size_t limit, Fn&& fn) {
  const bool gzi = sample.mode == Mode::Gzi;
  const double eta = params.eta.value_or(1.0);
  std::size_t oi = 0;  // next observation to visit
  for (int sess = 0; sess < static_cast<int>(sample.sessions.size()); ++sess) {
    while (oi < limit && oi < sample.obs.size() && sample.obs[oi].session < sess) ++oi;
    if (oi >= limit || oi >= sample.obs.size()) break;
    if (sample.obs[oi].session != sess) continue;
    // last step we need in this session
    std::size_t last_obs = oi;
    while (last_obs + 1 < limit && last_obs + 1 < sample.obs.size() &&
           sample.obs[last_obs + 1].session == sess)
      ++last_obs;
    const SessionSkeleton& sk = sample.sessions[sess];
    std::vector<double> no_iota;  // sessions restart with iota = 0
    TickPosterior post = TickPosterior::initial(sk.initial, sample.n, no_iota, gzi, eta);
    for (std::size_t step = 0; step <= sample.obs[last_obs].step; ++step) {
      if (sk.dts[step] > 0) post.decay(sk.dts[step], params);
      while (oi <= last_obs && sample.obs[oi].step == step && sample.obs[oi].session == sess) {
        fn(oi, post);
        ++oi;
      }
      post.apply_jump(sk.states[step]);
    }
  }
}

}  // namespace detail

// In-sample log-likelihood of the up-jump observations.
inline double log_likelihood(const Sample& sample, const ModelParams& params) {
  params.validate();
  double ll = 0;
  detail::sweep_sample(sample, params, sample.n_in, [&](std::size_t i, const TickPosterior& post) {
    const Observation& o = sample.obs[i];
    double lp;
    if (sample.mode == Mode::Gzi) {
      double dens = jump_density_gzi(post, o.a_new, o.q_new, o.s);
      lp = dens > 0 ? std::log(dens) : kNegInf;
    } else {
      lp = jump_log_density_up_zi(post, o.a_new, o.q_new);
    }
    ll += lp;
  });
  return ll;
}

// Conditional expected jump magnitudes for the observations in [from, to).
inline std::vector<double> predicted_mean_jumps(const Sample& sample, const ModelParams& params,
                                                std::size_t from, std::size_t to) {
  std::vector<double> means(to - from, 0.0);
  detail::sweep_sample(sample, params, to, [&](std::size_t i, const TickPosterior& post) {
    if (i < from) return;
    std::optional<long> s =
        sample.mode == Mode::Gzi ? std::optional<long>(sample.obs[i].s) : std::nullopt;
    means[i - from] = conditional_mean_jump(post, s);
  });
  return means;
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

struct FitOptions {
  OptBudget budget;
  ParamMap map = ParamMap::LogLevels;
  std::optional<double> fixed_eta;  // GZI: pin eta instead of estimating it
  bool compute_std_errors = true;
};

struct FitResult {
  ModelParams params;
  double log_lik = kNegInf;
  std::vector<double> std_errors;    // natural scale; NaN when unavailable
  std::vector<double> param_pvalues; // Wald
  bool converged = false;
  bool timed_out = false;
  int iterations = 0;
  double wall_time = 0;
  bool std_errors_available = false;
  bool boundary_flag = false;  // degenerate data pushed a level to a boundary

  bool all_significant(double level = 0.05) const {
    for (double p : param_pvalues)
      if (!(p < level)) return false;
    return !param_pvalues.empty();
  }
};

// Method-of-moments starting point for the basic model: the mean jump
// magnitude pins the per-tick occupancy, the mean inter-jump time the decay.
inline ModelParams initial_params(const Sample& sample, Variant variant, bool with_eta) {
  double mean_jump = 0, mean_dt = 0;
  std::size_t cnt = std::min(sample.n_in, sample.obs.size());
  for (std::size_t i = 0; i < cnt; ++i) {
    const Observation& o = sample.obs[i];
    mean_jump += o.a_new - o.a_prev;
    mean_dt += sample.sessions[o.session].dts[o.step];
  }
  if (cnt > 0) {
    mean_jump /= cnt;
    mean_dt /= cnt;
  }
  double occupancy = mean_jump > 1.0 ? 1.0 / mean_jump : 0.9;
  double phi = -std::log1p(-std::min(occupancy, 0.999));  // Poisson depth matching occupancy
  double rho0 = mean_dt > 0 ? 1.0 / mean_dt : 1.0;
  double kappa0 = std::max(phi * rho0, 1e-8);

  ModelParams p;
  p.variant = variant;
  p.kappa_levels.assign(level_count(variant), kappa0);
  p.rho_levels.assign(level_count(variant), rho0);
  if (has_tail(variant)) {
    p.alpha_kappa = -1.0;
    p.alpha_rho = -1.0;
  }
  if (with_eta) p.eta = 0.9;
  return p;
}

namespace detail {

inline Objective make_objective(const Sample& sample, Variant variant, bool with_eta,
                                ParamMap map, std::optional<double> fixed_eta) {
  return [&sample, variant, with_eta, map, fixed_eta](const Eigen::VectorXd& x) {
    std::vector<double> v(x.data(), x.data() + x.size());
    ModelParams p = from_unconstrained(variant, with_eta && !fixed_eta, v, map);
    if (fixed_eta) p.eta = *fixed_eta;
    try {
      return log_likelihood(sample, p);
    } catch (const std::exception&) {
      return kNegInf;
    }
  };
}

}  // namespace detail

// Negated Hessian of the log-likelihood in natural parameter space.
inline Eigen::MatrixXd observed_information(const Sample& sample, const ModelParams& params) {
  const bool with_eta = params.eta.has_value();
  std::vector<double> theta = to_natural(params);
  Objective f = [&](const Eigen::VectorXd& x) {
    std::vector<double> v(x.data(), x.data() + x.size());
    ModelParams p = from_natural(params.variant, with_eta, v);
    try {
      p.validate();
      return log_likelihood(sample, p);
    } catch (const std::exception&) {
      return kNegInf;
    }
  };
  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(theta.data(), theta.size());
  return -fd_hessian(f, x);
}

// Standard errors from the observed information; empty on a singular or
// indefinite matrix.
inline std::vector<double> std_errors_from_information(const Eigen::MatrixXd& info) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return {};
  Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  std::vector<double> se;
  for (int i = 0; i < info.rows(); ++i) {
    double v = cov(i, i);
    if (!(v > 0) || !std::isfinite(v)) return {};
    se.push_back(std::sqrt(v));
  }
  return se;
}

inline FitResult fit(const Sample& sample, Variant variant, Mode mode,
                     std::optional<ModelParams> init = std::nullopt,
                     const FitOptions& options = {}) {
  if (sample.obs.empty()) throw std::invalid_argument("fit: empty sample");
  const bool with_eta = mode == Mode::Gzi;
  ModelParams start = init ? *init : initial_params(sample, variant, with_eta && !options.fixed_eta);
  if (options.fixed_eta) start.eta = std::nullopt;

  Objective obj = detail::make_objective(sample, variant, with_eta, options.map, options.fixed_eta);
  std::vector<double> x0v = to_unconstrained(start, options.map);
  Eigen::VectorXd x0 = Eigen::Map<Eigen::VectorXd>(x0v.data(), x0v.size());
  OptResult opt = maximize(obj, x0, options.budget);

  FitResult res;
  std::vector<double> xv(opt.x.data(), opt.x.data() + opt.x.size());
  res.params = from_unconstrained(variant, with_eta && !options.fixed_eta, xv, options.map);
  if (options.fixed_eta) res.params.eta = *options.fixed_eta;
  res.log_lik = opt.value;
  res.converged = opt.converged;
  res.timed_out = opt.timed_out;
  res.iterations = opt.iterations;
  res.wall_time = opt.seconds;

  for (double lv : res.params.kappa_levels)
    if (lv < 1e-7 || lv > 1e7) res.boundary_flag = true;
  for (double lv : res.params.rho_levels)
    if (lv < 1e-7 || lv > 1e7) res.boundary_flag = true;

  if (options.compute_std_errors && std::isfinite(res.log_lik)) {
    Eigen::MatrixXd info = observed_information(sample, res.params);
    res.std_errors = std_errors_from_information(info);
    res.std_errors_available = !res.std_errors.empty();
    if (!res.std_errors_available)
      res.std_errors.assign(res.params.param_count(), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> nat = to_natural(res.params);
    for (std::size_t i = 0; i < nat.size(); ++i)
      res.param_pvalues.push_back(res.std_errors_available ? wald_pvalue(nat[i], res.std_errors[i])
                                                           : 1.0);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Model selection
// ---------------------------------------------------------------------------

// Likelihood-ratio p-value of the nested pair (the ladder treats successive
// variants as nested). Negative statistics are clipped to zero.
inline double lr_test(const FitResult& fit_small, const FitResult& fit_big, int df) {
  if (df < 1) throw std::invalid_argument("lr_test: df must be positive");
  double stat = 2.0 * (fit_big.log_lik - fit_small.log_lik);
  if (stat < 0) stat = 0;  // optimizer noise
  return chi_squared_sf(stat, df);
}

enum class StopReason { LrInsignificant, Timeout, AllTried, InsignificantParams };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::LrInsignificant: return "lr_insignificant";
    case StopReason::Timeout: return "timeout";
    case StopReason::AllTried: return "all_tried";
    case StopReason::InsignificantParams: return "insignificant_params";
  }
  return "?";
}

struct LadderEntry {
  Variant variant;
  FitResult fit;
  std::optional<double> lr_pvalue_vs_next;
};

struct SelectionOutcome {
  std::optional<Variant> chosen;
  std::vector<LadderEntry> ladder;
  StopReason stopped_reason = StopReason::AllTried;
  bool reduced_sample = false;  // timeout retry ran on 1,000 observations
};

inline Sample reduce_sample(const Sample& sample, std::size_t n_in) {
  Sample out = sample;
  out.n_in = std::min(sample.n_in, n_in);
  std::size_t keep = std::min(sample.obs.size(), out.n_in + sample.n_out);
  out.obs.resize(keep);
  out.n_out = keep - out.n_in;
  return out;
}

namespace detail {

inline SelectionOutcome run_ladder(const Sample& sample, Mode mode, const FitOptions& base,
                                   double level, double deadline_seconds) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto remaining = [&] {
    double used = std::chrono::duration<double>(clock::now() - t0).count();
    return deadline_seconds - used;
  };

  const Variant order[] = {Variant::S, Variant::T1, Variant::T2, Variant::T3};
  SelectionOutcome out;
  std::optional<ModelParams> prev_params;
  for (int vi = 0; vi < 4; ++vi) {
    if (remaining() <= 0) {
      out.stopped_reason = StopReason::Timeout;
      return out;
    }
    FitOptions opts = base;
    opts.budget.wall_seconds = std::min(base.budget.wall_seconds, remaining());
    std::optional<ModelParams> init;
    if (prev_params) {
      // warm start: widen the previous variant's levels, exponents at -1
      ModelParams p = initial_params(sample, order[vi], prev_params->eta.has_value());
      int m = level_count(order[vi]);
      int mp = level_count(prev_params->variant);
      for (int i = 0; i < m; ++i) {
        p.kappa_levels[i] = prev_params->kappa_levels[std::min(i, mp - 1)];
        p.rho_levels[i] = prev_params->rho_levels[std::min(i, mp - 1)];
      }
      if (has_tail(order[vi])) {
        p.alpha_kappa = has_tail(prev_params->variant) ? prev_params->alpha_kappa : -1.0;
        p.alpha_rho = has_tail(prev_params->variant) ? prev_params->alpha_rho : -1.0;
      }
      p.eta = prev_params->eta;
      init = p;
    }
    FitResult fr = fit(sample, order[vi], mode, init, opts);
    if (fr.timed_out) {
      out.ladder.push_back({order[vi], fr, std::nullopt});
      out.stopped_reason = StopReason::Timeout;
      return out;
    }
    out.ladder.push_back({order[vi], fr, std::nullopt});
    prev_params = fr.params;

    if (!fr.all_significant(level)) {
      // the new variant fails Wald significance: keep the previous one
      out.stopped_reason = StopReason::InsignificantParams;
      if (out.ladder.size() >= 2) out.chosen = out.ladder[out.ladder.size() - 2].variant;
      return out;
    }
    if (out.ladder.size() >= 2) {
      LadderEntry& prev = out.ladder[out.ladder.size() - 2];
      int df = fr.params.param_count() - prev.fit.params.param_count();
      double p = lr_test(prev.fit, fr, std::max(df, 1));
      prev.lr_pvalue_vs_next = p;
      if (!(p < level)) {
        out.stopped_reason = StopReason::LrInsignificant;
        out.chosen = prev.variant;
        return out;
      }
    }
  }
  out.stopped_reason = StopReason::AllTried;
  out.chosen = out.ladder.back().variant;
  return out;
}

}  // namespace detail

// Fits S, T1, T2, T3 in order and picks the last variant whose parameters are
// all Wald-significant and whose LR against the next variant is
// insignificant. A global timeout triggers one retry on a sample of 1,000.
inline SelectionOutcome select_model(const Sample& sample, Mode mode,
                                     const FitOptions& options = {}, double level = 0.05) {
  if (sample.obs.empty()) throw std::invalid_argument("select_model: empty sample");
  SelectionOutcome out =
      detail::run_ladder(sample, mode, options, level, options.budget.wall_seconds);
  if (out.stopped_reason == StopReason::Timeout && !out.chosen && sample.n_in > 1000) {
    Sample reduced = reduce_sample(sample, 1000);
    out = detail::run_ladder(reduced, mode, options, level, options.budget.wall_seconds);
    out.reduced_sample = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prediction power
// ---------------------------------------------------------------------------

struct PredictionReport {
  double p_m = 0;  // -inf when the naive predictor is exact
  double naive_mae = 0;
  double model_mae = 0;
  std::size_t n_out = 0;
  bool benchmark_full_sample = false;
};

// P_m = 1 - (model MAE) / (naive MAE) over the out-of-sample jumps; the naive
// benchmark is the in-sample mean magnitude (full-sample mean when
// benchmark_full_sample is set).
inline PredictionReport prediction_power(const Sample& sample, const ModelParams& params,
                                         bool benchmark_full_sample = false) {
  if (sample.n_out == 0) throw std::invalid_argument("prediction_power: no out-of-sample data");
  PredictionReport rep;
  rep.n_out = sample.n_out;
  rep.benchmark_full_sample = benchmark_full_sample;

  double bench = 0;
  std::size_t bench_n = benchmark_full_sample ? sample.n_in + sample.n_out : sample.n_in;
  for (std::size_t i = 0; i < bench_n && i < sample.obs.size(); ++i)
    bench += sample.obs[i].a_new - sample.obs[i].a_prev;
  bench /= bench_n;

  std::vector<double> means =
      predicted_mean_jumps(sample, params, sample.n_in, sample.n_in + sample.n_out);
  for (std::size_t i = 0; i < sample.n_out; ++i) {
    double actual = sample.obs[sample.n_in + i].a_new - sample.obs[sample.n_in + i].a_prev;
    rep.model_mae += std::abs(actual - means[i]);
    rep.naive_mae += std::abs(actual - bench);
  }
  rep.model_mae /= sample.n_out;
  rep.naive_mae /= sample.n_out;
  rep.p_m = rep.naive_mae > 0 ? 1.0 - rep.model_mae / rep.naive_mae : kNegInf;
  return rep;
}

// Drops observations whose conditional k-th jump moment exceeds L at the
// reference parameters (the moment-capping device for asymptotic normality).
inline Sample moment_cap_filter(const Sample& sample, const ModelParams& reference, double k,
                                double L, std::size_t* dropped = nullptr) {
  if (!(k > 2)) throw std::invalid_argument("moment_cap_filter: k must exceed 2");
  std::vector<char> keep(sample.obs.size(), 1);
  detail::sweep_sample(sample, reference, sample.obs.size(),
                       [&](std::size_t i, const TickPosterior& post) {
                         std::optional<long> s = sample.mode == Mode::Gzi
                                                     ? std::optional<long>(sample.obs[i].s)
                                                     : std::nullopt;
                         if (conditional_jump_moment(post, k, s) > L) keep[i] = 0;
                       });
  Sample out = sample;
  out.obs.clear();
  std::size_t in_kept = 0;
  for (std::size_t i = 0; i < sample.obs.size(); ++i) {
    if (!keep[i]) continue;
    out.obs.push_back(sample.obs[i]);
    if (i < sample.n_in) ++in_kept;
  }
  if (dropped) *dropped = sample.obs.size() - out.obs.size();
  out.n_in = in_kept;
  out.n_out = out.obs.size() - in_kept;
  return out;
}

}  // namespace lob

#endif  // LOB_ESTIMATOR_HPP
