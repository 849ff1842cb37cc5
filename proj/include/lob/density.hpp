#ifndef LOB_DENSITY_HPP
#define LOB_DENSITY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lob/model.hpp"

namespace lob {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

namespace detail {

inline double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline double log_choose(long n, long k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace detail

// log P[Bi(nu, varpi) + Po(mu) = q], via the finite convolution sum in
// log space.
inline double bipo_log_pmf(long nu, double varpi, double mu, long q) {
  if (nu < 0 || q < 0 || mu < 0 || varpi < 0 || varpi > 1)
    throw std::domain_error("bipo_log_pmf: arguments out of range");
  double acc = kNegInf;
  const long jmax = std::min(nu, q);
  for (long j = 0; j <= jmax; ++j) {
    double log_bi;
    if (varpi == 0) {
      if (j != 0) continue;
      log_bi = 0;
    } else if (varpi == 1) {
      if (j != nu) continue;
      log_bi = 0;
    } else {
      log_bi = detail::log_choose(nu, j) + j * std::log(varpi) + (nu - j) * std::log1p(-varpi);
    }
    double log_po = (q - j) == 0 && mu == 0
                        ? 0.0
                        : (mu == 0 ? kNegInf : -mu + (q - j) * std::log(mu) - std::lgamma(q - j + 1.0));
    acc = detail::log_sum_exp(acc, log_bi + log_po);
  }
  return acc;
}

inline double bipo_pmf(long nu, double varpi, double mu, long q) {
  return std::exp(bipo_log_pmf(nu, varpi, mu, q));
}

// ---------------------------------------------------------------------------
// Tick posterior: the conditional law of the unseen depth at every tick above
// the ask, given the L1 history. Depth at tick p is Bi(nu, varpi) ∘
// Po(eps + iota); in GZI mode varpi already carries the survival factor eta.
// ---------------------------------------------------------------------------

struct TickLaw {
  long nu = 0;
  double varpi = 1.0;
  double eps = 0.0;
  double iota = 0.0;

  double mean() const { return nu * varpi + eps + iota; }
  // log P[depth = 0]
  double log_p_empty() const {
    double lp = -(eps + iota);
    if (nu > 0) lp += varpi >= 1.0 ? kNegInf : nu * std::log1p(-varpi);
    return lp;
  }
  double log_pmf(long q) const { return bipo_log_pmf(nu, varpi, eps + iota, q); }
};

class TickPosterior {
 public:
  TickPosterior() = default;

  // Session start: deterministic quotes, Poisson(iota_p) depth beyond them.
  static TickPosterior initial(const L1State& x0, int n, std::span<const double> iota_means,
                               bool gzi = false, double eta = 1.0) {
    TickPosterior post;
    post.n_ = n;
    post.gzi_ = gzi;
    post.eta_ = eta;
    post.state_ = x0;
    post.ticks_.assign(n + 2, TickLaw{});
    for (int p = x0.a + 1; p <= n; ++p) {
      post.ticks_[p].nu = 0;
      post.ticks_[p].varpi = 1.0;
      post.ticks_[p].eps = 0.0;
      post.ticks_[p].iota =
          p < static_cast<int>(iota_means.size()) ? iota_means[p] : 0.0;
    }
    return post;
  }

  int n() const { return n_; }
  const L1State& state() const { return state_; }
  bool gzi() const { return gzi_; }
  double eta() const { return eta_; }
  void set_eta(double eta) { eta_ = eta; }

  // Law of the depth at tick p just before the next event (valid after
  // decay()). For p < a it is a point mass at 0, for p = a at q.
  TickLaw law(int p) const {
    if (p < state_.a) return TickLaw{0, 1.0, 0.0, 0.0};
    if (p == state_.a) return TickLaw{state_.q, 1.0, 0.0, 0.0};
    return ticks_[p];
  }

  // Exponential decay of every hidden tick over an inter-event interval,
  // with distances measured to the ask prevailing on that interval.
  void decay(double dt, const ModelParams& params) {
    if (!(dt > 0)) throw std::domain_error("TickPosterior::decay: dt must be positive");
    for (int p = state_.a + 1; p <= n_; ++p) {
      auto [kap, rho] = distance_intensity(params, p - state_.a);
      TickLaw& tl = ticks_[p];
      double d = std::exp(-rho * dt);
      tl.eps = d * tl.eps + (rho > 0 ? (kap / rho) * (1.0 - d) : kap * dt);
      tl.varpi *= d;
      tl.iota *= d;
    }
  }

  // State transition at an event. Resets ticks the ask just moved below
  // (nu from the pre-jump quote volume, with eta thinning of a displaced
  // quote in GZI mode) and collapses ticks the ask moved to or above.
  void apply_jump(const L1State& new_state) {
    const int a_old = state_.a;
    const long q_old = state_.q;
    const int a_new = new_state.a;
    if (a_new < a_old) {
      // Ask moved down: ticks in (a_new, a_old] become hidden.
      for (int p = a_new + 1; p <= std::min(a_old, n_); ++p) {
        TickLaw& tl = ticks_[p];
        if (p == a_old) {
          tl.nu = q_old;
          tl.varpi = gzi_ ? eta_ : 1.0;
        } else {
          tl.nu = 0;
          tl.varpi = 1.0;
        }
        tl.eps = 0.0;
        tl.iota = 0.0;
      }
    }
    // Ticks at or below the new ask are observable; their stored laws are
    // ignored by law() and will be re-initialized on the next down-move.
    state_ = new_state;
  }

 private:
  int n_ = 0;
  bool gzi_ = false;
  double eta_ = 1.0;
  L1State state_;
  std::vector<TickLaw> ticks_;
};

// Convenience wrapper: decay over dt, then apply the jump.
inline TickPosterior advance_posterior(TickPosterior post, double dt, const L1State& new_state,
                                       const ModelParams& params) {
  post.decay(dt, params);
  post.apply_jump(new_state);
  return post;
}

// ---------------------------------------------------------------------------
// Event-time density (the law of the next event type and waiting time).
// ---------------------------------------------------------------------------

struct EventRateSummary {
  double gamma = 0;
  std::vector<std::pair<Event, double>> pi;  // event -> probability

  double prob(const Event& e) const {
    for (auto& [ev, p] : pi)
      if (ev.kind == e.kind && ev.price == e.price) return p;
    return 0;
  }
};

// Total rate of L1-changing events and their selection probabilities.
// volume_multiplier controls whether the quote cancellation rates are scaled
// by the quote volumes (q * rho, r * sigma).
inline EventRateSummary rate_summary(const L1State& x, const IntensitySpec& spec, int n,
                                     bool volume_multiplier = true) {
  EventRateSummary s;
  std::vector<std::pair<Event, double>> raw;
  raw.push_back({{EventKind::BMO}, spec.theta(x.a, x.b)});
  raw.push_back({{EventKind::SMO}, spec.vartheta(x.a, x.b)});
  if (x.a <= n)
    raw.push_back({{EventKind::CA, x.a},
                   (volume_multiplier ? x.q : 1) * spec.rho(x.a, x.b, x.a)});
  if (x.b >= 1)
    raw.push_back({{EventKind::CB, x.b},
                   (volume_multiplier ? x.r : 1) * spec.sigma(x.a, x.b, x.b)});
  for (int p = x.b + 1; p <= std::min(x.a, n); ++p)
    raw.push_back({{EventKind::SLO, p}, spec.kappa(x.a, x.b, p)});
  for (int p = std::max(x.b, 1); p <= std::min(x.a - 1, n); ++p)
    raw.push_back({{EventKind::BLO, p}, spec.lambda(x.a, x.b, p)});
  for (auto& [e, w] : raw) s.gamma += w;
  if (!(s.gamma > 0)) throw std::runtime_error("rate_summary: absorbed state (gamma = 0)");
  for (auto& [e, w] : raw)
    if (w > 0) s.pi.push_back({e, w / s.gamma});
  return s;
}

// Joint density of (waiting time, event type): gamma * exp(-gamma tau) * pi(e).
inline double event_time_density(double tau, const Event& e, const EventRateSummary& summary) {
  if (!(tau >= 0)) throw std::domain_error("event_time_density: tau must be nonnegative");
  return summary.gamma * std::exp(-summary.gamma * tau) * summary.prob(e);
}

// ---------------------------------------------------------------------------
// Conditional density of the post-event (ask, ask volume).
// ---------------------------------------------------------------------------

// Number of in-book orders a depleting event demands beyond the former quote.
inline long s_value(const Event& e, long q_prev) {
  switch (e.kind) {
    case EventKind::BMO:
      if (e.volume < q_prev) throw std::domain_error("s_value: market order does not deplete");
      return e.volume - q_prev;
    case EventKind::SAR: return -e.volume;
    case EventKind::CA: return 0;
    default: throw std::domain_error("s_value: event cannot move the ask up");
  }
}

// Log density of the ask landing at a_new with volume q_new after an
// ask-depleting event, in the unit-volume model: the intermediate ticks must
// be empty and the landing tick must hold exactly q_new orders.
inline double jump_log_density_up_zi(const TickPosterior& post, int a_new, long q_new) {
  const int a_prev = post.state().a;
  const int n = post.n();
  if (a_new <= a_prev || a_new > n + 1)
    throw std::domain_error("jump_log_density_up_zi: a_new must exceed the previous ask");
  double lp = 0;
  for (int p = a_prev + 1; p <= std::min(a_new - 1, n); ++p)
    lp += post.law(p).log_p_empty();
  if (a_new <= n) {
    if (q_new < 1) return kNegInf;  // the new ask must hold at least one order
    lp += post.law(a_new).log_pmf(q_new);
  } else {
    if (q_new != 0) return kNegInf;
  }
  return lp;
}

// Full four-case density g(a_new, q_new) given the pre-event context and the
// event type. Non-depleting cases are indicators.
inline double jump_density_zi(const TickPosterior& post, const Event& e, int a_new, long q_new) {
  const L1State& x = post.state();
  switch (e.kind) {
    case EventKind::SLO:
      if (e.price <= x.b || e.price > x.a)
        throw std::domain_error("jump_density_zi: SLO price outside the spread");
      if (e.price == x.a)  // insertion at the quote
        return (a_new == x.a && q_new == x.q + 1) ? 1.0 : 0.0;
      return (a_new == e.price && q_new == 1) ? 1.0 : 0.0;
    case EventKind::BMO:
    case EventKind::CA:
      if (x.a > post.n()) return (a_new == x.a && q_new == x.q) ? 1.0 : 0.0;  // no-op MO
      if (x.q > 1) return (a_new == x.a && q_new == x.q - 1) ? 1.0 : 0.0;
      return std::exp(jump_log_density_up_zi(post, a_new, q_new));
    default:
      return (a_new == x.a && q_new == x.q) ? 1.0 : 0.0;
  }
}

namespace detail {

// pmf of M = total hidden depth strictly between the old ask and tick a_new,
// truncated at s (entries 0..s); the mass beyond s is 1 - sum.
inline std::vector<double> between_pmf(const TickPosterior& post, int a_new, long s) {
  std::vector<double> pmf{1.0};
  if (s < 0) return {};
  pmf.resize(s + 1, 0.0);
  double po_mean = 0;
  for (int p = post.state().a + 1; p <= std::min(a_new - 1, post.n()); ++p) {
    TickLaw tl = post.law(p);
    po_mean += tl.eps + tl.iota;
    if (tl.nu == 0) continue;
    // convolve with Bi(nu, varpi), keeping entries 0..s
    std::vector<double> bi(std::min<long>(tl.nu, s) + 1);
    for (long j = 0; j < static_cast<long>(bi.size()); ++j)
      bi[j] = std::exp(log_choose(tl.nu, j) +
                       (tl.varpi >= 1.0 ? (j == tl.nu ? 0.0 : kNegInf)
                                        : (tl.varpi <= 0.0
                                               ? (j == 0 ? 0.0 : kNegInf)
                                               : j * std::log(tl.varpi) +
                                                     (tl.nu - j) * std::log1p(-tl.varpi))));
    std::vector<double> next(s + 1, 0.0);
    for (long i = 0; i <= s; ++i) {
      if (pmf[i] == 0) continue;
      for (long j = 0; j < static_cast<long>(bi.size()) && i + j <= s; ++j)
        next[i + j] += pmf[i] * bi[j];
    }
    pmf = std::move(next);
  }
  if (po_mean > 0) {
    std::vector<double> po(s + 1);
    for (long j = 0; j <= s; ++j)
      po[j] = std::exp(-po_mean + j * std::log(po_mean) - std::lgamma(j + 1.0));
    std::vector<double> next(s + 1, 0.0);
    for (long i = 0; i <= s; ++i) {
      if (pmf[i] == 0) continue;
      for (long j = 0; i + j <= s; ++j) next[i + j] += pmf[i] * po[j];
    }
    pmf = std::move(next);
  }
  return pmf;
}

}  // namespace detail

// Density of (a_new, q_new) after a depleting event demanding s extra orders
// in the generalized model. The posterior must be in GZI mode so that varpi
// carries the eta factor.
inline double jump_density_gzi(const TickPosterior& post, int a_new, long q_new, long s) {
  const int a_prev = post.state().a;
  const int n = post.n();
  if (a_new <= a_prev || a_new > n + 1)
    throw std::domain_error("jump_density_gzi: a_new must exceed the previous ask");
  std::vector<double> m_pmf = detail::between_pmf(post, a_new, s);
  if (m_pmf.empty()) return 0.0;  // s < 0: nothing can be eaten from the book
  if (a_new == n + 1) {
    if (q_new != 0) return 0.0;
    double total = 0;
    for (double v : m_pmf) total += v;
    return total;  // P[M <= s]
  }
  if (q_new < 1) return 0.0;
  TickLaw landing = post.law(a_new);
  double density = 0;
  for (long j = 0; j <= s; ++j) {
    if (m_pmf[j] == 0) continue;
    long depth = s + q_new - j;
    if (depth < 0) continue;
    density += m_pmf[j] * std::exp(landing.log_pmf(depth));
  }
  return density;
}

// Predicted law of the ask-jump magnitude m for a buy market order of
// volume z. Index i of the returned vector holds P[m = i]; the last entry
// (index n+1-a_prev) is the "book emptied" boundary mass.
inline std::vector<double> price_impact(const TickPosterior& post, long z) {
  const L1State& x = post.state();
  const int n = post.n();
  std::vector<double> law(n + 2 - x.a, 0.0);
  if (x.a > n || z < x.q) {  // empty book or non-depleting trade
    law[0] = 1.0;
    return law;
  }
  const long s = z - x.q;
  for (int a_new = x.a + 1; a_new <= n; ++a_new) {
    std::vector<double> m_pmf = detail::between_pmf(post, a_new, s);
    TickLaw landing = post.law(a_new);
    double p = 0;
    for (long j = 0; j <= s; ++j) {
      if (m_pmf[j] == 0) continue;
      // q_new >= 1  <=>  landing depth >= s - j + 1
      double tail = 1.0;
      for (long d = 0; d <= s - j; ++d) tail -= std::exp(landing.log_pmf(d));
      p += m_pmf[j] * std::max(tail, 0.0);
    }
    law[a_new - x.a] = p;
  }
  {
    std::vector<double> m_pmf = detail::between_pmf(post, n + 1, s);
    double total = 0;
    for (double v : m_pmf) total += v;
    law[n + 1 - x.a] = total;
  }
  return law;
}

// Expected ask-jump magnitude for a depletion event. ZI when s is absent,
// GZI (with the given s) otherwise.
inline double conditional_mean_jump(const TickPosterior& post, std::optional<long> s = std::nullopt) {
  const L1State& x = post.state();
  const int n = post.n();
  if (x.a > n) return 0.0;
  double mean = 0;
  if (!s) {
    double log_gap = 0;  // log P[all ticks in (a_prev, a_new) empty]
    for (int a_new = x.a + 1; a_new <= n; ++a_new) {
      double p_occ = 1.0 - std::exp(post.law(a_new).log_p_empty());
      mean += (a_new - x.a) * std::exp(log_gap) * p_occ;
      log_gap += post.law(a_new).log_p_empty();
    }
    mean += (n + 1 - x.a) * std::exp(log_gap);
  } else {
    std::vector<double> law = price_impact(post, *s + x.q);
    for (std::size_t m = 1; m < law.size(); ++m) mean += m * law[m];
  }
  return mean;
}

// k-th conditional moment of the jump magnitude (used by the moment cap).
inline double conditional_jump_moment(const TickPosterior& post, double k,
                                      std::optional<long> s = std::nullopt) {
  const L1State& x = post.state();
  const int n = post.n();
  if (x.a > n) return 0.0;
  double moment = 0;
  if (!s) {
    double log_gap = 0;
    for (int a_new = x.a + 1; a_new <= n; ++a_new) {
      double p_occ = 1.0 - std::exp(post.law(a_new).log_p_empty());
      moment += std::pow(a_new - x.a, k) * std::exp(log_gap) * p_occ;
      log_gap += post.law(a_new).log_p_empty();
    }
    moment += std::pow(n + 1 - x.a, k) * std::exp(log_gap);
  } else {
    std::vector<double> law = price_impact(post, *s + x.q);
    for (std::size_t m = 1; m < law.size(); ++m) moment += std::pow(m, k) * law[m];
  }
  return moment;
}

}  // namespace lob

#endif  // LOB_DENSITY_HPP
