#ifndef LOB_MODEL_HPP
#define LOB_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lob {

// Price grid of n integer ticks. Tick n+1 stands for "empty sell book",
// tick 0 for "empty buy book".
struct TickGrid {
  int n = 2;
  double tick_size = 0.01;
  double price_offset = 0.0;  // currency value of tick 1

  void validate() const {
    if (n < 2) throw std::invalid_argument("TickGrid: n must be >= 2");
    if (!(tick_size > 0)) throw std::invalid_argument("TickGrid: tick_size must be positive");
  }

  int price_to_tick(double price) const {
    return static_cast<int>(std::lround((price - price_offset) / tick_size)) + 1;
  }
  double tick_to_price(int tick) const { return price_offset + (tick - 1) * tick_size; }
};

// Full two-sided book on the grid; index 1..n (slot 0 unused).
struct BookState {
  std::vector<long> ask_depth;  // sell orders per tick
  std::vector<long> bid_depth;  // buy orders per tick

  explicit BookState(int n = 0) : ask_depth(n + 1, 0), bid_depth(n + 1, 0) {}

  int n() const { return static_cast<int>(ask_depth.size()) - 1; }

  int ask() const {
    for (int p = 1; p <= n(); ++p)
      if (ask_depth[p] > 0) return p;
    return n() + 1;
  }
  int bid() const {
    for (int p = n(); p >= 1; --p)
      if (bid_depth[p] > 0) return p;
    return 0;
  }
  long total_orders() const {
    long t = 0;
    for (int p = 1; p <= n(); ++p) t += ask_depth[p] + bid_depth[p];
    return t;
  }
  bool uncrossed() const {
    int a = ask(), b = bid();
    return b < a;
  }
};

// Observable top-of-book state.
struct L1State {
  int a = 0;   // ask tick, 1..n+1
  int b = 0;   // bid tick, 0..n
  long q = 0;  // volume at ask (0 iff a == n+1)
  long r = 0;  // volume at bid (0 iff b == 0)

  friend bool operator==(const L1State&, const L1State&) = default;
};

inline L1State l1_of(const BookState& book) {
  L1State x;
  x.a = book.ask();
  x.b = book.bid();
  x.q = x.a <= book.n() ? book.ask_depth[x.a] : 0;
  x.r = x.b >= 1 ? book.bid_depth[x.b] : 0;
  return x;
}

enum class EventKind { BMO, SLO, CA, SMO, BLO, CB, SAL, SAR };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::BMO: return "BMO";
    case EventKind::SLO: return "SLO";
    case EventKind::CA: return "CA";
    case EventKind::SMO: return "SMO";
    case EventKind::BLO: return "BLO";
    case EventKind::CB: return "CB";
    case EventKind::SAL: return "SAL";
    case EventKind::SAR: return "SAR";
  }
  return "?";
}

struct Event {
  EventKind kind = EventKind::BMO;
  int price = 0;   // limit price / cancellation tick
  long volume = 1; // order volume (1 in the unit-volume model)
  int shift = 0;   // tick displacement for SAL/SAR
};

struct L1Record {
  double t = 0;    // seconds from session start
  double dt = 0;   // time since the previous L1 jump
  L1State state;
  std::optional<Event> event;
  long trade = 0;  // signed traded amount: z for SMO, -z for BMO, 0 otherwise
};

using L1History = std::vector<L1Record>;

// State-dependent event intensities; all rates are per second.
struct IntensitySpec {
  std::function<double(int, int)> theta;              // (a,b) -> buy MO rate
  std::function<double(int, int)> vartheta;           // (a,b) -> sell MO rate
  std::function<double(int, int, int)> kappa;         // (a,b,p) -> sell LO rate
  std::function<double(int, int, int)> lambda;        // (a,b,p) -> buy LO rate
  std::function<double(int, int, int)> rho;           // (a,b,p) -> per-order sell cancel rate
  std::function<double(int, int, int)> sigma;         // (a,b,p) -> per-order buy cancel rate
  std::vector<double> iota;                           // initial-book Poisson means, index 1..n

  double iota_at(int p) const {
    return (p >= 1 && p < static_cast<int>(iota.size())) ? iota[p] : 0.0;
  }

  // Exhaustive grid check. Returns warnings for violated ergodicity
  // preconditions; throws on a negative or non-finite rate.
  std::vector<std::string> validate(const TickGrid& grid) const {
    std::vector<std::string> warnings;
    bool rho_pos = true, sigma_pos = true, theta_pos = true, vartheta_pos = true;
    auto check = [](double v, const char* what) {
      if (!std::isfinite(v) || v < 0)
        throw std::invalid_argument(std::string("IntensitySpec: invalid rate in ") + what);
      return v;
    };
    for (int b = 0; b <= grid.n; ++b) {
      for (int a = b + 1; a <= grid.n + 1; ++a) {
        theta_pos &= check(theta(a, b), "theta") > 0;
        vartheta_pos &= check(vartheta(a, b), "vartheta") > 0;
        for (int p = 1; p <= grid.n; ++p) {
          check(kappa(a, b, p), "kappa");
          check(lambda(a, b, p), "lambda");
          rho_pos &= check(rho(a, b, p), "rho") > 0;
          sigma_pos &= check(sigma(a, b, p), "sigma") > 0;
        }
      }
    }
    for (double v : iota)
      if (!std::isfinite(v) || v < 0) throw std::invalid_argument("IntensitySpec: invalid iota");
    if (!rho_pos) warnings.push_back("rho vanishes somewhere; ergodicity precondition violated");
    if (!sigma_pos) warnings.push_back("sigma vanishes somewhere; ergodicity precondition violated");
    if (!theta_pos) warnings.push_back("theta vanishes somewhere; ergodicity precondition violated");
    if (!vartheta_pos) warnings.push_back("vartheta vanishes somewhere; ergodicity precondition violated");
    return warnings;
  }
};

// ---------------------------------------------------------------------------
// Parameter families for the in-book intensities.
// ---------------------------------------------------------------------------

enum class Variant { S, T1, T2, T3 };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::S: return "S";
    case Variant::T1: return "T1";
    case Variant::T2: return "T2";
    case Variant::T3: return "T3";
  }
  return "?";
}

inline std::optional<Variant> variant_from_string(const std::string& s) {
  if (s == "S") return Variant::S;
  if (s == "T1") return Variant::T1;
  if (s == "T2") return Variant::T2;
  if (s == "T3") return Variant::T3;
  return std::nullopt;
}

inline int level_count(Variant v) {
  switch (v) {
    case Variant::S: return 1;
    case Variant::T1: return 1;
    case Variant::T2: return 2;
    case Variant::T3: return 3;
  }
  return 0;
}

inline bool has_tail(Variant v) { return v != Variant::S; }

struct ModelParams {
  Variant variant = Variant::S;
  std::vector<double> kappa_levels;  // kappa_0 .. kappa_{m-1}
  std::vector<double> rho_levels;    // rho_0 .. rho_{m-1}
  double alpha_kappa = 0;            // tail exponent (T variants only)
  double alpha_rho = 0;
  std::optional<double> eta;         // GZI survival probability in (0,1]

  int param_count() const {
    int m = level_count(variant);
    return 2 * m + (has_tail(variant) ? 2 : 0) + (eta ? 1 : 0);
  }

  void validate() const {
    int m = level_count(variant);
    if (static_cast<int>(kappa_levels.size()) != m || static_cast<int>(rho_levels.size()) != m)
      throw std::invalid_argument("ModelParams: wrong level arity for variant");
    for (double v : kappa_levels)
      if (!(v > 0)) throw std::invalid_argument("ModelParams: kappa levels must be positive");
    for (double v : rho_levels)
      if (!(v > 0)) throw std::invalid_argument("ModelParams: rho levels must be positive");
    if (eta && !(*eta > 0 && *eta <= 1))
      throw std::invalid_argument("ModelParams: eta must lie in (0,1]");
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    int m = level_count(variant);
    for (int i = 0; i < m; ++i) out.push_back("kappa_" + std::to_string(i));
    if (has_tail(variant)) out.push_back("alpha_kappa");
    for (int i = 0; i < m; ++i) out.push_back("rho_" + std::to_string(i));
    if (has_tail(variant)) out.push_back("alpha_rho");
    if (eta) out.push_back("eta");
    return out;
  }
};

// In-book intensities at distance i >= 1 from the ask: (kappa~(i), rho~(i)).
inline std::pair<double, double> distance_intensity(const ModelParams& params, int i) {
  if (i <= 0) throw std::domain_error("distance_intensity: distance must be >= 1");
  const int m = level_count(params.variant);
  auto eval = [&](const std::vector<double>& levels, double alpha) {
    if (i <= m) return levels[i - 1];
    return levels[m - 1] * std::pow(static_cast<double>(i - m), alpha);
  };
  if (params.variant == Variant::S)
    return {params.kappa_levels[0], params.rho_levels[0]};
  return {eval(params.kappa_levels, params.alpha_kappa),
          eval(params.rho_levels, params.alpha_rho)};
}

// ---------------------------------------------------------------------------
// Unconstrained reparameterization used by the optimizer: levels in log space
// (or softplus, for the alternate map), exponents free, eta via logit.
// ---------------------------------------------------------------------------

enum class ParamMap { LogLevels, SoftplusLevels };

namespace detail {
inline double softplus(double x) { return x > 30 ? x : std::log1p(std::exp(x)); }
inline double softplus_inv(double y) { return y > 30 ? y : std::log(std::expm1(y)); }
inline double logit(double p) { return std::log(p / (1 - p)); }
inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace detail

inline std::vector<double> to_unconstrained(const ModelParams& p, ParamMap map = ParamMap::LogLevels) {
  auto enc = [&](double v) {
    return map == ParamMap::LogLevels ? std::log(v) : detail::softplus_inv(v);
  };
  std::vector<double> x;
  for (double v : p.kappa_levels) x.push_back(enc(v));
  if (has_tail(p.variant)) x.push_back(p.alpha_kappa);
  for (double v : p.rho_levels) x.push_back(enc(v));
  if (has_tail(p.variant)) x.push_back(p.alpha_rho);
  if (p.eta) x.push_back(detail::logit(std::min(*p.eta, 1.0 - 1e-12)));
  return x;
}

inline ModelParams from_unconstrained(Variant variant, bool with_eta,
                                      std::span<const double> x,
                                      ParamMap map = ParamMap::LogLevels) {
  auto dec = [&](double v) {
    return map == ParamMap::LogLevels ? std::exp(v) : detail::softplus(v);
  };
  const int m = level_count(variant);
  ModelParams p;
  p.variant = variant;
  std::size_t i = 0;
  for (int k = 0; k < m; ++k) p.kappa_levels.push_back(dec(x[i++]));
  if (has_tail(variant)) p.alpha_kappa = x[i++];
  for (int k = 0; k < m; ++k) p.rho_levels.push_back(dec(x[i++]));
  if (has_tail(variant)) p.alpha_rho = x[i++];
  if (with_eta) p.eta = detail::expit(x[i++]);
  if (i != x.size()) throw std::invalid_argument("from_unconstrained: size mismatch");
  return p;
}

// Natural-space parameter vector (the order of ModelParams::names()).
inline std::vector<double> to_natural(const ModelParams& p) {
  std::vector<double> x;
  for (double v : p.kappa_levels) x.push_back(v);
  if (has_tail(p.variant)) x.push_back(p.alpha_kappa);
  for (double v : p.rho_levels) x.push_back(v);
  if (has_tail(p.variant)) x.push_back(p.alpha_rho);
  if (p.eta) x.push_back(*p.eta);
  return x;
}

inline ModelParams from_natural(Variant variant, bool with_eta, std::span<const double> x) {
  const int m = level_count(variant);
  ModelParams p;
  p.variant = variant;
  std::size_t i = 0;
  for (int k = 0; k < m; ++k) p.kappa_levels.push_back(x[i++]);
  if (has_tail(variant)) p.alpha_kappa = x[i++];
  for (int k = 0; k < m; ++k) p.rho_levels.push_back(x[i++]);
  if (has_tail(variant)) p.alpha_rho = x[i++];
  if (with_eta) p.eta = x[i++];
  return p;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

// Bounded Smith model: constant intensities on the grid.
inline IntensitySpec smith_preset(double theta, double kappa, double rho,
                                  const TickGrid& grid) {
  IntensitySpec s;
  s.theta = [theta](int, int) { return theta; };
  s.vartheta = [theta](int, int) { return theta; };
  s.kappa = [kappa](int, int, int) { return kappa; };
  s.lambda = [kappa](int, int, int) { return kappa; };
  s.rho = [rho](int, int, int) { return rho; };
  s.sigma = [rho](int, int, int) { return rho; };
  s.iota.assign(grid.n + 1, 0.0);
  return s;
}

// Cont-style model: limit/cancel rates depend on the distance to the
// opposite quote.
inline IntensitySpec cont_preset(double theta, std::function<double(int)> kappa_c,
                                 std::function<double(int)> rho_c, const TickGrid& grid) {
  IntensitySpec s;
  s.theta = [theta](int, int) { return theta; };
  s.vartheta = [theta](int, int) { return theta; };
  s.kappa = [kappa_c](int, int b, int p) { return kappa_c(p - b); };
  s.rho = [rho_c](int, int b, int p) { return rho_c(p - b); };
  s.lambda = [kappa_c](int a, int, int p) { return kappa_c(a - p); };
  s.sigma = [rho_c](int a, int, int p) { return rho_c(a - p); };
  s.iota.assign(grid.n + 1, 0.0);
  return s;
}

// Discretised Luckock model: K and L are cdfs on the tick range, no
// cancellations.
inline IntensitySpec luckock_preset(std::function<double(int)> K, std::function<double(int)> L,
                                    const TickGrid& grid) {
  for (int p = 1; p <= grid.n; ++p) {
    if (K(p) < K(p - 1) || L(p) < L(p - 1))
      throw std::invalid_argument("luckock_preset: K and L must be nondecreasing");
  }
  IntensitySpec s;
  s.theta = [K](int, int b) { return K(b); };
  s.vartheta = [L](int a, int) { return 1.0 - L(a - 1); };
  s.kappa = [K](int, int, int p) { return K(p) - K(p - 1); };
  s.lambda = [L](int, int, int p) { return L(p) - L(p - 1); };
  s.rho = [](int, int, int) { return 0.0; };
  s.sigma = [](int, int, int) { return 0.0; };
  s.iota.assign(grid.n + 1, 0.0);
  return s;
}

// Stigler model: Luckock with uniform K and L on the grid.
inline IntensitySpec stigler_preset(const TickGrid& grid) {
  const double n = grid.n;
  auto unif = [n](int p) { return std::clamp(p / n, 0.0, 1.0); };
  return luckock_preset(unif, unif, grid);
}

}  // namespace lob

#endif  // LOB_MODEL_HPP
