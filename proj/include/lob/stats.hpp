#ifndef LOB_STATS_HPP
#define LOB_STATS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace lob {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double chi_squared_sf(double statistic, int df) {
  if (df < 1) throw std::domain_error("chi_squared_sf: df must be positive");
  if (statistic <= 0) return 1.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

// Two-sided Wald p-value for estimate/se.
inline double wald_pvalue(double estimate, double std_error) {
  if (!(std_error > 0) || !std::isfinite(std_error)) return 1.0;
  return 2.0 * (1.0 - normal_cdf(std::abs(estimate / std_error)));
}

struct WilcoxonResult {
  double statistic = 0;   // signed-rank sum W+
  double p_value = 1;
  int n_used = 0;         // pairs after dropping zero differences
  bool exact = false;
  bool all_tied = false;
};

// Two-sided Wilcoxon signed-rank test for zero median difference of y - x.
// Zero differences are dropped; exact null distribution for n <= 25 without
// ties in |d|, normal approximation (with tie correction) otherwise.
inline WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<double> d;
  for (auto& [x, y] : pairs)
    if (y != x) d.push_back(y - x);
  WilcoxonResult res;
  res.n_used = static_cast<int>(d.size());
  if (d.empty()) {
    res.all_tied = true;
    return res;
  }
  const int n = res.n_used;
  // rank |d| with average ranks for ties
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int i, int j) { return std::abs(d[i]) < std::abs(d[j]); });
  std::vector<double> rank(n);
  bool has_ties = false;
  for (int i = 0; i < n;) {
    int j = i;
    while (j + 1 < n && std::abs(d[idx[j + 1]]) == std::abs(d[idx[i]])) ++j;
    double avg = (i + j) / 2.0 + 1.0;
    if (j > i) has_ties = true;
    for (int k = i; k <= j; ++k) rank[idx[k]] = avg;
    i = j + 1;
  }
  double w_plus = 0;
  for (int i = 0; i < n; ++i)
    if (d[i] > 0) w_plus += rank[i];
  res.statistic = w_plus;

  if (n <= 25 && !has_ties) {
    // Exact null law of W+ over the 2^n sign patterns, by convolution.
    const int max_w = n * (n + 1) / 2;
    std::vector<double> pmf(max_w + 1, 0.0);
    pmf[0] = 1.0;
    for (int r = 1; r <= n; ++r)
      for (int w = max_w; w >= 0; --w)
        pmf[w] = 0.5 * ((w >= r ? pmf[w - r] : 0.0) + pmf[w]);
    double lower = 0, upper = 0;
    int w = static_cast<int>(std::lround(w_plus));
    for (int v = 0; v <= w; ++v) lower += pmf[v];
    for (int v = w; v <= max_w; ++v) upper += pmf[v];
    res.p_value = std::min(1.0, 2.0 * std::min(lower, upper));
    res.exact = true;
  } else {
    double mean = n * (n + 1) / 4.0;
    double var = n * (n + 1) * (2 * n + 1) / 24.0;
    // tie correction
    for (int i = 0; i < n;) {
      int j = i;
      while (j + 1 < n && rank[idx[j + 1]] == rank[idx[i]]) ++j;
      double t = j - i + 1;
      var -= t * (t * t - 1) / 48.0;
      i = j + 1;
    }
    if (var <= 0) {
      res.all_tied = true;
      return res;
    }
    double z = (w_plus - mean) / std::sqrt(var);
    res.p_value = std::min(1.0, 2.0 * (1.0 - normal_cdf(std::abs(z))));
  }
  return res;
}

// Two-sample Kolmogorov-Smirnov test (asymptotic p-value).
inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks test: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0;
  std::size_t i = 0, j = 0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  double ne = std::sqrt(na * nb / (na + nb));
  double lambda = (ne + 0.12 + 0.11 / ne) * d;
  double p = 0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
    p += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace lob

#endif  // LOB_STATS_HPP
