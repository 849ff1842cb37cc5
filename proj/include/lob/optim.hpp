#ifndef LOB_OPTIM_HPP
#define LOB_OPTIM_HPP

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace lob {

struct OptBudget {
  int max_iterations = 300;
  double gradient_tolerance = 1e-5;
  double wall_seconds = 2500;  // global default time limit
};

struct OptResult {
  Eigen::VectorXd x;
  double value = -std::numeric_limits<double>::infinity();
  bool converged = false;
  bool timed_out = false;
  int iterations = 0;
  long evaluations = 0;
  double seconds = 0;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

// Adaptive central-difference gradient; step per coordinate
// h = max(1e-5, 1e-7 |x_i|).
inline Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x,
                                   long* evals = nullptr, double base_step = 1e-5,
                                   double rel_step = 1e-7) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (int i = 0; i < x.size(); ++i) {
    double h = std::max(base_step, rel_step * std::abs(x[i]));
    xp[i] = x[i] + h;
    double fp = f(xp);
    xp[i] = x[i] - h;
    double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2 * h);
    if (evals) *evals += 2;
  }
  return g;
}

// BFGS ascent with numerically estimated gradients and a backtracking
// Armijo line search. Maximizes f.
inline OptResult maximize(const Objective& f, const Eigen::VectorXd& x0,
                          const OptBudget& budget = {}) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

  OptResult res;
  res.x = x0;
  res.value = f(x0);
  res.evaluations = 1;
  if (budget.max_iterations <= 0 || budget.wall_seconds <= 0) {
    res.timed_out = true;
    res.seconds = elapsed();
    return res;
  }

  const int k = static_cast<int>(x0.size());
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(k, k);
  Eigen::VectorXd g = fd_gradient(f, res.x, &res.evaluations);

  for (int iter = 0; iter < budget.max_iterations; ++iter) {
    if (elapsed() > budget.wall_seconds) {
      res.timed_out = true;
      break;
    }
    if (g.norm() < budget.gradient_tolerance) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd dir = hinv * g;  // ascent direction
    double slope = g.dot(dir);
    if (!(slope > 0) || !dir.allFinite()) {
      hinv.setIdentity();
      dir = g;
      slope = g.squaredNorm();
      if (!(slope > 0)) break;
    }
    // Backtracking line search with Armijo condition.
    double step = 1.0;
    double fx = res.value;
    Eigen::VectorXd x_new;
    double f_new = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = res.x + step * dir;
      f_new = f(x_new);
      ++res.evaluations;
      if (std::isfinite(f_new) && f_new >= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++res.iterations;
    if (!accepted) {
      res.converged = g.norm() < 10 * budget.gradient_tolerance;
      break;
    }
    Eigen::VectorXd g_new = fd_gradient(f, x_new, &res.evaluations);
    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = g - g_new;  // gradient of -f increases along s
    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      Eigen::MatrixXd syt = s * y.transpose();
      Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(k, k);
      hinv = (eye - syt / sy) * hinv * (eye - syt.transpose() / sy) +
             s * s.transpose() / sy;
    }
    res.x = x_new;
    res.value = f_new;
    g = g_new;
  }
  res.seconds = elapsed();
  return res;
}

// Symmetric finite-difference Hessian (central second differences).
inline Eigen::MatrixXd fd_hessian(const Objective& f, const Eigen::VectorXd& x,
                                  double base_step = 1e-4) {
  const int k = static_cast<int>(x.size());
  Eigen::VectorXd h(k);
  for (int i = 0; i < k; ++i) h[i] = base_step * std::max(1.0, std::abs(x[i]));
  Eigen::MatrixXd hess(k, k);
  const double f0 = f(x);
  Eigen::VectorXd xp = x;
  for (int i = 0; i < k; ++i) {
    xp[i] = x[i] + h[i];
    double fp = f(xp);
    xp[i] = x[i] - h[i];
    double fm = f(xp);
    xp[i] = x[i];
    hess(i, i) = (fp - 2 * f0 + fm) / (h[i] * h[i]);
    for (int j = i + 1; j < k; ++j) {
      xp[i] = x[i] + h[i]; xp[j] = x[j] + h[j];
      double fpp = f(xp);
      xp[j] = x[j] - h[j];
      double fpm = f(xp);
      xp[i] = x[i] - h[i]; xp[j] = x[j] + h[j];
      double fmp = f(xp);
      xp[j] = x[j] - h[j];
      double fmm = f(xp);
      xp[i] = x[i]; xp[j] = x[j];
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4 * h[i] * h[j]);
    }
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace lob

#endif  // LOB_OPTIM_HPP
