// Deliberately naive reference implementations used as test oracles. They
// share no code with the library beyond the standard library.
#ifndef PPP_TESTS_ORACLES_HPP
#define PPP_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double g_est(int j, int n) { return (j - 0.5) / n; }
inline double g_pred(int j, int n) { return static_cast<double>(j) / (n + 1); }

// ((G_h/G_i)^xi - 1) / (1 - (G_h/G_n)^xi), with the xi -> 0 limit
// ln(G_h/G_i) / ln(G_n/G_h) used once pow() can no longer resolve xi.
inline double ratio_curve(double xi, double ratio_i, double ratio_n) {
  if (std::abs(xi) < 1e-12) return std::log(ratio_i) / -std::log(ratio_n);
  return (std::pow(ratio_i, xi) - 1.0) / (1.0 - std::pow(ratio_n, xi));
}

inline double model(double xi, int i, int n, bool estimation) {
  auto g = estimation ? g_est : g_pred;
  const int h = n / 2;
  return ratio_curve(xi, g(h, n) / g(i, n), g(h, n) / g(n, n));
}

inline double forward(double xi_p, double T, int n) {
  const int h = n / 2;
  return ratio_curve(xi_p, g_pred(h, n) * T, g_pred(h, n) / g_pred(n, n));
}

// Normalized u_1..u_{h-1} of an unsorted sample.
inline std::vector<double> normalized(std::vector<double> x) {
  std::sort(x.begin(), x.end(), std::greater<double>());
  const std::size_t n = x.size();
  const double xh = x[n / 2 - 1];
  const double xn = x[n - 1];
  std::vector<double> u;
  for (std::size_t i = 0; i + 1 < n / 2; ++i) u.push_back((x[i] - xh) / (xh - xn));
  return u;
}

inline double objective(const std::vector<double>& u, int n, double psi) {
  const double xi = std::sinh(psi);
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double r = std::log(1.0 + u[k]) - std::log(1.0 + model(xi, static_cast<int>(k) + 1, n, true));
    s += r * r;
  }
  return s;
}

struct GridFit {
  double psi;
  double value;
};

// Exhaustive scan of [-4.5, 4.5] at `step`, then ternary refinement inside
// the neighbouring cells of the best node.
inline GridFit grid_fit(const std::vector<double>& u, int n, double step = 1e-4) {
  const long cells = std::lround(9.0 / step);
  double best_psi = -4.5;
  double best = objective(u, n, best_psi);
  for (long k = 1; k <= cells; ++k) {
    const double psi = -4.5 + static_cast<double>(k) * step;
    const double f = objective(u, n, psi);
    if (f < best) {
      best = f;
      best_psi = psi;
    }
  }
  double lo = std::max(-4.5, best_psi - step);
  double hi = std::min(4.5, best_psi + step);
  for (int it = 0; it < 100; ++it) {
    const double a = lo + (hi - lo) / 3;
    const double b = hi - (hi - lo) / 3;
    if (objective(u, n, a) < objective(u, n, b))
      hi = b;
    else
      lo = a;
  }
  const double psi = 0.5 * (lo + hi);
  const double f = objective(u, n, psi);
  return f < best ? GridFit{psi, f} : GridFit{best_psi, best};
}

// Value exceeded by exactly round(m/T) of the values: fractional descending
// rank m/T + 1/2, linear between neighbouring order statistics.
inline bool sort_quantile(std::vector<double> w, double T, double& out) {
  std::sort(w.begin(), w.end(), std::greater<double>());
  const double rank = static_cast<double>(w.size()) / T + 0.5;
  const auto k = static_cast<std::size_t>(rank);
  if (k < 1 || k + 1 > w.size()) return false;
  out = w[k - 1] + (rank - static_cast<double>(k)) * (w[k] - w[k - 1]);
  return true;
}

// Kolmogorov-Smirnov statistic of data against a continuous cdf.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double m = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / m, static_cast<double>(i + 1) / m - f});
  }
  return d;
}

// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t m) { return 1.6276 / std::sqrt(static_cast<double>(m)); }

}  // namespace oracle

#endif  // PPP_TESTS_ORACLES_HPP
