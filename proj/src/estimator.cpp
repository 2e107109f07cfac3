#include "ppp/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ppp/error.hpp"
#include "ppp/gpd.hpp"

namespace ppp {

double plotting_position(int j, int n, Plotting plotting) {
  if (plotting == Plotting::estimation) return (j - 0.5) / n;
  return static_cast<double>(j) / (n + 1);
}

OrderedSample::OrderedSample(std::span<const double> values) : values_(values.begin(), values.end()) {
  const auto n = values_.size();
  if (n < 4 || n % 2 != 0) throw ValidationError("sample size must be even and at least 4");
  if (!std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); }))
    throw ValidationError("sample values must be finite");
  std::stable_sort(values_.begin(), values_.end(), std::greater<>());
  if (!(half() > last()))
    throw DegenerateSampleError("degenerate sample: x_{N/2} equals x_N");
}

NormalizedTail normalize(const OrderedSample& sample) {
  const int h = sample.size() / 2;
  NormalizedTail tail;
  tail.u.reserve(static_cast<std::size_t>(h - 1));
  for (int i = 1; i < h; ++i) tail.u.push_back(sample.normalize(sample.at(i)));
  return tail;
}

double model_curve(double xi, int i, int n, Plotting plotting) {
  const double g_half = plotting_position(n / 2, n, plotting);
  const double a = std::log(g_half / plotting_position(i, n, plotting));
  const double b = std::log(g_half / plotting_position(n, n, plotting));
  return expm1_ratio(xi, a, b);
}

CurveFitObjective::CurveFitObjective(const NormalizedTail& tail, int n) {
  const int h = n / 2;
  if (static_cast<int>(tail.u.size()) != h - 1)
    throw ValidationError("normalized tail does not match the sample size");
  const double g_half = plotting_position(h, n, Plotting::estimation);
  log_ratio_last_ = std::log(g_half / plotting_position(n, n, Plotting::estimation));
  for (int i = 1; i < h; ++i) {
    log_data_.push_back(std::log1p(tail.u[static_cast<std::size_t>(i - 1)]));
    log_ratio_.push_back(std::log(g_half / plotting_position(i, n, Plotting::estimation)));
  }
}

double CurveFitObjective::operator()(double psi) const {
  const double xi = from_psi(psi);
  const double den = -gen_exp(xi, log_ratio_last_);
  double sum = 0.0;
  for (std::size_t k = 0; k < log_data_.size(); ++k) {
    const double r = log_data_[k] - std::log1p(gen_exp(xi, log_ratio_[k]) / den);
    sum += r * r;
  }
  return sum;
}

namespace {

// x / (e^x - 1), equal to 1 at x = 0.
double bernoulli_fn(double x) {
  if (x == 0.0) return 1.0;
  return x / std::expm1(x);
}

// d/dxi log(1 + u(xi)) for u = expm1_ratio(xi, a, b), a > 0 > b:
//   a + (phi(xi (a - b)) - phi(-xi b)) / xi,  phi = bernoulli_fn.
double log1p_model_slope(double xi, double a, double b) {
  const double d = a - b;
  const double c = -b;
  if (std::abs(xi) * std::max(d, c) < 1e-2) {
    const double x2 = xi * xi;
    return a - (d - c) / 2 + xi * (d * d - c * c) / 12 -
           x2 * xi * (d * d * d * d - c * c * c * c) / 720;
  }
  return a + (bernoulli_fn(xi * d) - bernoulli_fn(xi * c)) / xi;
}

}  // namespace

double CurveFitObjective::descent(double psi) const {
  const double xi = from_psi(psi);
  const double den = -gen_exp(xi, log_ratio_last_);
  double sum = 0.0;
  for (std::size_t k = 0; k < log_data_.size(); ++k) {
    const double r = log_data_[k] - std::log1p(gen_exp(xi, log_ratio_[k]) / den);
    sum += r * log1p_model_slope(xi, log_ratio_[k], log_ratio_last_);
  }
  return sum;
}

namespace {

struct Minimum {
  double x;
  double f;
};

template <typename F>
Minimum golden_section(const F& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

// Root of a decreasing function g bracketed by g(lo) > 0 > g(hi)
// (Illinois variant of regula falsi).
template <typename G>
double falling_root(const G& g, double lo, double hi, double g_lo, double g_hi) {
  int side = 0;
  for (int it = 0; it < 40 && hi - lo > 0.0; ++it) {
    const double x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
    if (!(x > lo && x < hi)) break;
    const double gx = g(x);
    if (gx == 0.0) return x;
    if (gx > 0.0) {
      lo = x;
      g_lo = gx;
      if (side == -1) g_hi /= 2;
      side = -1;
    } else {
      hi = x;
      g_hi = gx;
      if (side == 1) g_lo /= 2;
      side = 1;
    }
  }
  return std::abs(g_lo) <= std::abs(g_hi) ? lo : hi;
}

}  // namespace

TailEstimate fit_xi(const NormalizedTail& tail, int n) {
  constexpr double kPolishWidth = 1e-7;
  const CurveFitObjective objective(tail, n);

  const int cells = static_cast<int>(std::lround(2.0 * kPsiBracket / kCoarseStep));
  Minimum best{-kPsiBracket, objective(-kPsiBracket)};
  for (int k = 1; k <= cells; ++k) {
    const double psi = -kPsiBracket + k * kCoarseStep;
    const double f = objective(psi);
    if (f < best.f) best = {psi, f};
  }

  const double lo = std::max(-kPsiBracket, best.x - kCoarseStep);
  const double hi = std::min(kPsiBracket, best.x + kCoarseStep);
  Minimum refined = golden_section(objective, lo, hi, kPsiTolerance);

  const double plo = std::max(-kPsiBracket, refined.x - kPolishWidth);
  const double phi = std::min(kPsiBracket, refined.x + kPolishWidth);
  const double g_lo = objective.descent(plo);
  const double g_hi = objective.descent(phi);
  if (g_lo > 0.0 && g_hi < 0.0) {
    const auto g = [&](double psi) { return objective.descent(psi); };
    const double x = falling_root(g, plo, phi, g_lo, g_hi);
    refined = {x, objective(x)};
  }
  if (refined.f <= best.f) best = refined;

  TailEstimate est;
  est.psi_hat = best.x;
  est.xi_hat = from_psi(best.x);
  est.rss = best.f;
  est.at_bracket_edge = kPsiBracket - std::abs(best.x) < kPsiTolerance;
  return est;
}

TailEstimate fit_xi(const OrderedSample& sample) { return fit_xi(normalize(sample), sample.size()); }

}  // namespace ppp
