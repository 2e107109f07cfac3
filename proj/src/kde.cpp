#include "ppp/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "ppp/error.hpp"

namespace ppp {

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("quantile of an empty set");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double silverman_bandwidth(std::span<const double> values) {
  const auto m = values.size();
  if (m < 2) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(m);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = (sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25)) / 1.34;

  double spread = std::min(sd, iqr);
  if (!(spread > 0.0)) spread = std::max(sd, iqr);
  return 0.9 * spread * std::pow(static_cast<double>(m), -0.2);
}

double smoothed_survival(std::span<const double> sorted, double h, double q) {
  if (sorted.empty()) return 0.0;
  // Kernels more than 40 bandwidths away contribute exactly 0 or 1.
  const auto lo = std::lower_bound(sorted.begin(), sorted.end(), q - 40.0 * h);
  const auto hi = std::upper_bound(sorted.begin(), sorted.end(), q + 40.0 * h);
  double sum = static_cast<double>(sorted.end() - hi);
  for (auto it = lo; it != hi; ++it) sum += 0.5 * std::erfc((q - *it) / (h * std::numbers::sqrt2));
  return sum / static_cast<double>(sorted.size());
}

DensityCurve kernel_density(std::span<const double> values, int points) {
  if (values.empty()) throw ValidationError("density of an empty set");
  if (points < 2) throw ValidationError("density grid needs at least two nodes");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  DensityCurve curve;
  double h = silverman_bandwidth(sorted);
  if (!(h > 0.0)) h = 1e-3 * std::max(1.0, std::abs(sorted.front()));
  curve.bandwidth = h;

  const double x0 = sorted.front() - 5.0 * h;
  const double x1 = sorted.back() + 5.0 * h;
  const double step = (x1 - x0) / (points - 1);
  const double norm = 1.0 / (static_cast<double>(sorted.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  curve.x.resize(static_cast<std::size_t>(points));
  curve.density.resize(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double x = x0 + k * step;
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), x - 8.0 * h);
    const auto hi = std::upper_bound(sorted.begin(), sorted.end(), x + 8.0 * h);
    double sum = 0.0;
    for (auto it = lo; it != hi; ++it) {
      const double z = (x - *it) / h;
      sum += std::exp(-0.5 * z * z);
    }
    curve.x[static_cast<std::size_t>(k)] = x;
    curve.density[static_cast<std::size_t>(k)] = sum * norm;
  }
  return curve;
}

double integrate(const DensityCurve& curve) {
  double total = 0.0;
  for (std::size_t k = 1; k < curve.x.size(); ++k)
    total += 0.5 * (curve.density[k] + curve.density[k - 1]) * (curve.x[k] - curve.x[k - 1]);
  return total;
}

}  // namespace ppp
