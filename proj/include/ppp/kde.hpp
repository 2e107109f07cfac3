#ifndef PPP_KDE_HPP
#define PPP_KDE_HPP

#include <span>
#include <vector>

namespace ppp {

/// Silverman's rule of thumb, 0.9 min(sd, IQR/1.34) m^(-1/5). Falls back to
/// whichever spread is nonzero; returns 0 for a point mass.
double silverman_bandwidth(std::span<const double> values);

/// Linear-interpolation empirical quantile (R type 7) of sorted data.
double sorted_quantile(std::span<const double> sorted, double p);

/// Fraction of Gaussian kernels (bandwidth h) lying above q.
double smoothed_survival(std::span<const double> sorted, double h, double q);

struct DensityCurve {
  std::vector<double> x;
  std::vector<double> density;
  double bandwidth = 0.0;
};

/// Gaussian KDE evaluated on `points` equally spaced nodes spanning the data
/// plus five bandwidths either side.
DensityCurve kernel_density(std::span<const double> values, int points = 1024);

// Trapezoid rule on the curve's own grid.
double integrate(const DensityCurve& curve);

}  // namespace ppp

#endif  // PPP_KDE_HPP
