#ifndef PPP_ESTIMATOR_HPP
#define PPP_ESTIMATOR_HPP

#include <cmath>
#include <span>
#include <vector>

namespace ppp {

// The estimator searches psi = asinh(xi) inside [-kPsiBracket, kPsiBracket].
inline constexpr double kPsiBracket = 4.5;
inline constexpr double kCoarseStep = 0.05;
inline constexpr double kPsiTolerance = 1e-8;

inline double to_psi(double xi) { return std::asinh(xi); }
inline double from_psi(double psi) { return std::sinh(psi); }

/// Plotting-position convention for the tail probability G_j of the j-th
/// largest of n values: (j - 0.5)/n when estimating, j/(n + 1) when
/// extrapolating.
enum class Plotting { estimation, prediction };

double plotting_position(int j, int n, Plotting plotting);

/// Sample sorted into descending order (x_1 largest ... x_N smallest). Ties
/// keep their input order. Only even N >= 4 is supported, and the
/// normalizing pair x_{N/2}, x_N must differ.
class OrderedSample {
 public:
  explicit OrderedSample(std::span<const double> values);

  int size() const noexcept { return static_cast<int>(values_.size()); }
  const std::vector<double>& values() const noexcept { return values_; }
  // 1-based, matching the order-statistic notation.
  double at(int i) const { return values_.at(static_cast<std::size_t>(i - 1)); }
  double half() const { return at(size() / 2); }
  double last() const { return at(size()); }
  double scale() const { return half() - last(); }

  // (x - x_{N/2}) / (x_{N/2} - x_N)
  double normalize(double x) const { return (x - half()) / scale(); }
  double denormalize(double u) const { return half() + u * scale(); }

 private:
  std::vector<double> values_;
};

/// u_i for i = 1 .. N/2 - 1.
struct NormalizedTail {
  std::vector<double> u;
};

NormalizedTail normalize(const OrderedSample& sample);

/// Model value u(xi, i) of the normalized i-th order statistic.
double model_curve(double xi, int i, int n, Plotting plotting);

struct TailEstimate {
  double xi_hat = 0.0;
  double psi_hat = 0.0;
  double rss = 0.0;
  // Minimizer sits on the search bracket boundary.
  bool at_bracket_edge = false;
};

/// Sum of squared log residuals as a function of psi, for a fixed normalized
/// tail of an n-sample.
class CurveFitObjective {
 public:
  CurveFitObjective(const NormalizedTail& tail, int n);
  double operator()(double psi) const;
  // -f'(psi) / (2 cosh psi): positive where the objective decreases in psi.
  double descent(double psi) const;

 private:
  std::vector<double> log_data_;   // log1p(u_i)
  std::vector<double> log_ratio_;  // ln(G_{N/2} / G_i)
  double log_ratio_last_;          // ln(G_{N/2} / G_N) < 0
};

/// Curve-fit estimate: coarse scan over the psi bracket, golden-section
/// refinement inside the best cell, then a bracketed root polish of the
/// analytic derivative so the estimate is reproducible to rounding level.
TailEstimate fit_xi(const OrderedSample& sample);
TailEstimate fit_xi(const NormalizedTail& tail, int n);

}  // namespace ppp

#endif  // PPP_ESTIMATOR_HPP
