#ifndef PPP_PREDICTOR_HPP
#define PPP_PREDICTOR_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ppp/cloud.hpp"
#include "ppp/estimator.hpp"

namespace ppp {

using CountVector = std::vector<std::uint64_t>;

inline std::vector<double> default_t_levels() { return {21.0, 50.0, 100.0, 200.0, 400.0}; }

/// Evenly spaced centers first, first + step, ..., last (computed by index,
/// not by accumulation).
std::vector<double> center_grid(double first, double last, double step);

/// Half-open index range of the slices [c - width/2, c + width/2) that
/// contain x, for ascending centers.
std::pair<std::size_t, std::size_t> slice_range(std::span<const double> centers, double width,
                                                double x);

/// Slices of a 1-D coordinate: [c - width/2, c + width/2) around each center.
struct SliceSpec {
  double width = 0.1;
  std::vector<double> centers = center_grid(-3.0, 3.0, 0.1);
  std::uint64_t min_points = 200;

  void validate() const;
  // Half-open index range of the slices containing x.
  std::pair<std::size_t, std::size_t> slices_containing(double x) const;
  double lower_edge() const { return centers.front() - width / 2; }
  double upper_edge() const { return centers.back() + width / 2; }
};

enum class QuantileMode { order_statistic, kernel };

std::string to_string(QuantileMode mode);
QuantileMode parse_quantile_mode(const std::string& name);

/// Value on the w scale exceeded by a fraction 1/T of the values. The
/// order-statistic rule takes fractional descending rank m/T + 1/2 and
/// interpolates linearly between the two neighbouring order statistics, so
/// exactly round(m/T) values lie above it. The kernel rule inverts a
/// Gaussian-smoothed survival function with Silverman's bandwidth.
/// Reorders `w`. Returns nullopt when the rank falls outside the data.
std::optional<double> upper_quantile_w(std::span<double> w, double T, QuantileMode mode);

// w_next values gathered per psi_hat slice.
class SliceCollector {
 public:
  explicit SliceCollector(SliceSpec spec);
  void add(std::span<const CloudPoint> points);
  const SliceSpec& spec() const noexcept { return spec_; }
  const std::vector<std::vector<double>>& values() const noexcept { return w_; }

 private:
  SliceSpec spec_;
  std::vector<std::vector<double>> w_;
};

struct SliceQuantiles {
  Eigen::MatrixXd u_pred;  // centers x T, NaN where absent
  CountVector counts;
};

SliceQuantiles slice_quantiles(const SliceCollector& slices, std::span<const double> t_levels,
                               QuantileMode mode = QuantileMode::order_statistic,
                               unsigned workers = 1);
SliceQuantiles slice_quantiles(std::span<const CloudPoint> cloud, const SliceSpec& spec,
                               std::span<const double> t_levels,
                               QuantileMode mode = QuantileMode::order_statistic,
                               unsigned workers = 1);

/// Normalized level-T extrapolation at tail parameter xi_p, with
/// prediction plotting positions G_j = j/(n + 1):
///   ((G_{n/2} T)^xi_p - 1) / (1 - (G_{n/2}/G_n)^xi_p)
double forward_level(double xi_p, double T, int n);

/// Throws ValidationError unless forward_level is strictly increasing in
/// xi_p over the inversion bracket for every level.
void verify_level_map(std::span<const double> t_levels, int n);

/// xi_p with forward_level(xi_p, T, n) == u_target. Bisection inside a
/// bracket that starts at [-5, 5] and doubles up to [-50, 50].
double invert_to_xi_p(double u_target, double T, int n);

/// How a table serves an estimate between slice centers.
///   slice:  the prediction of the slice containing psi_hat, i.e. xi_p fixed
///           at sinh(c) + d_xi(c) across the slice. Exceedance within each
///           slice is then calibrated by construction.
///   linear: d_xi interpolated linearly in psi_hat between centers and added
///           to the sample's own xi_hat.
enum class Interpolation { slice, linear };

std::string to_string(Interpolation mode);
Interpolation parse_interpolation(const std::string& name);

struct BuildInfo {
  std::string cloud_manifest_hash;
  std::uint64_t cloud_seed = 0;
  QuantileMode quantile_mode = QuantileMode::order_statistic;
  std::uint64_t min_points = 200;
};

/// The Bayes-like predictor as tail-parameter increments d_xi(center, T).
struct IncrementTable {
  int n = 20;
  std::vector<double> t_levels;
  double slice_width = 0.1;
  std::vector<double> centers;
  CountVector counts;
  Eigen::MatrixXd d_xi;    // centers x T, NaN where the slice is absent
  Eigen::MatrixXd u_pred;  // centers x T
  Interpolation interpolation = Interpolation::slice;
  BuildInfo build;

  bool present(Eigen::Index c, Eigen::Index t) const { return std::isfinite(d_xi(c, t)); }
  // Largest relative mismatch between u_pred and forward_level(sinh(c) + d_xi).
  double max_identity_error() const;
  void check_invariants() const;
};

IncrementTable build_table(const SliceCollector& slices, std::span<const double> t_levels, int n,
                           BuildInfo build = {}, unsigned workers = 1);
IncrementTable build_table(std::span<const CloudPoint> cloud, const SliceSpec& spec,
                           std::span<const double> t_levels, int n, BuildInfo build = {},
                           unsigned workers = 1);
IncrementTable build_table(const CloudReader& cloud, const SliceSpec& spec,
                           std::span<const double> t_levels,
                           QuantileMode mode = QuantileMode::order_statistic,
                           unsigned workers = 1);

/// Tail parameter xi_p used for an estimate psi_hat at level T. Between
/// tabulated levels d_xi is interpolated linearly in ln T; across psi_hat the
/// table's Interpolation applies. Throws OutOfRangeError when psi_hat is not
/// covered or falls on an absent slice.
double xi_p_at(const IncrementTable& table, double psi_hat, double T);
/// xi_p_at(...) - sinh(psi_hat).
double increment_at(const IncrementTable& table, double psi_hat, double T);
double predict_normalized(const IncrementTable& table, double psi_hat, double T);
double predict(const IncrementTable& table, const OrderedSample& sample, double T);

std::string to_json(const IncrementTable& table);
IncrementTable table_from_json(const std::string& text);
void save_table(const IncrementTable& table, const std::filesystem::path& file);
IncrementTable load_table(const std::filesystem::path& file);

}  // namespace ppp

#endif  // PPP_PREDICTOR_HPP
