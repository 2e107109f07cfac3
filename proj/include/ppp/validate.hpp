#ifndef PPP_VALIDATE_HPP
#define PPP_VALIDATE_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ppp/cloud.hpp"
#include "ppp/kde.hpp"
#include "ppp/predictor.hpp"

namespace ppp {

/// vertical: slices of the true psi. horizontal: slices of the estimate.
enum class Axis { vertical, horizontal };

std::string to_string(Axis axis);
Axis parse_axis(const std::string& name);

inline double slice_key(const CloudPoint& p, Axis axis) {
  return axis == Axis::vertical ? p.psi : p.psi_hat;
}

using CountMatrix = Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct ExceedanceReport {
  Axis axis = Axis::horizontal;
  std::vector<double> centers;
  std::vector<double> t_levels;
  Eigen::MatrixXd rates;  // counts / slice_sizes, NaN for empty slices
  CountMatrix counts;     // exceedances per (slice, T)
  CountVector slice_sizes;
  CountVector skipped;  // points in the slice the predictor could not serve
  std::uint64_t cloud_seed = 0;
  std::uint64_t table_seed = 0;
  bool in_sample = false;

  /// Binomial standard error of a rate under the nominal probability 1/T.
  double standard_error(Eigen::Index slice, Eigen::Index level) const;
  /// Rate and size pooled over the slices whose centers lie in [lo, hi].
  std::pair<double, std::uint64_t> pooled(Eigen::Index level, double lo, double hi) const;
  void check_invariants() const;
};

/// Writes the w-scale prediction for each of `levels` into `thresholds`;
/// returns false when the point cannot be served (e.g. estimate outside the
/// table). The first argument is the point's index in its cloud.
using ThresholdFn = std::function<bool(std::uint64_t, const CloudPoint&,
                                       std::span<const double> levels,
                                       std::span<double> thresholds)>;

/// Streaming exceedance counter, one accumulator per slice.
class ExceedanceAccumulator {
 public:
  ExceedanceAccumulator(SliceSpec spec, Axis axis, std::vector<double> t_levels);

  void add(std::uint64_t first_index, std::span<const CloudPoint> points, const ThresholdFn& fn,
           unsigned workers = 1);
  ExceedanceReport report() const;

 private:
  SliceSpec spec_;
  Axis axis_;
  std::vector<double> t_levels_;
  CountMatrix counts_;
  CountVector sizes_;
  CountVector skipped_;
};

/// Threshold of the Bayes-like predictor encoded by the table.
ThresholdFn table_threshold(const IncrementTable& table);

/// Threshold at the true level-T quantile for each point's known psi,
/// expressed through that point's own normalization. The point's draws are
/// regenerated from its substream of `config`.
ThresholdFn oracle_threshold(const CloudConfig& config);

struct ValidateOptions {
  unsigned workers = 1;
  // Permit validating on the cloud the table was built from.
  bool in_sample = false;
};

ExceedanceReport validate(const IncrementTable& table, const Cloud& cloud, const SliceSpec& spec,
                          std::span<const double> t_levels, Axis axis,
                          const ValidateOptions& options = {});
ExceedanceReport validate(const IncrementTable& table, const CloudReader& cloud,
                          const SliceSpec& spec, std::span<const double> t_levels, Axis axis,
                          const ValidateOptions& options = {});

inline ExceedanceReport validate_vertical(const IncrementTable& table, const Cloud& cloud,
                                          const SliceSpec& spec, std::span<const double> t_levels,
                                          const ValidateOptions& options = {}) {
  return validate(table, cloud, spec, t_levels, Axis::vertical, options);
}

inline ExceedanceReport validate_horizontal(const IncrementTable& table, const Cloud& cloud,
                                            const SliceSpec& spec,
                                            std::span<const double> t_levels,
                                            const ValidateOptions& options = {}) {
  return validate(table, cloud, spec, t_levels, Axis::horizontal, options);
}

/// Exceedance of an arbitrary threshold rule over an in-memory cloud.
ExceedanceReport measure_exceedance(const Cloud& cloud, const SliceSpec& spec,
                                    std::span<const double> t_levels, Axis axis,
                                    const ThresholdFn& fn, unsigned workers = 1);

void write_report_csv(const ExceedanceReport& report, const std::filesystem::path& file);
std::string report_summary_json(const ExceedanceReport& report);

// ---------------------------------------------------------------------------
// Estimator diagnostics.

struct DecileTable {
  std::vector<double> psi_grid;
  Eigen::MatrixXd psi_hat;  // grid x 9: the 10%, ..., 90% quantiles of psi_hat
  Eigen::MatrixXd xi_hat;   // same quantiles in xi coordinates
};

/// Deciles of psi_hat over `reps` fresh n-samples at each grid value.
DecileTable estimator_deciles(std::span<const double> psi_grid, std::uint64_t reps,
                              std::uint64_t seed, int n = 20, unsigned workers = 1);

struct SliceDensity {
  double center = 0.0;
  std::uint64_t count = 0;
  std::optional<DensityCurve> curve;  // absent for empty slices
};

/// Kernel densities of the other coordinate within each slice: psi_hat
/// given psi (vertical) or psi given psi_hat (horizontal).
std::vector<SliceDensity> slice_densities(std::span<const CloudPoint> cloud, const SliceSpec& spec,
                                          Axis axis, int grid_points = 1024);

}  // namespace ppp

#endif  // PPP_VALIDATE_HPP
