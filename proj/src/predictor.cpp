#include "ppp/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ppp/error.hpp"
#include "ppp/gpd.hpp"
#include "ppp/kde.hpp"
#include "ppp/parallel.hpp"

namespace ppp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kBracketStart = 5.0;
constexpr double kBracketLimit = 50.0;

}  // namespace

std::vector<double> center_grid(double first, double last, double step) {
  if (!(step > 0.0) || last < first) throw ValidationError("center grid needs step > 0 and last >= first");
  const auto count = static_cast<std::size_t>(std::floor((last - first) / step + 1e-9)) + 1;
  std::vector<double> centers(count);
  for (std::size_t k = 0; k < count; ++k) centers[k] = first + static_cast<double>(k) * step;
  return centers;
}

void SliceSpec::validate() const {
  if (!(width > 0.0)) throw ValidationError("slice width must be positive");
  if (centers.empty()) throw ValidationError("slice spec needs at least one center");
  if (!std::is_sorted(centers.begin(), centers.end()))
    throw ValidationError("slice centers must be sorted ascending");
  if (min_points < 1) throw ValidationError("min_points must be at least 1");
}

std::pair<std::size_t, std::size_t> slice_range(std::span<const double> centers, double width,
                                                double x) {
  // c - w/2 <= x < c + w/2  <=>  x - w/2 < c <= x + w/2
  const auto first = std::upper_bound(centers.begin(), centers.end(), x - width / 2);
  const auto last = std::upper_bound(first, centers.end(), x + width / 2);
  return {static_cast<std::size_t>(first - centers.begin()),
          static_cast<std::size_t>(last - centers.begin())};
}

std::pair<std::size_t, std::size_t> SliceSpec::slices_containing(double x) const {
  return slice_range(centers, width, x);
}

std::string to_string(QuantileMode mode) {
  return mode == QuantileMode::kernel ? "kernel" : "order_statistic";
}

std::string to_string(Interpolation mode) { return mode == Interpolation::linear ? "linear" : "slice"; }

Interpolation parse_interpolation(const std::string& name) {
  if (name == "slice") return Interpolation::slice;
  if (name == "linear") return Interpolation::linear;
  throw ValidationError("unknown interpolation '" + name + "'");
}

QuantileMode parse_quantile_mode(const std::string& name) {
  if (name == "order_statistic") return QuantileMode::order_statistic;
  if (name == "kernel") return QuantileMode::kernel;
  throw ValidationError("unknown quantile mode '" + name + "'");
}

std::optional<double> upper_quantile_w(std::span<double> w, double T, QuantileMode mode) {
  if (!(T > 1.0)) throw ValidationError("recurrence level must exceed 1");
  const std::size_t m = w.size();
  if (m == 0) return std::nullopt;

  if (mode == QuantileMode::kernel) {
    std::sort(w.begin(), w.end());
    const double h = silverman_bandwidth(w);
    if (!(h > 0.0)) return w.back();  // point mass
    const double target = 1.0 / T;
    double lo = w.front() - 40.0 * h;
    double hi = w.back() + 40.0 * h;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (smoothed_survival(w, h, mid) > target)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }

  const double rank = static_cast<double>(m) / T + 0.5;  // 1-based, descending
  const auto k = static_cast<std::size_t>(std::floor(rank));
  const double frac = rank - static_cast<double>(k);
  if (k < 1 || k + 1 > m) return std::nullopt;
  // After this, w[k] is the (k+1)-th largest and w[0..k) hold the k largest.
  std::nth_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k), w.end(), std::greater<>());
  const double kth = *std::min_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k));
  const double next = w[k];
  return kth + frac * (next - kth);
}

SliceCollector::SliceCollector(SliceSpec spec) : spec_(std::move(spec)), w_(spec_.centers.size()) {
  spec_.validate();
}

void SliceCollector::add(std::span<const CloudPoint> points) {
  for (const auto& p : points) {
    const auto [first, last] = spec_.slices_containing(p.psi_hat);
    for (auto s = first; s < last; ++s) w_[s].push_back(p.w_next);
  }
}

SliceQuantiles slice_quantiles(const SliceCollector& slices, std::span<const double> t_levels,
                               QuantileMode mode, unsigned workers) {
  const auto& values = slices.values();
  const auto rows = static_cast<Eigen::Index>(values.size());
  const auto cols = static_cast<Eigen::Index>(t_levels.size());
  SliceQuantiles out{Eigen::MatrixXd::Constant(rows, cols, kNaN), CountVector(values.size())};
  parallel_blocks(values.size(), workers, [&](unsigned, std::uint64_t lo, std::uint64_t hi) {
    for (auto s = lo; s < hi; ++s) {
      out.counts[s] = values[s].size();
      if (values[s].size() < slices.spec().min_points) continue;
      std::vector<double> scratch;
      for (Eigen::Index t = 0; t < cols; ++t) {
        scratch.assign(values[s].begin(), values[s].end());
        if (const auto w = upper_quantile_w(scratch, t_levels[static_cast<std::size_t>(t)], mode))
          out.u_pred(static_cast<Eigen::Index>(s), t) = std::sinh(*w);
      }
    }
  });
  return out;
}

SliceQuantiles slice_quantiles(std::span<const CloudPoint> cloud, const SliceSpec& spec,
                               std::span<const double> t_levels, QuantileMode mode,
                               unsigned workers) {
  SliceCollector slices(spec);
  slices.add(cloud);
  return slice_quantiles(slices, t_levels, mode, workers);
}

double forward_level(double xi_p, double T, int n) {
  const double g_half = plotting_position(n / 2, n, Plotting::prediction);
  const double g_last = plotting_position(n, n, Plotting::prediction);
  return expm1_ratio(xi_p, std::log(g_half * T), std::log(g_half / g_last));
}

void verify_level_map(std::span<const double> t_levels, int n) {
  const double g_half = plotting_position(n / 2, n, Plotting::prediction);
  for (double T : t_levels) {
    if (!(g_half * T > 1.0))
      throw ValidationError("recurrence level " + std::to_string(T) +
                            " does not extrapolate beyond x_{N/2}");
    double prev = forward_level(-kBracketLimit, T, n);
    for (int k = 1; k <= 10000; ++k) {
      const double xi = -kBracketLimit + 2.0 * kBracketLimit * k / 10000.0;
      const double cur = forward_level(xi, T, n);
      if (!(cur > prev))
        throw ValidationError("level map is not increasing at T = " + std::to_string(T));
      prev = cur;
    }
  }
}

double invert_to_xi_p(double u_target, double T, int n) {
  const double g_half = plotting_position(n / 2, n, Plotting::prediction);
  if (!(g_half * T > 1.0)) throw ValidationError("recurrence level too small to extrapolate");
  if (!std::isfinite(u_target)) throw NoSolutionError("level target is not finite");

  auto f = [&](double xi) { return forward_level(xi, T, n); };
  double lo = -kBracketStart;
  double hi = kBracketStart;
  while (f(lo) > u_target && lo > -kBracketLimit) lo = std::max(2.0 * lo, -kBracketLimit);
  while (f(hi) < u_target && hi < kBracketLimit) hi = std::min(2.0 * hi, kBracketLimit);
  if (f(lo) > u_target) throw NoSolutionError("level target below the range of the level map");
  if (f(hi) < u_target) throw NoSolutionError("level target above the range of the level map");

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < u_target)
      lo = mid;
    else
      hi = mid;
  }
  const double xi = std::abs(f(lo) - u_target) <= std::abs(f(hi) - u_target) ? lo : hi;
  if (!(std::abs(f(xi) - u_target) < 1e-10 * std::max(1.0, std::abs(u_target))))
    throw NoSolutionError("level map inversion did not converge");
  return xi;
}

double IncrementTable::max_identity_error() const {
  double worst = 0.0;
  for (Eigen::Index c = 0; c < d_xi.rows(); ++c)
    for (Eigen::Index t = 0; t < d_xi.cols(); ++t) {
      if (!present(c, t)) continue;
      const double xi_p = from_psi(centers[static_cast<std::size_t>(c)]) + d_xi(c, t);
      const double u = forward_level(xi_p, t_levels[static_cast<std::size_t>(t)], n);
      worst = std::max(worst, std::abs(u - u_pred(c, t)) / std::max(1.0, std::abs(u_pred(c, t))));
    }
  return worst;
}

void IncrementTable::check_invariants() const {
  if (n < 4 || n % 2 != 0) throw ValidationError("table sample size must be even and >= 4");
  if (t_levels.empty() || !std::is_sorted(t_levels.begin(), t_levels.end()) ||
      std::adjacent_find(t_levels.begin(), t_levels.end()) != t_levels.end())
    throw ValidationError("table levels must be strictly increasing");
  if (centers.empty() || !std::is_sorted(centers.begin(), centers.end()))
    throw ValidationError("table centers must be sorted ascending");
  if (!(slice_width > 0.0)) throw ValidationError("table slice width must be positive");
  const auto rows = static_cast<Eigen::Index>(centers.size());
  const auto cols = static_cast<Eigen::Index>(t_levels.size());
  if (counts.size() != centers.size() || d_xi.rows() != rows || d_xi.cols() != cols ||
      u_pred.rows() != rows || u_pred.cols() != cols)
    throw ValidationError("table dimensions are inconsistent");
  for (Eigen::Index c = 0; c < rows; ++c) {
    double prev = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < cols; ++t) {
      if (std::isfinite(d_xi(c, t)) != std::isfinite(u_pred(c, t)))
        throw ValidationError("table cell has only one of d_xi and u_pred");
      if (!present(c, t)) continue;
      if (!(u_pred(c, t) > prev))
        throw ValidationError("u_pred is not strictly increasing in T at center " +
                              std::to_string(centers[static_cast<std::size_t>(c)]));
      prev = u_pred(c, t);
    }
  }
  if (max_identity_error() > 1e-8) throw ValidationError("table cell violates the level-map identity");
}

IncrementTable build_table(const SliceCollector& slices, std::span<const double> t_levels, int n,
                           BuildInfo build, unsigned workers) {
  verify_level_map(t_levels, n);
  build.min_points = slices.spec().min_points;
  const SliceQuantiles q = slice_quantiles(slices, t_levels, build.quantile_mode, workers);

  IncrementTable table;
  table.n = n;
  table.t_levels.assign(t_levels.begin(), t_levels.end());
  table.slice_width = slices.spec().width;
  table.centers = slices.spec().centers;
  table.counts = q.counts;
  table.u_pred = q.u_pred;
  table.d_xi = Eigen::MatrixXd::Constant(q.u_pred.rows(), q.u_pred.cols(), kNaN);
  table.build = std::move(build);
  for (Eigen::Index c = 0; c < q.u_pred.rows(); ++c) {
    const double xi_hat = from_psi(table.centers[static_cast<std::size_t>(c)]);
    for (Eigen::Index t = 0; t < q.u_pred.cols(); ++t) {
      if (!std::isfinite(q.u_pred(c, t))) continue;
      const double xi_p = invert_to_xi_p(q.u_pred(c, t), table.t_levels[static_cast<std::size_t>(t)], n);
      table.d_xi(c, t) = xi_p - xi_hat;
    }
  }
  table.check_invariants();
  return table;
}

IncrementTable build_table(std::span<const CloudPoint> cloud, const SliceSpec& spec,
                           std::span<const double> t_levels, int n, BuildInfo build,
                           unsigned workers) {
  SliceCollector slices(spec);
  slices.add(cloud);
  return build_table(slices, t_levels, n, std::move(build), workers);
}

IncrementTable build_table(const CloudReader& cloud, const SliceSpec& spec,
                           std::span<const double> t_levels, QuantileMode mode, unsigned workers) {
  SliceCollector slices(spec);
  cloud.for_each_chunk([&](std::uint64_t, std::span<const CloudPoint> pts) { slices.add(pts); });
  BuildInfo info;
  info.cloud_manifest_hash = cloud.manifest().hash();
  info.cloud_seed = cloud.manifest().config.seed;
  info.quantile_mode = mode;
  return build_table(slices, t_levels, cloud.manifest().config.n, std::move(info), workers);
}

namespace {

[[noreturn]] void not_covered(const IncrementTable& table, double psi_hat) {
  throw OutOfRangeError("psi_hat " + std::to_string(psi_hat) + " outside the table range [" +
                            std::to_string(table.centers.front() - table.slice_width / 2) + ", " +
                            std::to_string(table.centers.back() + table.slice_width / 2) + "]",
                        psi_hat);
}

[[noreturn]] void absent_slice(double psi_hat) {
  throw OutOfRangeError("psi_hat " + std::to_string(psi_hat) + " falls on a slice without a prediction",
                        psi_hat);
}

// The slice whose prediction serves psi_hat: the one containing it (the
// nearest center if slices overlap). The top edge belongs to the last slice.
std::size_t serving_slice(const IncrementTable& table, double psi_hat) {
  const auto& c = table.centers;
  auto [first, last] = slice_range(c, table.slice_width, psi_hat);
  if (first == last) {
    if (psi_hat == c.back() + table.slice_width / 2) return c.size() - 1;
    not_covered(table, psi_hat);
  }
  std::size_t best = first;
  for (auto k = first + 1; k < last; ++k)
    if (std::abs(psi_hat - c[k]) < std::abs(psi_hat - c[best])) best = k;
  return best;
}

// d_xi at tabulated level t, linear in psi_hat. The end segments are
// continued linearly across the outer half of the end slices.
double linear_increment(const IncrementTable& table, double psi_hat, Eigen::Index t) {
  const auto& c = table.centers;
  const double lo_edge = c.front() - table.slice_width / 2;
  const double hi_edge = c.back() + table.slice_width / 2;
  if (!(psi_hat >= lo_edge && psi_hat <= hi_edge)) not_covered(table, psi_hat);
  if (c.size() == 1) {
    if (!table.present(0, t)) absent_slice(psi_hat);
    return table.d_xi(0, t);
  }
  auto upper = std::upper_bound(c.begin(), c.end(), psi_hat);
  std::size_t j = upper == c.begin() ? 0 : static_cast<std::size_t>(upper - c.begin()) - 1;
  j = std::min(j, c.size() - 2);
  const auto r = static_cast<Eigen::Index>(j);
  if (!table.present(r, t) || !table.present(r + 1, t)) absent_slice(psi_hat);
  const double s = (psi_hat - c[j]) / (c[j + 1] - c[j]);
  return table.d_xi(r, t) + s * (table.d_xi(r + 1, t) - table.d_xi(r, t));
}

// xi_p at tabulated level t.
double level_xi_p(const IncrementTable& table, double psi_hat, Eigen::Index t) {
  if (table.interpolation == Interpolation::linear)
    return from_psi(psi_hat) + linear_increment(table, psi_hat, t);
  const auto s = static_cast<Eigen::Index>(serving_slice(table, psi_hat));
  if (!table.present(s, t)) absent_slice(psi_hat);
  return from_psi(table.centers[static_cast<std::size_t>(s)]) + table.d_xi(s, t);
}

}  // namespace

double xi_p_at(const IncrementTable& table, double psi_hat, double T) {
  const auto& levels = table.t_levels;
  if (!(T >= levels.front() && T <= levels.back()))
    throw ValidationError("recurrence level " + std::to_string(T) + " outside the table's [" +
                          std::to_string(levels.front()) + ", " + std::to_string(levels.back()) + "]");
  if (!std::isfinite(psi_hat)) not_covered(table, psi_hat);
  const auto it = std::lower_bound(levels.begin(), levels.end(), T);
  const auto t = static_cast<Eigen::Index>(it - levels.begin());
  if (*it == T) return level_xi_p(table, psi_hat, t);
  // Interpolating xi_p and d_xi in ln T is the same thing: the xi_hat part
  // does not depend on T.
  const double lo = level_xi_p(table, psi_hat, t - 1);
  const double hi = level_xi_p(table, psi_hat, t);
  const double s = std::log(T / *(it - 1)) / std::log(*it / *(it - 1));
  return lo + s * (hi - lo);
}

double increment_at(const IncrementTable& table, double psi_hat, double T) {
  return xi_p_at(table, psi_hat, T) - from_psi(psi_hat);
}

double predict_normalized(const IncrementTable& table, double psi_hat, double T) {
  return forward_level(xi_p_at(table, psi_hat, T), T, table.n);
}

double predict(const IncrementTable& table, const OrderedSample& sample, double T) {
  if (sample.size() != table.n)
    throw ValidationError("sample has " + std::to_string(sample.size()) + " values, table expects " +
                          std::to_string(table.n));
  const TailEstimate est = fit_xi(sample);
  return sample.denormalize(predict_normalized(table, est.psi_hat, T));
}

}  // namespace ppp
