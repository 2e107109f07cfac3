#include "ppp/validate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ppp/error.hpp"
#include "ppp/estimator.hpp"
#include "ppp/format.hpp"
#include "ppp/parallel.hpp"

namespace ppp {

std::string to_string(Axis axis) { return axis == Axis::vertical ? "vertical" : "horizontal"; }

Axis parse_axis(const std::string& name) {
  if (name == "vertical") return Axis::vertical;
  if (name == "horizontal") return Axis::horizontal;
  throw ValidationError("unknown axis '" + name + "'");
}

double ExceedanceReport::standard_error(Eigen::Index slice, Eigen::Index level) const {
  const auto m = slice_sizes[static_cast<std::size_t>(slice)];
  if (m == 0) return std::numeric_limits<double>::quiet_NaN();
  const double p = 1.0 / t_levels[static_cast<std::size_t>(level)];
  return std::sqrt(p * (1.0 - p) / static_cast<double>(m));
}

std::pair<double, std::uint64_t> ExceedanceReport::pooled(Eigen::Index level, double lo,
                                                         double hi) const {
  std::uint64_t hits = 0;
  std::uint64_t size = 0;
  for (std::size_t s = 0; s < centers.size(); ++s) {
    if (centers[s] < lo - 1e-9 || centers[s] > hi + 1e-9) continue;
    hits += counts(static_cast<Eigen::Index>(s), level);
    size += slice_sizes[s];
  }
  const double rate = size ? static_cast<double>(hits) / static_cast<double>(size)
                           : std::numeric_limits<double>::quiet_NaN();
  return {rate, size};
}

void ExceedanceReport::check_invariants() const {
  for (Eigen::Index s = 0; s < rates.rows(); ++s)
    for (Eigen::Index t = 0; t < rates.cols(); ++t) {
      const auto m = slice_sizes[static_cast<std::size_t>(s)];
      if (m == 0) {
        if (!std::isnan(rates(s, t))) throw ValidationError("empty slice carries a rate");
        continue;
      }
      if (counts(s, t) > m) throw ValidationError("more exceedances than points in a slice");
      if (rates(s, t) != static_cast<double>(counts(s, t)) / static_cast<double>(m))
        throw ValidationError("rate differs from count / size");
    }
}

ExceedanceAccumulator::ExceedanceAccumulator(SliceSpec spec, Axis axis, std::vector<double> t_levels)
    : spec_(std::move(spec)),
      axis_(axis),
      t_levels_(std::move(t_levels)),
      counts_(CountMatrix::Zero(static_cast<Eigen::Index>(spec_.centers.size()),
                                static_cast<Eigen::Index>(t_levels_.size()))),
      sizes_(spec_.centers.size()),
      skipped_(spec_.centers.size()) {
  spec_.validate();
  if (t_levels_.empty()) throw ValidationError("at least one recurrence level is required");
}

void ExceedanceAccumulator::add(std::uint64_t first_index, std::span<const CloudPoint> points,
                                const ThresholdFn& fn, unsigned workers) {
  workers = std::max(1u, workers);
  std::vector<CountMatrix> counts(workers, CountMatrix::Zero(counts_.rows(), counts_.cols()));
  std::vector<CountVector> sizes(workers, CountVector(sizes_.size()));
  std::vector<CountVector> skipped(workers, CountVector(sizes_.size()));

  parallel_blocks(points.size(), workers, [&](unsigned w, std::uint64_t lo, std::uint64_t hi) {
    std::vector<double> thresholds(t_levels_.size());
    for (auto i = lo; i < hi; ++i) {
      const CloudPoint& p = points[i];
      const auto [first, last] = spec_.slices_containing(slice_key(p, axis_));
      if (first == last) continue;
      const bool served = fn(first_index + i, p, t_levels_, thresholds);
      for (auto s = first; s < last; ++s) {
        if (!served) {
          ++skipped[w][s];
          continue;
        }
        ++sizes[w][s];
        for (std::size_t t = 0; t < thresholds.size(); ++t)
          if (p.w_next > thresholds[t])
            ++counts[w](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t));
      }
    }
  });
  for (unsigned w = 0; w < workers; ++w) {
    counts_ += counts[w];
    for (std::size_t s = 0; s < sizes_.size(); ++s) {
      sizes_[s] += sizes[w][s];
      skipped_[s] += skipped[w][s];
    }
  }
}

ExceedanceReport ExceedanceAccumulator::report() const {
  ExceedanceReport r;
  r.axis = axis_;
  r.centers = spec_.centers;
  r.t_levels = t_levels_;
  r.counts = counts_;
  r.slice_sizes = sizes_;
  r.skipped = skipped_;
  r.rates = Eigen::MatrixXd::Constant(counts_.rows(), counts_.cols(),
                                      std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index s = 0; s < counts_.rows(); ++s) {
    const auto m = sizes_[static_cast<std::size_t>(s)];
    if (m == 0) continue;
    for (Eigen::Index t = 0; t < counts_.cols(); ++t)
      r.rates(s, t) = static_cast<double>(counts_(s, t)) / static_cast<double>(m);
  }
  return r;
}

ThresholdFn table_threshold(const IncrementTable& table) {
  return [&table](std::uint64_t, const CloudPoint& p, std::span<const double> levels,
                  std::span<double> thresholds) {
    try {
      for (std::size_t t = 0; t < levels.size(); ++t)
        thresholds[t] = std::asinh(predict_normalized(table, p.psi_hat, levels[t]));
    } catch (const OutOfRangeError&) {
      return false;
    }
    return true;
  };
}

ThresholdFn oracle_threshold(const CloudConfig& config) {
  return [config](std::uint64_t index, const CloudPoint& p, std::span<const double> levels,
                  std::span<double> thresholds) {
    CounterRng rng = point_stream(config.seed, index);
    const double psi = config.psi_min + (config.psi_max - config.psi_min) * open_unit(rng);
    if (psi != p.psi) throw ValidationError("oracle: point does not belong to this cloud");
    const PointDraw d = draw_point(psi, rng, config.n);
    const OrderedSample sample(d.sample);
    const double xi = from_psi(psi);
    for (std::size_t t = 0; t < levels.size(); ++t)
      thresholds[t] = std::asinh(sample.normalize(unit_scale_draw(xi, 1.0 / levels[t])));
    return true;
  };
}

namespace {

void require_held_out(const IncrementTable& table, std::uint64_t cloud_seed,
                      const ValidateOptions& options) {
  if (!options.in_sample && cloud_seed == table.build.cloud_seed)
    throw ValidationError("validation cloud seed " + std::to_string(cloud_seed) +
                          " equals the table's build seed; use a held-out cloud or request an "
                          "in-sample report explicitly");
}

}  // namespace

ExceedanceReport measure_exceedance(const Cloud& cloud, const SliceSpec& spec,
                                    std::span<const double> t_levels, Axis axis,
                                    const ThresholdFn& fn, unsigned workers) {
  ExceedanceAccumulator acc(spec, axis, {t_levels.begin(), t_levels.end()});
  acc.add(0, cloud.points, fn, workers);
  ExceedanceReport r = acc.report();
  r.cloud_seed = cloud.config.seed;
  return r;
}

ExceedanceReport validate(const IncrementTable& table, const Cloud& cloud, const SliceSpec& spec,
                          std::span<const double> t_levels, Axis axis,
                          const ValidateOptions& options) {
  require_held_out(table, cloud.config.seed, options);
  ExceedanceReport r =
      measure_exceedance(cloud, spec, t_levels, axis, table_threshold(table), options.workers);
  r.table_seed = table.build.cloud_seed;
  r.in_sample = options.in_sample && cloud.config.seed == table.build.cloud_seed;
  return r;
}

ExceedanceReport validate(const IncrementTable& table, const CloudReader& cloud,
                          const SliceSpec& spec, std::span<const double> t_levels, Axis axis,
                          const ValidateOptions& options) {
  const std::uint64_t seed = cloud.manifest().config.seed;
  require_held_out(table, seed, options);
  ExceedanceAccumulator acc(spec, axis, {t_levels.begin(), t_levels.end()});
  const ThresholdFn fn = table_threshold(table);
  cloud.for_each_chunk([&](std::uint64_t first, std::span<const CloudPoint> pts) {
    acc.add(first, pts, fn, options.workers);
  });
  ExceedanceReport r = acc.report();
  r.cloud_seed = seed;
  r.table_seed = table.build.cloud_seed;
  r.in_sample = options.in_sample && seed == table.build.cloud_seed;
  return r;
}

void write_report_csv(const ExceedanceReport& report, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << "axis,center,T,count,size,rate,se\n";
  for (std::size_t s = 0; s < report.centers.size(); ++s)
    for (std::size_t t = 0; t < report.t_levels.size(); ++t) {
      const auto si = static_cast<Eigen::Index>(s);
      const auto ti = static_cast<Eigen::Index>(t);
      out << to_string(report.axis) << ',' << format_double(report.centers[s]) << ','
          << format_double(report.t_levels[t]) << ',' << report.counts(si, ti) << ','
          << report.slice_sizes[s] << ',' << format_double(report.rates(si, ti)) << ','
          << format_double(report.standard_error(si, ti)) << '\n';
    }
  if (!out) throw IoError("write failed for " + file.string());
}

std::string report_summary_json(const ExceedanceReport& report) {
  std::uint64_t skipped = 0;
  std::uint64_t served = 0;
  for (std::size_t s = 0; s < report.centers.size(); ++s) {
    skipped += report.skipped[s];
    served += report.slice_sizes[s];
  }
  std::ostringstream os;
  os << "{\n  \"axis\": \"" << to_string(report.axis) << "\",\n"
     << "  \"cloud_seed\": " << report.cloud_seed << ",\n"
     << "  \"table_seed\": " << report.table_seed << ",\n"
     << "  \"in_sample\": " << (report.in_sample ? "true" : "false") << ",\n"
     << "  \"points\": " << served << ",\n"
     << "  \"skipped\": " << skipped << ",\n"
     << "  \"pooled\": [";
  for (std::size_t t = 0; t < report.t_levels.size(); ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    const auto [rate, size] =
        report.pooled(ti, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
    const double p = 1.0 / report.t_levels[t];
    const double se = size ? std::sqrt(p * (1 - p) / static_cast<double>(size))
                           : std::numeric_limits<double>::quiet_NaN();
    os << (t ? ",\n" : "\n") << "    {\"T\": " << json_number(report.t_levels[t])
       << ", \"size\": " << size << ", \"rate\": " << json_number(rate)
       << ", \"nominal\": " << json_number(p) << ", \"se\": " << json_number(se) << "}";
  }
  os << "\n  ]\n}\n";
  return os.str();
}

DecileTable estimator_deciles(std::span<const double> psi_grid, std::uint64_t reps,
                              std::uint64_t seed, int n, unsigned workers) {
  if (reps < 1000) throw ValidationError("estimator_deciles needs at least 1000 replicates");
  DecileTable out;
  out.psi_grid.assign(psi_grid.begin(), psi_grid.end());
  const auto rows = static_cast<Eigen::Index>(psi_grid.size());
  out.psi_hat.resize(rows, 9);
  out.xi_hat.resize(rows, 9);
  for (Eigen::Index g = 0; g < rows; ++g) {
    const double psi = psi_grid[static_cast<std::size_t>(g)];
    std::vector<double> est(reps);
    parallel_blocks(reps, workers, [&](unsigned, std::uint64_t lo, std::uint64_t hi) {
      for (auto r = lo; r < hi; ++r) {
        CounterRng rng = point_stream(seed, static_cast<std::uint64_t>(g) * reps + r);
        const PointDraw d = draw_point(psi, rng, n);
        est[r] = fit_xi(OrderedSample(d.sample)).psi_hat;
      }
    });
    std::sort(est.begin(), est.end());
    for (int k = 1; k <= 9; ++k) {
      const double q = sorted_quantile(est, k / 10.0);
      out.psi_hat(g, k - 1) = q;
      out.xi_hat(g, k - 1) = from_psi(q);
    }
  }
  return out;
}

std::vector<SliceDensity> slice_densities(std::span<const CloudPoint> cloud, const SliceSpec& spec,
                                          Axis axis, int grid_points) {
  spec.validate();
  std::vector<std::vector<double>> values(spec.centers.size());
  for (const auto& p : cloud) {
    const auto [first, last] = spec.slices_containing(slice_key(p, axis));
    const double other = axis == Axis::vertical ? p.psi_hat : p.psi;
    for (auto s = first; s < last; ++s) values[s].push_back(other);
  }
  std::vector<SliceDensity> out(spec.centers.size());
  for (std::size_t s = 0; s < out.size(); ++s) {
    out[s].center = spec.centers[s];
    out[s].count = values[s].size();
    if (!values[s].empty()) out[s].curve = kernel_density(values[s], grid_points);
  }
  return out;
}

}  // namespace ppp
