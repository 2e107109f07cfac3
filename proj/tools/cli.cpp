#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ppp/cloud.hpp"
#include "ppp/error.hpp"
#include "ppp/estimator.hpp"
#include "ppp/format.hpp"
#include "ppp/gpd.hpp"
#include "ppp/predictor.hpp"
#include "ppp/validate.hpp"

namespace fs = std::filesystem;

namespace ppp::cli {

namespace {

constexpr std::uint64_t kFullScaleCloudPoints = 8'000'000;

struct SliceOptions {
  double width = 0.1;
  double center_min = -3.0;
  double center_max = 3.0;
  double center_step = 0.1;
  std::uint64_t min_points = 200;

  SliceSpec spec() const {
    SliceSpec s;
    s.width = width;
    s.centers = center_grid(center_min, center_max, center_step);
    s.min_points = min_points;
    s.validate();
    return s;
  }
};

void add_slice_options(CLI::App* cmd, SliceOptions& o) {
  cmd->add_option("--width", o.width, "Slice width")->capture_default_str();
  cmd->add_option("--center-min", o.center_min, "First slice center")->capture_default_str();
  cmd->add_option("--center-max", o.center_max, "Last slice center")->capture_default_str();
  cmd->add_option("--center-step", o.center_step, "Spacing of slice centers")->capture_default_str();
}

bool flag_given(const std::vector<std::string>& args, const std::string& name) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == name || a.rfind(name + "=", 0) == 0;
  });
}

// PPP_SEED replaces a seed taken from a config file or the default, but not
// one given on the command line.
void apply_seed_env(const std::vector<std::string>& args, std::uint64_t& seed) {
  if (flag_given(args, "--seed")) return;
  const char* env = std::getenv("PPP_SEED");
  if (!env || !*env) return;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used, 0);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing text");
    seed = v;
  } catch (const std::exception&) {
    throw ValidationError(std::string("PPP_SEED is not an unsigned integer: ") + env);
  }
}

void require_distinct(const fs::path& in, const fs::path& out) {
  if (fs::weakly_canonical(in) == fs::weakly_canonical(out))
    throw ValidationError("input and output paths must differ: " + in.string());
}

void ensure_parent(const fs::path& file) {
  const fs::path parent = file.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory " + parent.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& file) {
  ensure_parent(file);
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  return out;
}

std::vector<double> read_observations(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<double> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line.substr(first), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    const auto rest = line.find_first_not_of(" \t\r", first + used);
    if (used == 0 || rest != std::string::npos)
      throw ValidationError(file.string() + ":" + std::to_string(lineno) + ": not a number");
    values.push_back(v);
  }
  return values;
}

std::string csv(double v) { return format_double(v); }

// ---------------------------------------------------------------------------

struct GenCloudArgs {
  CloudConfig config;
  fs::path out;
  unsigned workers = 1;
  bool resume = false;
  std::optional<fs::path> csv;
};

int cmd_gen_cloud(GenCloudArgs& a, std::ostream& out) {
  a.config.validate();
  const CloudManifest m = write_cloud(a.config, a.out, a.workers, a.resume);
  if (a.csv) {
    ensure_parent(*a.csv);
    export_csv(CloudReader(a.out), *a.csv);
  }
  out << "cloud " << a.out.string() << "\n"
      << "  seed=" << m.config.seed << " n_points=" << m.config.n_points << " n=" << m.config.n
      << " psi=[" << csv(m.config.psi_min) << ", " << csv(m.config.psi_max) << "]\n"
      << "  chunks=" << m.chunk_count << " retries=" << m.counters.retries
      << " clamped=" << m.counters.clamped << " (fraction "
      << csv(static_cast<double>(m.counters.clamped) / static_cast<double>(m.config.n_points))
      << ")\n"
      << "  manifest_hash=" << m.hash() << "\n";
  return kOk;
}

struct BuildArgs {
  fs::path cloud;
  fs::path out;
  SliceOptions slices;
  std::vector<double> t_levels = default_t_levels();
  std::string quantile_mode = "order_statistic";
  std::string interpolation = "slice";
  unsigned workers = 1;
};

int cmd_build(const BuildArgs& a, std::ostream& out) {
  require_distinct(a.cloud, a.out);
  const CloudReader reader(a.cloud);
  IncrementTable table =
      build_table(reader, a.slices.spec(), a.t_levels, parse_quantile_mode(a.quantile_mode), a.workers);
  table.interpolation = parse_interpolation(a.interpolation);
  ensure_parent(a.out);
  save_table(table, a.out);
  std::size_t absent = 0;
  for (Eigen::Index c = 0; c < table.d_xi.rows(); ++c)
    for (Eigen::Index t = 0; t < table.d_xi.cols(); ++t) absent += !table.present(c, t);
  out << "table " << a.out.string() << ": " << table.centers.size() << " slices x "
      << table.t_levels.size() << " levels, " << absent << " absent cells, identity error "
      << csv(table.max_identity_error()) << "\n";
  return kOk;
}

struct PredictArgs {
  fs::path table;
  fs::path data;
  std::vector<double> t_levels;
  bool json = false;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const IncrementTable table = load_table(a.table);
  const std::vector<double> values = read_observations(a.data);
  if (static_cast<int>(values.size()) != table.n)
    throw ValidationError("expected " + std::to_string(table.n) + " observations, got " +
                          std::to_string(values.size()));
  const OrderedSample sample(values);
  const TailEstimate est = fit_xi(sample);
  const std::vector<double> levels = a.t_levels.empty() ? table.t_levels : a.t_levels;
  std::vector<double> preds;
  for (double T : levels) preds.push_back(predict(table, sample, T));

  if (a.json) {
    nlohmann::json j;
    j["xi_hat"] = est.xi_hat;
    j["psi_hat"] = est.psi_hat;
    j["rss"] = est.rss;
    j["at_bracket_edge"] = est.at_bracket_edge;
    j["predictions"] = nlohmann::json::array();
    for (std::size_t k = 0; k < levels.size(); ++k)
      j["predictions"].push_back({{"T", levels[k]}, {"x", preds[k]}});
    out << j.dump(2) << "\n";
  } else {
    out << "xi_hat  " << csv(est.xi_hat) << "\npsi_hat " << csv(est.psi_hat) << "\n";
    for (std::size_t k = 0; k < levels.size(); ++k)
      out << "T=" << csv(levels[k]) << "  x=" << csv(preds[k]) << "\n";
  }
  return kOk;
}

struct ValidateArgs {
  fs::path table;
  fs::path cloud;
  std::string axis = "both";
  std::string out = "report";
  SliceOptions slices;
  std::vector<double> t_levels;
  bool in_sample = false;
  unsigned workers = 1;
};

void write_report(const ExceedanceReport& r, const std::string& prefix) {
  const fs::path base = prefix + "_" + to_string(r.axis);
  const fs::path csv_file = fs::path(base.string() + ".csv");
  ensure_parent(csv_file);
  write_report_csv(r, csv_file);
  open_out(base.string() + ".json") << report_summary_json(r);
}

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  const IncrementTable table = load_table(a.table);
  const CloudReader reader(a.cloud);
  const std::vector<double> levels = a.t_levels.empty() ? table.t_levels : a.t_levels;
  std::vector<Axis> axes;
  if (a.axis == "both")
    axes = {Axis::vertical, Axis::horizontal};
  else
    axes = {parse_axis(a.axis)};
  ValidateOptions opts;
  opts.workers = a.workers;
  opts.in_sample = a.in_sample;
  for (Axis axis : axes) {
    const ExceedanceReport r = validate(table, reader, a.slices.spec(), levels, axis, opts);
    write_report(r, a.out);
    out << to_string(axis) << (r.in_sample ? " (in-sample)" : "") << ":";
    for (std::size_t t = 0; t < levels.size(); ++t) {
      const auto [rate, size] = r.pooled(static_cast<Eigen::Index>(t), -1e300, 1e300);
      out << "  T=" << csv(levels[t]) << " rate*T=" << csv(rate * levels[t]);
      (void)size;
    }
    out << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// Plot data.

struct FigureArgs {
  fs::path out = "figures";
  std::optional<fs::path> table;
  std::optional<fs::path> compare_table;
  std::optional<fs::path> cloud;
  std::optional<fs::path> validation_cloud;
  std::uint64_t reps = 1000;
  std::uint64_t seed = 1;
  int n = 20;
  std::uint64_t subsample = 20000;
  int grid_points = 256;
  unsigned workers = 1;
};

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    g[static_cast<std::size_t>(k)] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (count - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

void emit_fig3(const FigureArgs& a, const std::optional<CloudReader>& cloud) {
  const std::vector<double> grid = center_grid(-4.0, 4.0, 0.25);
  const DecileTable d = estimator_deciles(grid, a.reps, a.seed, a.n, a.workers);
  auto f = open_out(a.out / "fig3_deciles.csv");
  f << "psi,xi";
  for (int q = 1; q <= 9; ++q) f << ",psi_hat_q" << q * 10;
  for (int q = 1; q <= 9; ++q) f << ",xi_hat_q" << q * 10;
  f << "\n";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto r = static_cast<Eigen::Index>(g);
    f << csv(grid[g]) << "," << csv(from_psi(grid[g]));
    for (Eigen::Index q = 0; q < 9; ++q) f << "," << csv(d.psi_hat(r, q));
    for (Eigen::Index q = 0; q < 9; ++q) f << "," << csv(d.xi_hat(r, q));
    f << "\n";
  }
  if (!cloud) return;

  const std::vector<CloudPoint> points = cloud->read_all();
  SliceSpec spec;
  spec.centers = center_grid(-3.95, 3.95, 0.1);
  for (Axis axis : {Axis::vertical, Axis::horizontal}) {
    const auto dens = slice_densities(points, spec, axis, a.grid_points);
    auto fd = open_out(a.out / ("fig3_densities_" + to_string(axis) + ".csv"));
    auto fc = open_out(a.out / ("fig3_counts_" + to_string(axis) + ".csv"));
    fd << "center,x,density\n";
    fc << "center,count\n";
    for (const auto& s : dens) {
      fc << csv(s.center) << "," << s.count << "\n";
      if (!s.curve) continue;
      for (std::size_t k = 0; k < s.curve->x.size(); ++k)
        fd << csv(s.center) << "," << csv(s.curve->x[k]) << "," << csv(s.curve->density[k]) << "\n";
    }
  }
}

void emit_fig4(const FigureArgs& a, const CloudReader& cloud, const IncrementTable* table) {
  const std::uint64_t total = cloud.manifest().config.n_points;
  const std::uint64_t stride = std::max<std::uint64_t>(1, total / std::max<std::uint64_t>(1, a.subsample));
  auto f = open_out(a.out / "fig4_cloud.csv");
  f << "psi_hat,w_next\n";
  cloud.for_each_chunk([&](std::uint64_t first, std::span<const CloudPoint> pts) {
    for (std::size_t i = 0; i < pts.size(); ++i)
      if ((first + i) % stride == 0) f << csv(pts[i].psi_hat) << "," << csv(pts[i].w_next) << "\n";
  });
  if (!table) return;
  auto p = open_out(a.out / "fig4_predictions.csv");
  p << "center,T,w_pred\n";
  for (std::size_t c = 0; c < table->centers.size(); ++c)
    for (std::size_t t = 0; t < table->t_levels.size(); ++t) {
      const double u = table->u_pred(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t));
      if (std::isfinite(u))
        p << csv(table->centers[c]) << "," << csv(table->t_levels[t]) << "," << csv(std::asinh(u)) << "\n";
    }
}

void emit_fig5(const FigureArgs& a, const IncrementTable& table, const IncrementTable* compare) {
  auto f = open_out(a.out / "fig5_increments.csv");
  f << "source,center,T,d_xi,d_psi\n";
  auto rows = [&](const IncrementTable& t, const char* source) {
    for (std::size_t c = 0; c < t.centers.size(); ++c)
      for (std::size_t l = 0; l < t.t_levels.size(); ++l) {
        const double dx = t.d_xi(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(l));
        if (!std::isfinite(dx)) continue;
        const double center = t.centers[c];
        f << source << "," << csv(center) << "," << csv(t.t_levels[l]) << "," << csv(dx) << ","
          << csv(to_psi(from_psi(center) + dx) - center) << "\n";
      }
  };
  rows(table, "table");
  if (compare) rows(*compare, "compare");
}

// Mean normalized order statistics u_i over reps GPD samples.
std::vector<double> mean_order_statistics(double xi, std::uint64_t reps, std::uint64_t seed,
                                          std::uint64_t stream0, int n) {
  std::vector<double> mean(static_cast<std::size_t>(n));
  for (std::uint64_t r = 0; r < reps; ++r) {
    CounterRng rng = point_stream(seed, stream0 + r);
    const PointDraw d = draw_point(to_psi(xi), rng, n);
    const OrderedSample s(d.sample);
    for (int i = 1; i <= n; ++i) mean[static_cast<std::size_t>(i - 1)] += s.normalize(s.at(i));
  }
  for (auto& m : mean) m /= static_cast<double>(reps);
  return mean;
}

void emit_fig6(const FigureArgs& a, const IncrementTable* table, const IncrementTable* compare) {
  const std::vector<double> xis = {-1.0, -0.5, 0.0, 0.5, 1.0};
  const int n = table ? table->n : a.n;
  const std::vector<double> levels = log_grid(static_cast<double>(n + 1) / n, 400.0, 160);
  auto level_of = [&](const IncrementTable* t, double xi, double T) {
    if (!t || T < t->t_levels.front() || T > t->t_levels.back()) return std::nan("");
    try {
      return forward_level(xi_p_at(*t, to_psi(xi), T), T, n);
    } catch (const OutOfRangeError&) {
      return std::nan("");  // absent slice
    }
  };
  auto f = open_out(a.out / "fig6_extrapolation.csv");
  f << "xi_hat,T,E_R,V,u_basic,u_table,u_compare\n";
  for (double xi : xis)
    for (double T : levels)
      f << csv(xi) << "," << csv(T) << "," << csv(extrapolation_ratio(T, n)) << ","
        << csv(return_level_axis(T, n)) << "," << csv(forward_level(xi, T, n)) << ","
        << csv(level_of(table, xi, T)) << "," << csv(level_of(compare, xi, T)) << "\n";

  auto g = open_out(a.out / "fig6_data_averages.csv");
  g << "xi,i,G,T,V,mean_u\n";
  for (std::size_t k = 0; k < xis.size(); ++k) {
    const auto mean = mean_order_statistics(xis[k], a.reps, a.seed, k * a.reps, n);
    for (int i = 1; i <= n; ++i) {
      const double G = plotting_position(i, n, Plotting::prediction);
      g << csv(xis[k]) << "," << i << "," << csv(G) << "," << csv(1.0 / G) << ","
        << csv(return_level_axis(1.0 / G, n)) << "," << csv(mean[static_cast<std::size_t>(i - 1)]) << "\n";
    }
  }
}

void emit_fig7(const FigureArgs& a, const IncrementTable& table, const CloudReader& cloud,
               const IncrementTable* compare) {
  ValidateOptions opts;
  opts.workers = a.workers;
  const SliceSpec spec;
  for (Axis axis : {Axis::vertical, Axis::horizontal}) {
    write_report_csv(validate(table, cloud, spec, table.t_levels, axis, opts),
                     a.out / ("fig7_" + to_string(axis) + ".csv"));
    if (compare)
      write_report_csv(validate(*compare, cloud, spec, compare->t_levels, axis, opts),
                       a.out / ("fig7_" + to_string(axis) + "_compare.csv"));
  }
}

int cmd_emit_figures(const FigureArgs& a, std::ostream& out) {
  if (a.reps < 1000) throw ValidationError("--reps must be at least 1000");
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw IoError("cannot create " + a.out.string() + ": " + ec.message());

  std::optional<IncrementTable> table;
  std::optional<IncrementTable> compare;
  std::optional<CloudReader> cloud;
  std::optional<CloudReader> held_out;
  if (a.table) table = load_table(*a.table);
  if (a.compare_table) compare = load_table(*a.compare_table);
  if (a.cloud) cloud.emplace(*a.cloud);
  if (a.validation_cloud) held_out.emplace(*a.validation_cloud);

  std::vector<std::string> written = {"fig3_deciles.csv"};
  emit_fig3(a, cloud);
  if (cloud) {
    written.push_back("fig3_densities_*.csv, fig3_counts_*.csv, fig4_cloud.csv");
    emit_fig4(a, *cloud, table ? &*table : nullptr);
  }
  if (table) {
    emit_fig5(a, *table, compare ? &*compare : nullptr);
    written.push_back("fig5_increments.csv");
  }
  emit_fig6(a, table ? &*table : nullptr, compare ? &*compare : nullptr);
  written.push_back("fig6_extrapolation.csv, fig6_data_averages.csv");
  if (table && held_out) {
    emit_fig7(a, *table, *held_out, compare ? &*compare : nullptr);
    written.push_back("fig7_vertical.csv, fig7_horizontal.csv");
  }
  out << "wrote to " << a.out.string() << ":\n";
  for (const auto& w : written) out << "  " << w << "\n";
  return kOk;
}

}  // namespace

double return_level_axis(double T, int n) {
  return -std::log(plotting_position(n / 2, n, Plotting::prediction) * T) / std::log(2.0);
}

double extrapolation_ratio(double T, int n) { return T / (n + 1); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probability-preserving prediction of GPD extremes"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option values (flags take precedence)");
  bool paper_defaults = false;
  app.add_flag("--paper-defaults", paper_defaults,
               "N=20, 8e6 cloud points, psi in [-4,4], slice width 0.1, T grid 21..400 "
               "(explicit flags and config values still win)");

  GenCloudArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-cloud", "Generate the Monte Carlo point cloud");
  auto* gen_points = gen_cmd->add_option("--n-points", gen.config.n_points, "Number of points")
                         ->capture_default_str();
  gen_cmd->add_option("--seed", gen.config.seed, "Run seed (env PPP_SEED)")->capture_default_str();
  auto* gen_psi_min = gen_cmd->add_option("--psi-min", gen.config.psi_min)->capture_default_str();
  auto* gen_psi_max = gen_cmd->add_option("--psi-max", gen.config.psi_max)->capture_default_str();
  auto* gen_n = gen_cmd->add_option("--n", gen.config.n, "Sample size")->capture_default_str();
  gen_cmd->add_option("--chunk-size", gen.config.chunk_size)->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--workers", gen.workers)->capture_default_str();
  gen_cmd->add_flag("--resume", gen.resume, "Keep complete chunk files");
  gen_cmd->add_option("--csv", gen.csv, "Also export the cloud as CSV");

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build", "Build the increment table from a cloud");
  build_cmd->add_option("--cloud", build.cloud)->required();
  build_cmd->add_option("--out", build.out)->required();
  add_slice_options(build_cmd, build.slices);
  build_cmd->add_option("--min-points", build.slices.min_points)->capture_default_str();
  auto* build_levels = build_cmd->add_option("--t-levels", build.t_levels)->capture_default_str();
  build_cmd->add_option("--quantile-mode", build.quantile_mode)
      ->check(CLI::IsMember({"order_statistic", "kernel"}))
      ->capture_default_str();
  build_cmd->add_option("--interpolation", build.interpolation, "How estimates between slice centers are served")
      ->check(CLI::IsMember({"slice", "linear"}))
      ->capture_default_str();
  build_cmd->add_option("--workers", build.workers)->capture_default_str();

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "Predict level-T values for one sample");
  pred_cmd->add_option("--table", pred.table)->required();
  pred_cmd->add_option("data", pred.data, "File of N observations, one per line")->required();
  pred_cmd->add_option("--t", pred.t_levels, "Recurrence levels (default: the table's)");
  pred_cmd->add_flag("--json", pred.json);

  ValidateArgs val;
  auto* val_cmd = app.add_subcommand("validate", "Measure delivered exceedance rates");
  val_cmd->add_option("--table", val.table)->required();
  val_cmd->add_option("--cloud", val.cloud)->required();
  val_cmd->add_option("--axis", val.axis)
      ->check(CLI::IsMember({"vertical", "horizontal", "both"}))
      ->capture_default_str();
  val_cmd->add_option("--out", val.out, "Report prefix")->capture_default_str();
  add_slice_options(val_cmd, val.slices);
  val_cmd->add_option("--t-levels", val.t_levels);
  val_cmd->add_flag("--in-sample", val.in_sample, "Allow the build cloud");
  val_cmd->add_option("--workers", val.workers)->capture_default_str();

  FigureArgs fig;
  auto* fig_cmd = app.add_subcommand("emit-figures", "Write plot data as CSV");
  fig_cmd->add_option("--out", fig.out)->capture_default_str();
  fig_cmd->add_option("--table", fig.table);
  fig_cmd->add_option("--compare-table", fig.compare_table, "External table to overlay");
  fig_cmd->add_option("--cloud", fig.cloud, "Build cloud (densities, scatter)");
  fig_cmd->add_option("--validation-cloud", fig.validation_cloud, "Held-out cloud");
  fig_cmd->add_option("--reps", fig.reps)->capture_default_str();
  fig_cmd->add_option("--seed", fig.seed)->capture_default_str();
  auto* fig_n = fig_cmd->add_option("--n", fig.n)->capture_default_str();
  fig_cmd->add_option("--subsample", fig.subsample)->capture_default_str();
  fig_cmd->add_option("--grid-points", fig.grid_points)->capture_default_str();
  fig_cmd->add_option("--workers", fig.workers)->capture_default_str();

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("ppp");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  if (paper_defaults) {
    if (!gen_points->count()) gen.config.n_points = kFullScaleCloudPoints;
    if (!gen_psi_min->count()) gen.config.psi_min = -4.0;
    if (!gen_psi_max->count()) gen.config.psi_max = 4.0;
    if (!gen_n->count()) gen.config.n = 20;
    if (!fig_n->count()) fig.n = 20;
    if (!build_levels->count()) build.t_levels = default_t_levels();
  }

  try {
    if (*gen_cmd) {
      apply_seed_env(args, gen.config.seed);
      return cmd_gen_cloud(gen, out);
    }
    if (*build_cmd) return cmd_build(build, out);
    if (*pred_cmd) return cmd_predict(pred, out);
    if (*val_cmd) return cmd_validate(val, out);
    if (*fig_cmd) {
      apply_seed_env(args, fig.seed);
      return cmd_emit_figures(fig, out);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const OutOfRangeError& e) {
    err << "error: " << e.what() << " (psi_hat " << format_double(e.psi_hat()) << ")\n";
    return kDomain;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kDomain;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}

}  // namespace ppp::cli
