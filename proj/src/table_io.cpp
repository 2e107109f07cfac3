#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ppp/error.hpp"
#include "ppp/format.hpp"
#include "ppp/predictor.hpp"

namespace ppp {

namespace {

constexpr int kTableFormatVersion = 1;

template <typename Seq, typename Fmt>
void write_array(std::ostream& os, const Seq& seq, Fmt fmt) {
  os << '[';
  bool first = true;
  for (const auto& v : seq) {
    if (!first) os << ", ";
    os << fmt(v);
    first = false;
  }
  os << ']';
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  os << "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    os << (r ? ",\n    " : "\n    ") << '[';
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? ", " : "") << json_number(m(r, c));
    os << ']';
  }
  os << "\n  ]";
}

Eigen::MatrixXd read_matrix(const nlohmann::json& j, std::size_t rows, std::size_t cols,
                            const char* name) {
  if (!j.is_array() || j.size() != rows) throw IoError(std::string("table field '") + name + "' has wrong shape");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != cols)
      throw IoError(std::string("table field '") + name + "' has wrong shape");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          row[c].is_null() ? std::numeric_limits<double>::quiet_NaN() : row[c].get<double>();
  }
  return m;
}

}  // namespace

std::string to_json(const IncrementTable& table) {
  std::ostringstream os;
  auto num = [](double v) { return json_number(v); };
  auto cnt = [](std::uint64_t v) { return std::to_string(v); };
  os << "{\n  \"version\": " << kTableFormatVersion << ",\n  \"n\": " << table.n
     << ",\n  \"t_levels\": ";
  write_array(os, table.t_levels, num);
  os << ",\n  \"slice_width\": " << num(table.slice_width) << ",\n  \"centers\": ";
  write_array(os, table.centers, num);
  os << ",\n  \"counts\": ";
  write_array(os, table.counts, cnt);
  os << ",\n  \"d_xi\": ";
  write_matrix(os, table.d_xi);
  os << ",\n  \"u_pred\": ";
  write_matrix(os, table.u_pred);
  os << ",\n  \"interpolation\": \"" << to_string(table.interpolation) << "\"";
  os << ",\n  \"build\": {\"cloud_manifest_hash\": " << nlohmann::json(table.build.cloud_manifest_hash).dump()
     << ", \"cloud_seed\": " << table.build.cloud_seed << ", \"quantile_mode\": \""
     << to_string(table.build.quantile_mode) << "\", \"min_points\": " << table.build.min_points
     << "}\n}\n";
  return os.str();
}

IncrementTable table_from_json(const std::string& text) {
  IncrementTable t;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != kTableFormatVersion)
      throw IoError("unsupported increment table version");
    t.n = j.at("n").get<int>();
    t.t_levels = j.at("t_levels").get<std::vector<double>>();
    t.slice_width = j.at("slice_width").get<double>();
    t.centers = j.at("centers").get<std::vector<double>>();
    t.counts = j.at("counts").get<CountVector>();
    t.d_xi = read_matrix(j.at("d_xi"), t.centers.size(), t.t_levels.size(), "d_xi");
    t.u_pred = read_matrix(j.at("u_pred"), t.centers.size(), t.t_levels.size(), "u_pred");
    t.interpolation = parse_interpolation(j.value("interpolation", std::string{"slice"}));
    const auto& b = j.at("build");
    t.build.cloud_manifest_hash = b.value("cloud_manifest_hash", std::string{});
    t.build.cloud_seed = b.value("cloud_seed", std::uint64_t{0});
    t.build.quantile_mode = parse_quantile_mode(b.value("quantile_mode", std::string{"order_statistic"}));
    t.build.min_points = b.value("min_points", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed increment table: ") + e.what());
  }
  t.check_invariants();
  return t;
}

void save_table(const IncrementTable& table, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << to_json(table);
  if (!out) throw IoError("write failed for " + file.string());
}

IncrementTable load_table(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return table_from_json(ss.str());
}

}  // namespace ppp
