#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "ppp/cloud.hpp"
#include "ppp/error.hpp"
#include "ppp/estimator.hpp"
#include "ppp/format.hpp"

namespace fs = std::filesystem;

namespace ppp {

namespace {

constexpr std::size_t kRecordBytes = 3 * sizeof(double);

void put_le(unsigned char* dst, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) dst[b] = static_cast<unsigned char>(bits >> (8 * b));
}

double get_le(const unsigned char* src) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= std::uint64_t{src[b]} << (8 * b);
  return std::bit_cast<double>(bits);
}

std::uint64_t parse_u64(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw IoError("cloud manifest is missing '" + key + "'");
  try {
    std::size_t used = 0;
    const auto v = std::stoull(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw IoError("cloud manifest has a malformed '" + key + "'");
  }
}

double parse_double(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw IoError("cloud manifest is missing '" + key + "'");
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw IoError("cloud manifest has a malformed '" + key + "'");
  }
}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << text;
  if (!out) throw IoError("write failed for " + file.string());
}

}  // namespace

std::string CloudManifest::text() const {
  std::ostringstream os;
  os << "format_version=" << format_version << '\n'
     << "seed=" << config.seed << '\n'
     << "n_points=" << config.n_points << '\n'
     << "psi_min=" << format_double(config.psi_min) << '\n'
     << "psi_max=" << format_double(config.psi_max) << '\n'
     << "n=" << config.n << '\n'
     << "chunk_size=" << config.chunk_size << '\n'
     << "chunk_count=" << chunk_count << '\n'
     << "retry_count=" << counters.retries << '\n'
     << "clamped_count=" << counters.clamped << '\n';
  return os.str();
}

CloudManifest CloudManifest::parse(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("cloud manifest line without '=': " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  CloudManifest m;
  m.format_version = static_cast<int>(parse_u64(kv, "format_version"));
  if (m.format_version != kCloudFormatVersion)
    throw IoError("unsupported cloud format version " + std::to_string(m.format_version));
  m.config.seed = parse_u64(kv, "seed");
  m.config.n_points = parse_u64(kv, "n_points");
  m.config.psi_min = parse_double(kv, "psi_min");
  m.config.psi_max = parse_double(kv, "psi_max");
  m.config.n = static_cast<int>(parse_u64(kv, "n"));
  m.config.chunk_size = parse_u64(kv, "chunk_size");
  m.chunk_count = parse_u64(kv, "chunk_count");
  m.counters.retries = parse_u64(kv, "retry_count");
  m.counters.clamped = parse_u64(kv, "clamped_count");
  return m;
}

std::string CloudManifest::hash() const { return fnv1a_hex(text()); }

fs::path chunk_path(const fs::path& dir, std::uint64_t chunk) {
  char name[32];
  std::snprintf(name, sizeof name, "chunk_%06" PRIu64 ".bin", chunk);
  return dir / name;
}

void write_points_binary(const fs::path& file, std::span<const CloudPoint> points) {
  std::vector<unsigned char> buf(points.size() * kRecordBytes);
  for (std::size_t i = 0; i < points.size(); ++i) {
    unsigned char* rec = buf.data() + i * kRecordBytes;
    put_le(rec, points[i].psi);
    put_le(rec + 8, points[i].psi_hat);
    put_le(rec + 16, points[i].w_next);
  }
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::vector<CloudPoint> read_points_binary(const fs::path& file) {
  const std::string raw = read_text(file);
  if (raw.size() % kRecordBytes != 0) throw IoError("truncated chunk file " + file.string());
  std::vector<CloudPoint> points(raw.size() / kRecordBytes);
  const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const unsigned char* rec = bytes + i * kRecordBytes;
    points[i] = {get_le(rec), get_le(rec + 8), get_le(rec + 16)};
  }
  return points;
}

CloudManifest write_cloud(const CloudConfig& config, const fs::path& dir, unsigned workers,
                          bool resume) {
  config.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  CloudManifest m;
  m.config = config;
  m.chunk_count = (config.n_points + config.chunk_size - 1) / config.chunk_size;

  for (std::uint64_t c = 0; c < m.chunk_count; ++c) {
    const std::uint64_t begin = c * config.chunk_size;
    const std::uint64_t end = std::min(config.n_points, begin + config.chunk_size);
    const fs::path file = chunk_path(dir, c);
    if (resume && fs::exists(file) && fs::file_size(file) == (end - begin) * kRecordBytes) {
      // Retries are decided before fitting, so redrawing is enough to
      // recover them; clamping is visible in the stored estimates.
      for (std::uint64_t i = begin; i < end; ++i) {
        CounterRng rng = point_stream(config.seed, i);
        const double psi = config.psi_min + (config.psi_max - config.psi_min) * open_unit(rng);
        m.counters.retries += draw_point(psi, rng, config.n).retries;
      }
      for (const auto& p : read_points_binary(file))
        if (kPsiBracket - std::abs(p.psi_hat) < kPsiTolerance) ++m.counters.clamped;
      continue;
    }
    CloudCounters counters;
    const auto points = gen_range(config, begin, end, workers, &counters);
    write_points_binary(file, points);
    m.counters += counters;
  }
  write_text(dir / "manifest.txt", m.text());
  return m;
}

CloudReader::CloudReader(fs::path dir) : dir_(std::move(dir)) {
  manifest_ = CloudManifest::parse(read_text(dir_ / "manifest.txt"));
  manifest_.config.validate();
}

std::vector<CloudPoint> CloudReader::read_chunk(std::uint64_t chunk) const {
  if (chunk >= manifest_.chunk_count) throw IoError("chunk index out of range");
  auto points = read_points_binary(chunk_path(dir_, chunk));
  const auto& cfg = manifest_.config;
  const std::uint64_t expected =
      std::min(cfg.chunk_size, cfg.n_points - chunk * cfg.chunk_size);
  if (points.size() != expected) throw IoError("chunk " + std::to_string(chunk) + " has wrong size");
  return points;
}

void CloudReader::for_each_chunk(
    const std::function<void(std::uint64_t, std::span<const CloudPoint>)>& fn) const {
  for (std::uint64_t c = 0; c < manifest_.chunk_count; ++c) {
    const auto points = read_chunk(c);
    fn(c * manifest_.config.chunk_size, points);
  }
}

std::vector<CloudPoint> CloudReader::read_all() const {
  std::vector<CloudPoint> all;
  all.reserve(manifest_.config.n_points);
  for_each_chunk([&](std::uint64_t, std::span<const CloudPoint> pts) {
    all.insert(all.end(), pts.begin(), pts.end());
  });
  return all;
}

void export_csv(const CloudReader& cloud, const fs::path& csv) {
  std::ofstream out(csv, std::ios::trunc);
  if (!out) throw IoError("cannot write " + csv.string());
  out << "psi,psi_hat,w_next\n";
  cloud.for_each_chunk([&](std::uint64_t, std::span<const CloudPoint> pts) {
    for (const auto& p : pts)
      out << format_double(p.psi) << ',' << format_double(p.psi_hat) << ','
          << format_double(p.w_next) << '\n';
  });
  if (!out) throw IoError("write failed for " + csv.string());
}

}  // namespace ppp
