#ifndef PPP_CLOUD_HPP
#define PPP_CLOUD_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ppp/rng.hpp"

namespace ppp {

/// One Monte Carlo draw in the reduced space: true parameter, its curve-fit
/// estimate, and the normalized next singleton w_next = asinh(u_next).
struct CloudPoint {
  double psi = 0.0;
  double psi_hat = 0.0;
  double w_next = 0.0;

  friend bool operator==(const CloudPoint&, const CloudPoint&) = default;
};

struct CloudConfig {
  std::uint64_t n_points = 1'000'000;
  double psi_min = -4.0;
  double psi_max = 4.0;
  int n = 20;
  std::uint64_t seed = 1;
  std::uint64_t chunk_size = 250'000;

  void validate() const;
};

/// Raw draws behind one cloud point, in a location frame chosen for
/// precision (see draw_point). Only location-scale-invariant quantities may
/// be derived from them.
struct PointDraw {
  std::vector<double> sample;
  double next = 0.0;
  std::uint64_t retries = 0;
};

/// Unit-scale GPD value exceeded with probability g. For xi < -1 the value
/// is located so the upper endpoint is 0 rather than -1/xi.
double unit_scale_draw(double xi, double g);

// Per-point substream: key = run seed, stream = point index.
inline CounterRng point_stream(std::uint64_t seed, std::uint64_t index) { return {seed, index}; }

/// Draws an n-sample and one extra singleton from the GPD with xi = sinh(psi)
/// and unit scale. For xi < -1 the draws are shifted so the upper endpoint
/// sits at zero, which keeps the spacings near the endpoint representable.
/// Samples whose normalization would be degenerate or non-finite are redrawn
/// from the continuation of the same stream.
PointDraw draw_point(double psi, CounterRng& rng, int n);

/// Fits psi_hat and normalizes the singleton with the sample's x_{N/2}, x_N.
CloudPoint point_from_draws(double psi, std::span<const double> sample, double next);

CloudPoint gen_point(double psi, CounterRng& rng, int n, std::uint64_t* retries = nullptr);

struct CloudCounters {
  std::uint64_t retries = 0;
  std::uint64_t clamped = 0;  // psi_hat on the estimator's bracket edge

  CloudCounters& operator+=(const CloudCounters& o) {
    retries += o.retries;
    clamped += o.clamped;
    return *this;
  }
};

/// Points [begin, end) of the cloud described by config. Point i draws its
/// psi first from substream (seed, i), then the GPD sample.
std::vector<CloudPoint> gen_range(const CloudConfig& config, std::uint64_t begin,
                                  std::uint64_t end, unsigned workers,
                                  CloudCounters* counters = nullptr);

struct Cloud {
  CloudConfig config;
  std::vector<CloudPoint> points;
  CloudCounters counters;
};

Cloud gen_cloud(const CloudConfig& config, unsigned workers = 1);

// ---------------------------------------------------------------------------
// On-disk format: <dir>/manifest.txt (key=value) plus chunk_NNNNNN.bin files
// of little-endian float64 triples (psi, psi_hat, w_next), row-major.

inline constexpr int kCloudFormatVersion = 1;

struct CloudManifest {
  CloudConfig config;
  std::uint64_t chunk_count = 0;
  CloudCounters counters;
  int format_version = kCloudFormatVersion;

  std::string text() const;
  static CloudManifest parse(const std::string& text);
  // FNV-1a 64 of text(), as 16 hex digits.
  std::string hash() const;
};

std::filesystem::path chunk_path(const std::filesystem::path& dir, std::uint64_t chunk);

/// Generates the cloud chunk by chunk into dir. With resume, chunk files that
/// already exist at full size are kept and only their counters recomputed.
CloudManifest write_cloud(const CloudConfig& config, const std::filesystem::path& dir,
                          unsigned workers = 1, bool resume = false);

class CloudReader {
 public:
  explicit CloudReader(std::filesystem::path dir);

  const CloudManifest& manifest() const noexcept { return manifest_; }
  std::vector<CloudPoint> read_chunk(std::uint64_t chunk) const;
  // fn(first_point_index, points) for each chunk in order.
  void for_each_chunk(
      const std::function<void(std::uint64_t, std::span<const CloudPoint>)>& fn) const;
  std::vector<CloudPoint> read_all() const;

 private:
  std::filesystem::path dir_;
  CloudManifest manifest_;
};

void write_points_binary(const std::filesystem::path& file, std::span<const CloudPoint> points);
std::vector<CloudPoint> read_points_binary(const std::filesystem::path& file);
void export_csv(const CloudReader& cloud, const std::filesystem::path& csv);

}  // namespace ppp

#endif  // PPP_CLOUD_HPP
