#include "ppp/cloud.hpp"

#include <algorithm>
#include <cmath>

#include "ppp/error.hpp"
#include "ppp/estimator.hpp"
#include "ppp/gpd.hpp"
#include "ppp/parallel.hpp"

namespace ppp {

void CloudConfig::validate() const {
  if (n_points < 1) throw ValidationError("n_points must be at least 1");
  if (!(std::isfinite(psi_min) && std::isfinite(psi_max) && psi_min < psi_max))
    throw ValidationError("psi range must be a nonempty finite interval");
  if (n < 4 || n % 2 != 0) throw ValidationError("sample size n must be even and at least 4");
  if (chunk_size < 1) throw ValidationError("chunk_size must be at least 1");
}

double unit_scale_draw(double xi, double g) {
  const double t = -std::log(g);
  if (xi < -1.0) return std::exp(xi * t) / xi;  // location shifted by +1/xi
  return gen_exp(xi, t);
}

namespace {

bool usable(const std::vector<double>& sample, double next) {
  if (!std::isfinite(next)) return false;
  for (double x : sample)
    if (!std::isfinite(x)) return false;
  std::vector<double> sorted(sample);
  const auto half = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2 - 1);
  std::nth_element(sorted.begin(), half, sorted.end(), std::greater<>());
  const double x_half = *half;
  const double x_last = *std::min_element(sorted.begin(), sorted.end());
  return x_half > x_last && std::isfinite(x_half - x_last);
}

}  // namespace

PointDraw draw_point(double psi, CounterRng& rng, int n) {
  if (!std::isfinite(psi)) throw ValidationError("draw_point: psi must be finite");
  const double xi = from_psi(psi);
  PointDraw d;
  d.sample.resize(static_cast<std::size_t>(n));
  for (;;) {
    for (auto& x : d.sample) x = unit_scale_draw(xi, open_unit(rng));
    d.next = unit_scale_draw(xi, open_unit(rng));
    if (usable(d.sample, d.next)) return d;
    ++d.retries;
  }
}

CloudPoint point_from_draws(double psi, std::span<const double> sample, double next) {
  const OrderedSample ordered(sample);
  const TailEstimate est = fit_xi(ordered);
  return {psi, est.psi_hat, std::asinh(ordered.normalize(next))};
}

CloudPoint gen_point(double psi, CounterRng& rng, int n, std::uint64_t* retries) {
  const PointDraw d = draw_point(psi, rng, n);
  if (retries) *retries += d.retries;
  return point_from_draws(psi, d.sample, d.next);
}

std::vector<CloudPoint> gen_range(const CloudConfig& config, std::uint64_t begin,
                                  std::uint64_t end, unsigned workers, CloudCounters* counters) {
  config.validate();
  std::vector<CloudPoint> out(end - begin);
  std::vector<CloudCounters> local(std::max(1u, workers));
  parallel_blocks(end - begin, workers, [&](unsigned w, std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t k = lo; k < hi; ++k) {
      CounterRng rng = point_stream(config.seed, begin + k);
      const double psi = config.psi_min + (config.psi_max - config.psi_min) * open_unit(rng);
      out[k] = gen_point(psi, rng, config.n, &local[w].retries);
      if (kPsiBracket - std::abs(out[k].psi_hat) < kPsiTolerance) ++local[w].clamped;
    }
  });
  if (counters)
    for (const auto& c : local) *counters += c;
  return out;
}

Cloud gen_cloud(const CloudConfig& config, unsigned workers) {
  Cloud cloud;
  cloud.config = config;
  cloud.points = gen_range(config, 0, config.n_points, workers, &cloud.counters);
  return cloud;
}

}  // namespace ppp
