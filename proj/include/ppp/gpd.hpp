#ifndef PPP_GPD_HPP
#define PPP_GPD_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ppp/error.hpp"
#include "ppp/rng.hpp"

namespace ppp {

// Below this |xi| the closed forms are replaced by their expansions in xi.
inline constexpr double kSeriesThreshold = 1e-6;

/// (e^{xi t} - 1) / xi, continuous through xi = 0 where it equals t.
template <typename Scalar>
Scalar gen_exp(Scalar xi, Scalar t) {
  using std::abs;
  using std::expm1;
  if (abs(xi) < Scalar(kSeriesThreshold)) {
    const Scalar s = xi * t;
    return t * (Scalar(1) + s / Scalar(2) + s * s / Scalar(6));
  }
  return expm1(xi * t) / xi;
}

/// log(1 + xi z) / xi, continuous through xi = 0 where it equals z.
template <typename Scalar>
Scalar gen_log(Scalar xi, Scalar z) {
  using std::abs;
  using std::log1p;
  if (abs(xi) < Scalar(kSeriesThreshold)) {
    const Scalar s = xi * z;
    return z * (Scalar(1) - s / Scalar(2) + s * s / Scalar(3));
  }
  return log1p(xi * z) / xi;
}

/// (e^{xi a} - 1) / (1 - e^{xi b}) for b < 0; tends to a / (-b) at xi = 0.
/// Both the curve-fit model and the level-T extrapolation are this ratio.
template <typename Scalar>
Scalar expm1_ratio(Scalar xi, Scalar a, Scalar b) {
  return gen_exp(xi, a) / -gen_exp(xi, b);
}

template <typename Scalar>
struct GpdParams {
  Scalar mu{0};
  Scalar sigma{1};
  Scalar xi{0};

  void validate() const {
    using std::isfinite;
    if (!isfinite(mu) || !isfinite(sigma) || !isfinite(xi))
      throw ValidationError("GPD parameters must be finite");
    if (!(sigma > Scalar(0))) throw ValidationError("GPD scale must be positive");
  }

  // Upper end of the support; +inf unless xi < 0.
  Scalar upper_endpoint() const {
    if (xi < Scalar(0)) return mu - sigma / xi;
    return std::numeric_limits<Scalar>::infinity();
  }
};

using Gpd = GpdParams<double>;

/// Exceedance probability G(x) = (1 + xi (x - mu) / sigma)^(-1/xi).
template <typename Scalar>
Scalar tail_prob(const GpdParams<Scalar>& p, Scalar x) {
  using std::exp;
  p.validate();
  if (!(x >= p.mu) || x > p.upper_endpoint())
    throw DomainError("tail_prob: x outside the GPD support");
  const Scalar z = (x - p.mu) / p.sigma;
  if (p.xi < Scalar(0) && x == p.upper_endpoint()) return Scalar(0);
  return exp(-gen_log(p.xi, z));
}

/// Inverse of tail_prob: the value exceeded with probability g.
template <typename Scalar>
Scalar tail_quantile(const GpdParams<Scalar>& p, Scalar g) {
  using std::log;
  p.validate();
  if (!(g > Scalar(0) && g <= Scalar(1)))
    throw DomainError("tail_quantile: probability outside (0, 1]");
  return p.mu + p.sigma * gen_exp(p.xi, -log(g));
}

/// n i.i.d. draws by inverse transform on tail probabilities g ~ U(0,1).
template <typename Rng>
std::vector<double> sample(const Gpd& p, Rng& rng, std::size_t n) {
  p.validate();
  if (n == 0) throw ValidationError("sample: n must be at least 1");
  std::vector<double> out(n);
  for (auto& x : out) x = tail_quantile(p, open_unit(rng));
  return out;
}

}  // namespace ppp

#endif  // PPP_GPD_HPP
