#ifndef PPP_RNG_HPP
#define PPP_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>

namespace ppp {

// Philox4x32-10 block function (Salmon et al., Random123).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Counter-based random stream. The key is the run seed, the upper half of
/// the counter identifies the substream (one per cloud point), and the lower
/// half counts blocks within the substream. Satisfies
/// UniformRandomBitGenerator, so it can drive <random> distributions too.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (lane_ == 2) {
      const std::array<std::uint32_t, 4> ctr{
          static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
          static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
      buf_ = philox4x32(ctr, key_);
      ++block_;
      lane_ = 0;
    }
    const result_type v = (std::uint64_t{buf_[2 * lane_ + 1]} << 32) | buf_[2 * lane_];
    ++lane_;
    return v;
  }

  std::uint64_t blocks_used() const noexcept { return block_; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int lane_ = 2;
};

/// Uniform draw on the open interval (0,1): 52 random bits centred in their
/// cell, so neither 0 nor 1 is ever returned. (With 53 bits the top cell's
/// centre 1 - 2^-54 would round to 1.)
template <typename Rng>
double open_unit(Rng& rng) {
  static_assert(Rng::max() == std::numeric_limits<std::uint64_t>::max() && Rng::min() == 0,
                "open_unit needs a full 64-bit generator");
  const std::uint64_t bits = rng() >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

}  // namespace ppp

#endif  // PPP_RNG_HPP
