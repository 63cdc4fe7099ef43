#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Core>

namespace olqr {

namespace detail {

// Stafford mix 13, the finalizer used by splitmix64. Full-avalanche mixing of
// a 64-bit word.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

}  // namespace detail

// Counter-based random stream: the n-th output word is a pure function of
// (seed, stream_id, n), so streams can be replayed or regenerated from the
// key alone and are independent of how many other streams exist. Integer
// output is bit-identical everywhere; Gaussian output additionally depends
// only on the platform's libm (IEEE-754 doubles assumed).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : base_(detail::mix64(detail::mix64(seed + detail::kGolden) ^
                            (stream_id + 0xbf58476d1ce4e5b9ull))),
        seed_(seed),
        stream_id_(stream_id) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // Number of draws consumed so far (normals, uniforms and sign draws each
  // count as one).
  std::uint64_t draws() const noexcept { return draw_; }

  // Raw 64-bit word at counter position n, independent of stream state.
  std::uint64_t word_at(std::uint64_t n) const noexcept {
    return detail::mix64(base_ + (n + 1) * detail::kGolden);
  }

  // Uniform draw in [0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t n = draw_++;
    return static_cast<double>(word_at(2 * n) >> 11) * 0x1.0p-53;
  }

  // Standard normal draw via Box-Muller. Each call consumes one counter slot
  // (two words); the sine branch is discarded so that every draw is a pure
  // function of its slot.
  double normal() {
    const std::uint64_t n = draw_++;
    const double u1 =
        static_cast<double>((word_at(2 * n) >> 11) + 1) * 0x1.0p-53;  // (0,1]
    const double u2 = static_cast<double>(word_at(2 * n + 1) >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  Eigen::VectorXd normal_vector(int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = normal();
    return v;
  }

  // Uniform sign in {-1, +1}.
  int rademacher() {
    const std::uint64_t n = draw_++;
    return (word_at(2 * n) >> 63) ? 1 : -1;
  }

  // Uniform integer in [0, bound) via 64-bit multiply-shift; bias is
  // negligible (bound << 2^64) and the mapping is platform-independent.
  std::uint64_t uniform_below(std::uint64_t bound) {
    const std::uint64_t n = draw_++;
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(word_at(2 * n)) * bound) >> 64);
  }

 private:
  std::uint64_t base_;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t draw_ = 0;
};

}  // namespace olqr
