#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace sparselwe {

namespace detail {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 finalizer: a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Second, independent bijection (Stafford variant 13 constants).
constexpr std::uint64_t mix64_alt(std::uint64_t z) noexcept {
  z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
  z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
  return z ^ (z >> 33);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Counter-based, splittable generator.
///
/// The i-th output of a stream is a pure function of (seed, stream_id, i), so
/// any (seed, stream_id) pair reproduces the same sequence, and substreams can
/// be derived for rows, workers or experiment cells without sharing state.
/// Satisfies UniformRandomBitGenerator.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : seed_(seed),
        stream_id_(stream_id),
        key_(detail::mix64(seed ^ detail::mix64_alt(stream_id + detail::kGolden))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    return detail::mix64(key_ ^ detail::mix64_alt(++counter_ * detail::kGolden));
  }

  /// Same values as out.size() consecutive calls to operator().
  void fill_bits(std::span<std::uint64_t> out) noexcept {
    const std::uint64_t base = counter_;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = detail::mix64(key_ ^ detail::mix64_alt((base + 1 + i) * detail::kGolden));
    }
    counter_ += out.size();
  }

  /// Child stream labelled by an integer; independent of how far this stream
  /// has been consumed.
  [[nodiscard]] SeededRng substream(std::uint64_t label) const noexcept {
    return SeededRng(seed_, detail::mix64(stream_id_ + detail::kGolden * (label + 1)));
  }

  [[nodiscard]] SeededRng substream(std::string_view label) const noexcept {
    return substream(detail::fnv1a(label));
  }

  /// Unbiased integer in [0, bound); bound must be >= 1.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept {
    // Lemire's multiply-and-reject.
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in the open interval (0, 1).
  double uniform01() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1p-53;
  }

  /// Standard normal variate (ziggurat).
  double normal();

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }
  [[nodiscard]] std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Rounded continuous Gaussian with mean 0 (Box-Muller on 40-bit uniforms,
/// so |z| < 7.5 sigma). For sigma >= 1 the continuous width is sqrt(sigma^2 - 1/12), so that the
/// rounded value has std sigma. sigma == 0 returns 0 without consuming
/// randomness.
std::int64_t sample_discrete_gaussian(double sigma, SeededRng& rng);

/// Bulk version; draws come in pairs, so an odd-length fill discards one.
void fill_discrete_gaussian(double sigma, SeededRng& rng, std::span<std::int64_t> out);
void fill_discrete_gaussian(double sigma, SeededRng& rng, std::span<double> out);

}  // namespace sparselwe
