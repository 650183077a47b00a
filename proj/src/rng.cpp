#include "sparselwe/rng.hpp"

#include <boost/random/normal_distribution.hpp>
#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>

#include "sparselwe/error.hpp"

namespace sparselwe {

double SeededRng::normal() {
  // boost's normal_distribution is a stateless ziggurat, so a fresh instance
  // per call keeps the stream a pure function of the counter.
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(*this);
}

namespace {

constexpr std::size_t kChunk = 128;  // pairs per batch
constexpr std::size_t kPad = 16;     // widest float packet

double check_width(double sigma) {
  if (!(sigma >= 0.0)) throw ParameterError("discrete Gaussian: sigma must be >= 0");
  // Rounding adds variance 1/12; take it out of the continuous width so the
  // integer std matches sigma (accurate for sigma >= 1).
  return sigma >= 1.0 ? std::sqrt(sigma * sigma - 1.0 / 12.0) : sigma;
}

// Batched Box-Muller, one 64-bit word per pair: 40 bits for the radius, 24 for
// the angle. Float keeps ~1e-7 relative accuracy, far below the rounding
// step, and is what Eigen vectorizes for log/sin/cos.
template <typename T>
void fill_impl(double sigma, SeededRng& rng, std::span<T> out) {
  const double width = check_width(sigma);
  if (sigma == 0.0) {
    std::fill(out.begin(), out.end(), T{0});
    return;
  }
  alignas(64) std::array<std::uint64_t, kChunk> bits;
  alignas(64) std::array<float, kChunk> radius, angle, x, y;
  constexpr float kAngleStep = static_cast<float>(0x1p-24 * 2.0 * M_PI);
  std::size_t done = 0;
  while (done < out.size()) {
    const std::size_t pairs = std::min(kChunk, (out.size() - done + 1) / 2);
    // Padding to whole aligned packets keeps Eigen off its scalar tail path, so
    // a value does not depend on the length of the fill it came from.
    const std::size_t padded = (pairs + kPad - 1) / kPad * kPad;
    const auto m = static_cast<Eigen::Index>(padded);
    rng.fill_bits(std::span<std::uint64_t>(bits.data(), pairs));
    std::fill(bits.begin() + static_cast<std::ptrdiff_t>(pairs),
              bits.begin() + static_cast<std::ptrdiff_t>(padded), std::uint64_t{1} << 63);
    for (std::size_t i = 0; i < padded; ++i) {
      radius[i] = static_cast<float>((static_cast<double>(bits[i] >> 24) + 0.5) * 0x1p-40);
      angle[i] = static_cast<float>(static_cast<std::int32_t>(bits[i] & 0xffffff)) * kAngleStep;
    }
    using Packed = Eigen::Map<Eigen::ArrayXf, Eigen::Aligned64>;
    Packed r(radius.data(), m), a(angle.data(), m), xs(x.data(), m), ys(y.data(), m);
    r = (-2.0f * r.log()).sqrt();
    xs = a.cos() * r;
    ys = a.sin() * r;
    const std::size_t take = std::min(2 * pairs, out.size() - done);
    for (std::size_t i = 0; i < take; ++i) {
      const float z = i % 2 == 0 ? x[i / 2] : y[i / 2];
      out[done + i] = static_cast<T>(std::rint(static_cast<double>(z) * width));
    }
    done += take;
  }
}

}  // namespace

std::int64_t sample_discrete_gaussian(double sigma, SeededRng& rng) {
  std::int64_t v = 0;
  fill_impl(sigma, rng, std::span<std::int64_t>(&v, 1));
  return v;
}

void fill_discrete_gaussian(double sigma, SeededRng& rng, std::span<std::int64_t> out) {
  fill_impl(sigma, rng, out);
}

void fill_discrete_gaussian(double sigma, SeededRng& rng, std::span<double> out) {
  fill_impl(sigma, rng, out);
}

}  // namespace sparselwe
