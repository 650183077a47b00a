#pragma once

#include <cstdint>
#include <span>

#include "sparselwe/error.hpp"

namespace sparselwe {

using Zq = std::uint64_t;
using i128 = __int128;

/// Largest supported modulus (2^41). 128-bit accumulation keeps dot products
/// exact well beyond this for n <= 4096.
inline constexpr std::uint64_t kMaxModulus = std::uint64_t{1} << 41;

/// Centered representative of x in [-ceil(q/2), floor(q/2)): x when x < q/2,
/// else x - q.
constexpr std::int64_t centered(Zq x, std::uint64_t q) noexcept {
  return 2 * x < q ? static_cast<std::int64_t>(x)
                   : static_cast<std::int64_t>(x) - static_cast<std::int64_t>(q);
}

/// Reduces any signed value into [0, q).
constexpr Zq reduce(i128 x, std::uint64_t q) noexcept {
  i128 r = x % static_cast<i128>(q);
  if (r < 0) r += q;
  return static_cast<Zq>(r);
}

constexpr Zq reduce(std::int64_t x, std::uint64_t q) noexcept {
  return reduce(static_cast<i128>(x), q);
}

constexpr Zq add_mod(Zq x, Zq y, std::uint64_t q) noexcept {
  const Zq s = x + y;  // q <= 2^41, no overflow
  return s >= q ? s - q : s;
}

constexpr Zq sub_mod(Zq x, Zq y, std::uint64_t q) noexcept {
  return x >= y ? x - y : x + q - y;
}

/// (sum_j a_j * s_j) mod q with exact 128-bit accumulation.
inline Zq dot_mod(std::span<const Zq> a, std::span<const std::int64_t> s,
                  std::uint64_t q) {
  if (a.size() != s.size()) {
    throw DimensionError("dot_mod: vector length mismatch");
  }
  i128 acc = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (s[j] != 0) acc += static_cast<i128>(a[j]) * s[j];
  }
  return reduce(acc, q);
}

}  // namespace sparselwe
