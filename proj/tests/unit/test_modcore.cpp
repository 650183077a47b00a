#include <boost/multiprecision/cpp_int.hpp>
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "sparselwe/error.hpp"
#include "sparselwe/modular.hpp"
#include "sparselwe/rng.hpp"

using namespace sparselwe;

TEST_CASE("centered: examples") {
  CHECK(centered(0, 12) == 0);
  CHECK(centered(7, 12) == -5);
  CHECK(centered(5, 12) == 5);
  CHECK(centered(6, 12) == -6);
  CHECK(centered(6, 13) == 6);
  CHECK(centered(7, 13) == -6);
}

TEST_CASE("centered: lifts back to x for every residue") {
  for (std::uint64_t q : {2ULL, 3ULL, 12ULL, 13ULL, 4096ULL}) {
    for (std::uint64_t x = 0; x < q; ++x) {
      const std::int64_t c = centered(x, q);
      const std::int64_t wrap = 2 * x >= q ? static_cast<std::int64_t>(q) : 0;
      CHECK(c + wrap == static_cast<std::int64_t>(x));
      CHECK(reduce(c, q) == x);
      CHECK(2 * c >= -static_cast<std::int64_t>(q));
      CHECK(2 * c < static_cast<std::int64_t>(q));
    }
  }
  const std::uint64_t big = kMaxModulus;
  CHECK(centered(big - 1, big) == -1);
  CHECK(centered(big / 2 - 1, big) == static_cast<std::int64_t>(big / 2 - 1));
}

TEST_CASE("dot_mod: examples") {
  const std::vector<Zq> a{3, 5};
  CHECK(dot_mod(a, std::vector<std::int64_t>{1, 1}, 7) == 1);
  CHECK(dot_mod(a, std::vector<std::int64_t>{0, 0}, 7) == 0);
  CHECK(dot_mod(std::vector<Zq>{10, 10}, std::vector<std::int64_t>{1, -1}, 12) == 0);
  CHECK(dot_mod(std::vector<Zq>{1, 2}, std::vector<std::int64_t>{0, -1}, 7) == 5);
}

TEST_CASE("dot_mod: length mismatch") {
  CHECK_THROWS_AS(dot_mod(std::vector<Zq>{1, 2}, std::vector<std::int64_t>{1}, 7), DimensionError);
}

TEST_CASE("dot_mod matches arbitrary-precision reference") {
  using boost::multiprecision::cpp_int;
  struct Case {
    std::size_t n;
    int log2q;
  };
  SeededRng rng(2024);
  for (const Case cs : {Case{256, 12}, Case{256, 20}, Case{512, 28}, Case{512, 41}, Case{4096, 41}}) {
    const std::uint64_t q = std::uint64_t{1} << cs.log2q;
    const int reps = cs.n == 4096 ? 50 : 1000;
    for (int rep = 0; rep < reps; ++rep) {
      std::vector<Zq> a(cs.n);
      std::vector<std::int64_t> s(cs.n);
      for (auto& v : a) v = rng.uniform_below(q);
      // Dense worst case on some reps: every coordinate q-1 with s = 1.
      const bool extreme = rep % 100 == 0;
      for (std::size_t j = 0; j < cs.n; ++j) {
        if (extreme) {
          a[j] = q - 1;
          s[j] = 1;
        } else {
          s[j] = static_cast<std::int64_t>(rng.uniform_below(3)) - 1;
        }
      }
      cpp_int acc = 0;
      for (std::size_t j = 0; j < cs.n; ++j) acc += cpp_int(a[j]) * s[j];
      cpp_int r = acc % q;
      if (r < 0) r += q;
      REQUIRE(dot_mod(a, s, q) == static_cast<std::uint64_t>(r));
    }
  }
}

TEST_CASE("rng: identical (seed, stream) reproduce identical streams") {
  SeededRng x(7, 3);
  SeededRng y(7, 3);
  for (int i = 0; i < 1000; ++i) REQUIRE(x() == y());
  SeededRng z(7, 4);
  SeededRng w(8, 3);
  SeededRng x2(7, 3);
  int same_z = 0;
  int same_w = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto v = x2();
    same_z += v == z();
    same_w += v == w();
  }
  CHECK(same_z == 0);
  CHECK(same_w == 0);
}

TEST_CASE("rng: substreams do not depend on consumption") {
  SeededRng a(11);
  const auto before = a.substream(5);
  for (int i = 0; i < 17; ++i) a();
  auto after = a.substream(5);
  auto b = before;
  for (int i = 0; i < 100; ++i) REQUIRE(b() == after());
  CHECK(a.substream("eps").stream_id() == a.substream("eps").stream_id());
  CHECK(a.substream("eps").stream_id() != a.substream("a").stream_id());
  CHECK(a.substream(0).stream_id() != a.stream_id());
}

TEST_CASE("rng: distinct substreams look independent") {
  // Correlation of uniform01 draws across sibling streams.
  SeededRng root(99);
  const int m = 200000;
  auto s1 = root.substream(1);
  auto s2 = root.substream(2);
  double sxy = 0.0;
  for (int i = 0; i < m; ++i) sxy += (s1.uniform01() - 0.5) * (s2.uniform01() - 0.5);
  const double corr = sxy / m / (1.0 / 12.0);
  CHECK(std::abs(corr) < 4.0 / std::sqrt(m));
}

TEST_CASE("rng: uniform_below is in range and unbiased") {
  SeededRng rng(5);
  std::vector<int> counts(7, 0);
  const int m = 700000;
  for (int i = 0; i < m; ++i) {
    const auto v = rng.uniform_below(7);
    REQUIRE(v < 7);
    ++counts[v];
  }
  const double expect = m / 7.0;
  const double sd = std::sqrt(m * (1.0 / 7.0) * (6.0 / 7.0));
  for (int c : counts) CHECK(std::abs(c - expect) < 5 * sd);
  CHECK(rng.uniform_below(1) == 0);
}

TEST_CASE("discrete Gaussian: sigma 0 returns 0") {
  SeededRng rng(1);
  for (int i = 0; i < 10; ++i) CHECK(sample_discrete_gaussian(0.0, rng) == 0);
  CHECK(rng.position() == 0);
}

TEST_CASE("discrete Gaussian: negative sigma rejected") {
  SeededRng rng(1);
  CHECK_THROWS_AS(sample_discrete_gaussian(-1.0, rng), ParameterError);
}

TEST_CASE("discrete Gaussian: sigma=3 moments and support over 10^6 draws") {
  SeededRng rng(31337);
  const int m = 1000000;
  double sum = 0.0;
  double sumsq = 0.0;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  for (int i = 0; i < m; ++i) {
    const auto v = sample_discrete_gaussian(3.0, rng);
    sum += static_cast<double>(v);
    sumsq += static_cast<double>(v * v);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double mean = sum / m;
  const double sd = std::sqrt(sumsq / m - mean * mean);
  CHECK(sd >= 2.94);
  CHECK(sd <= 3.06);
  CHECK(std::abs(mean) < 4 * 3.0 / std::sqrt(m));
  CHECK(lo >= -30);
  CHECK(hi <= 30);
}

TEST_CASE("discrete Gaussian: std within 2% across widths") {
  for (double sigma : {1.0, 3.2, 50.0, 1e5}) {
    SeededRng rng(static_cast<std::uint64_t>(sigma * 10));
    const int m = 200000;
    double sumsq = 0.0;
    for (int i = 0; i < m; ++i) {
      const double v = static_cast<double>(sample_discrete_gaussian(sigma, rng));
      sumsq += v * v;
    }
    const double sd = std::sqrt(sumsq / m);
    CHECK(std::abs(sd / sigma - 1.0) < 0.02);
  }
}

TEST_CASE("discrete Gaussian: bulk fills are prefix-consistent") {
  std::vector<std::int64_t> all(1000);
  SeededRng base(77);
  SeededRng r0 = base;
  fill_discrete_gaussian(40.0, r0, all);
  for (std::size_t len : {1u, 2u, 17u, 31u, 255u, 256u, 257u, 999u}) {
    std::vector<std::int64_t> part(len);
    SeededRng r = base;
    fill_discrete_gaussian(40.0, r, part);
    CHECK(std::equal(part.begin(), part.end(), all.begin()));
  }
  // An even-length fill leaves the stream where a longer fill would continue.
  std::vector<double> a(300), b(300);
  SeededRng r1(5);
  SeededRng r2(5);
  fill_discrete_gaussian(7.0, r1, a);
  fill_discrete_gaussian(7.0, r2, std::span<double>(b.data(), 100));
  fill_discrete_gaussian(7.0, r2, std::span<double>(b.data() + 100, 200));
  CHECK(a == b);
  CHECK(r1.position() == r2.position());
}

TEST_CASE("discrete Gaussian: tail masses and kurtosis of bulk draws") {
  const double sigma = 1e5;
  std::vector<double> v(1000000);
  SeededRng rng(2024);
  fill_discrete_gaussian(sigma, rng, v);
  double m2 = 0.0;
  double m4 = 0.0;
  std::size_t beyond2 = 0;
  std::size_t beyond3 = 0;
  for (double x : v) {
    const double z = x / sigma;
    m2 += z * z;
    m4 += z * z * z * z;
    beyond2 += std::abs(z) > 2.0;
    beyond3 += std::abs(z) > 3.0;
  }
  const double m = static_cast<double>(v.size());
  m2 /= m;
  m4 /= m;
  CHECK(m4 / (m2 * m2) == doctest::Approx(3.0).epsilon(0.02));
  // Two-sided normal tails 0.0455 and 0.0027, 5 binomial sd.
  CHECK(std::abs(static_cast<double>(beyond2) / m - 0.0455) < 5 * std::sqrt(0.0455 / m));
  CHECK(std::abs(static_cast<double>(beyond3) / m - 0.0027) < 5 * std::sqrt(0.0027 / m));
}
