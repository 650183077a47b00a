#include <cmath>
#include <sstream>

#include "doctest.h"
#include "sparselwe/error.hpp"
#include "sparselwe/pipeline.hpp"
#include "sparselwe/verify.hpp"

using namespace sparselwe;

namespace {

ReductionProfile clean_profile() {
  ReductionProfile p;
  p.n = 64;
  p.q = std::uint64_t{1} << 20;
  p.c = 12;
  p.sigma_cool = 0.05;
  p.sigma_eps = 0.3;
  return p;
}

// Secret with the given cruel support and cool support.
Secret planted(std::size_t n, std::vector<std::size_t> ones) {
  std::vector<std::int64_t> v(n, 0);
  for (auto j : ones) v[j] = 1;
  return Secret(SecretKind::binary, std::move(v));
}

}  // namespace

TEST_CASE("default threshold") {
  CHECK(default_threshold(preset("n256q20")) == doctest::Approx(0.95));
  CHECK(default_threshold(preset("n512q28")) == doctest::Approx(0.85));
  CHECK(default_threshold(std::nullopt) == kFallbackThreshold);
  auto no_eps = preset("n256q20");
  no_eps.sigma_eps.reset();
  CHECK(default_threshold(no_eps) == kFallbackThreshold);
}

TEST_CASE("residual test: planted secret on n256q20 data is accepted") {
  const auto profile = preset("n256q20");
  const auto s = sample_secret(256, 30, SecretKind::binary, SeededRng(1));
  const auto set = synth_samples(profile, s, 5000, SeededRng(2));
  const auto r = residual_test(set, s, default_threshold(profile), &s);
  CHECK(r.residual_std / uniform_std(profile.q) == doctest::Approx(0.90).epsilon(0.03));
  CHECK(r.accepted);
  CHECK(r.exact_match == std::optional<bool>(true));
  CHECK(r.sample_count == 5000);
}

TEST_CASE("residual test: planted secret on unreduced data") {
  const LweParams params(64, 1 << 20, 3.0);
  const auto s = sample_secret(64, 5, SecretKind::ternary, SeededRng(3));
  const auto set = gen_unreduced(params, s, 2000, false, SeededRng(4));
  const auto r = residual_test(set, s, kFallbackThreshold);
  CHECK(r.residual_std == doctest::Approx(3.0).epsilon(0.06));
  CHECK(r.accepted);
  CHECK_FALSE(r.exact_match.has_value());
}

TEST_CASE("residual test: random wrong guess is rejected") {
  const auto profile = preset("n256q20");
  const auto s = sample_secret(256, 30, SecretKind::binary, SeededRng(5));
  const auto set = synth_samples(profile, s, 1000, SeededRng(6));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto wrong = sample_secret(256, 30, SecretKind::binary, SeededRng(100 + seed));
    const auto r = residual_test(set, wrong, default_threshold(profile), &s);
    CHECK(std::abs(r.residual_std / uniform_std(profile.q) - 1.0) < 0.04);
    CHECK_FALSE(r.accepted);
    CHECK(r.exact_match == std::optional<bool>(false));
  }
}

TEST_CASE("residual test preconditions and report JSON") {
  const auto set = gen_unreduced(LweParams(16, 97, 1.0), Secret::zero(16), 999, false, SeededRng(7));
  CHECK_THROWS_AS(residual_test(set, Secret::zero(16), 0.5), ParameterError);
  const auto big = gen_unreduced(LweParams(16, 1 << 16, 1.0), Secret::zero(16), 1000, false, SeededRng(7));
  CHECK_THROWS_AS(residual_test(big, Secret::zero(16), 0.0), ParameterError);
  CHECK_THROWS_AS(residual_test(big, Secret::zero(16), 2.0), ParameterError);
  const auto r = residual_test(big, Secret::zero(16), 0.5, nullptr);
  const auto back = VerificationReport::from_json(r.to_json());
  CHECK(back.accepted == r.accepted);
  CHECK(back.residual_std == r.residual_std);
  CHECK(back.threshold == 0.5);
  CHECK(back.sample_count == 1000);
  CHECK_FALSE(back.exact_match.has_value());
  CHECK_THROWS_AS(VerificationReport::from_json("{}"), IoError);
}

TEST_CASE("full recovery: top-ranked true support needs one attempt") {
  const auto profile = clean_profile();
  const auto s = planted(64, {5, 20, 31, 40, 50, 63});
  const auto set = synth_samples(profile, s, 6000, SeededRng(8));
  CruelScores scores = CruelScores::uniform(12);
  scores.source = ScoreSource::distinguisher;
  for (std::size_t j = 0; j < 12; ++j) scores.scores[j] = j == 5 ? 0.9 : 0.1 + 0.01 * static_cast<double>(j);
  RecoveryConfig cfg;
  cfg.h = 6;
  std::vector<AttemptRecord> log;
  const auto out = full_recover(set, profile, scores, cfg, [&](const AttemptRecord& r) { log.push_back(r); });
  REQUIRE(out.secret.has_value());
  CHECK(*out.secret == s);
  CHECK(out.attempts == 1);
  CHECK(out.candidate->support == std::vector<std::size_t>{5});
  CHECK(out.report->accepted);
  CHECK(out.holdout_report->accepted);
  CHECK(out.holdout_report->sample_count == 1000);
  REQUIRE(log.size() == 1);
  CHECK(log[0].accepted);
}

TEST_CASE("full recovery: uniform scores give the lexicographic rank") {
  const auto profile = clean_profile();
  const auto s = planted(64, {3, 9, 14, 30, 44});
  const auto set = synth_samples(profile, s, 6000, SeededRng(9));
  // Rank of {3, 9} among the 2-subsets of 0..11 in lexicographic order.
  std::size_t rank = 0;
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = i + 1; j < 12; ++j) {
      ++rank;
      if (i == 3 && j == 9) goto found;
    }
  }
found:
  RecoveryConfig cfg;
  cfg.h = 5;
  cfg.k_lo = 2;
  cfg.k_hi = 2;
  std::ostringstream progress;
  write_progress_header(progress);
  const auto out = full_recover(set, profile, CruelScores::uniform(12), cfg,
                                [&](const AttemptRecord& r) { write_progress_row(progress, r); });
  REQUIRE(out.secret.has_value());
  CHECK(*out.secret == s);
  CHECK(out.attempts == rank);
  std::size_t lines = 0;
  for (char ch : progress.str()) lines += ch == '\n';
  CHECK(lines == rank + 1);

  cfg.limit = rank - 1;
  const auto none = full_recover(set, profile, CruelScores::uniform(12), cfg);
  CHECK_FALSE(none.secret.has_value());
  CHECK(none.attempts == rank - 1);
}

TEST_CASE("brute force over the cruel region") {
  const auto profile = clean_profile();
  SUBCASE("k = 2 planted secret is returned") {
    const auto s = planted(64, {1, 10, 17, 33, 60});
    const auto set = synth_samples(profile, s, 6000, SeededRng(10));
    RecoveryConfig cfg;
    cfg.h = 5;
    const auto out = brute_force_cruel(set, profile, cfg);
    REQUIRE(out.secret.has_value());
    CHECK(*out.secret == s);
  }
  SUBCASE("k range that excludes the true k finds nothing") {
    const auto s = planted(64, {1, 10, 17, 33, 60});
    const auto set = synth_samples(profile, s, 6000, SeededRng(11));
    RecoveryConfig cfg;
    cfg.h = 5;
    cfg.k_lo = 3;
    cfg.k_hi = 4;
    const auto out = brute_force_cruel(set, profile, cfg);
    CHECK_FALSE(out.secret.has_value());
    CHECK(out.attempts == static_cast<std::size_t>(candidate_space_size(12, 3, 4, SecretKind::binary)));
  }
  SUBCASE("zero secret via the empty support") {
    const auto s = Secret::zero(64);
    const auto set = synth_samples(profile, s, 6000, SeededRng(12));
    RecoveryConfig cfg;
    cfg.h = 0;
    const auto out = brute_force_cruel(set, profile, cfg);
    REQUIRE(out.secret.has_value());
    CHECK(*out.secret == s);
    CHECK(out.attempts == 1);
    CHECK(out.candidate->support.empty());
  }
  SUBCASE("work bound") {
    auto big = preset("n512q41");
    const auto set = synth_samples(big, Secret::zero(512), 2000, SeededRng(13));
    RecoveryConfig cfg;
    cfg.h = 20;
    try {
      (void)brute_force_cruel(set, big, cfg);
      CHECK(false);
    } catch (const WorkBoundError& e) {
      CHECK(e.estimate() == doctest::Approx(candidate_space_size(46, 0, 20, SecretKind::binary)));
      CHECK(e.estimate() > 1e6);
    }
  }
}

TEST_CASE("full recovery: ternary and unknown h") {
  auto profile = clean_profile();
  SUBCASE("ternary secret") {
    std::vector<std::int64_t> v(64, 0);
    v[2] = -1;
    v[20] = 1;
    v[41] = -1;
    v[55] = 1;
    const Secret s(SecretKind::ternary, v);
    const auto set = synth_samples(profile, s, 6000, SeededRng(14));
    RecoveryConfig cfg;
    cfg.h = 4;
    cfg.alphabet = SecretKind::ternary;
    cfg.k_hi = 1;
    const auto out = brute_force_cruel(set, profile, cfg);
    REQUIRE(out.secret.has_value());
    CHECK(*out.secret == s);
    CHECK(out.candidate->signs == std::vector<int>{-1});
  }
  SUBCASE("h range") {
    const auto s = planted(64, {4, 22, 35, 47});
    const auto set = synth_samples(profile, s, 6000, SeededRng(15));
    RecoveryConfig cfg;
    cfg.h_lo = 2;
    cfg.h_hi = 6;
    cfg.k_hi = 1;
    const auto out = brute_force_cruel(set, profile, cfg);
    REQUIRE(out.secret.has_value());
    CHECK(*out.secret == s);
  }
  SUBCASE("full row-sum dual variant") {
    const auto s = planted(64, {7, 16, 28, 39, 52});
    const auto set = synth_samples(profile, s, 6000, SeededRng(16));
    RecoveryConfig cfg;
    cfg.h = 5;
    cfg.k_hi = 1;
    cfg.full_rowsum_dual = true;
    const auto out = brute_force_cruel(set, profile, cfg);
    REQUIRE(out.secret.has_value());
    CHECK(*out.secret == s);
  }
}

TEST_CASE("full recovery preconditions") {
  const auto profile = clean_profile();
  const auto set = synth_samples(profile, Secret::zero(64), 1500, SeededRng(17));
  RecoveryConfig cfg;
  cfg.h = 0;
  CHECK_THROWS_AS(full_recover(set, profile, CruelScores::uniform(11), cfg), DimensionError);
  CHECK_THROWS_AS(full_recover(set, profile, CruelScores::uniform(12), cfg), ParameterError);
  cfg.holdout_rows = 500;
  CHECK_THROWS_AS(full_recover(set, profile, CruelScores::uniform(12), cfg), ParameterError);
  cfg.holdout_rows = 0;
  CHECK(full_recover(set, profile, CruelScores::uniform(12), cfg).secret.has_value());
}
