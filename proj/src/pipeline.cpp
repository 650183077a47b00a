#include "sparselwe/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace sparselwe {

namespace {

struct Attempt {
  Secret guess;
  VerificationReport report;
};

std::vector<CoolGuess> cool_guesses(const CoolInstance& base, std::size_t h_lo, std::size_t h_hi,
                                    const RecoveryConfig& config) {
  std::vector<CoolGuess> out;
  if (h_lo == h_hi) {
    CoolInstance inst = base;
    inst.h_cool = h_lo;
    if (config.alphabet == SecretKind::ternary) {
      out.push_back(config.method == RecoveryMethod::linear ? linear_cool_recovery(inst)
                                                            : ternary_stepwise(inst));
    } else if (config.method == RecoveryMethod::dual || config.method == RecoveryMethod::stepwise) {
      out.push_back(stepwise_cool_recovery(inst, config.method == RecoveryMethod::dual,
                                           config.full_rowsum_dual));
    } else {
      out.push_back(recover_cool(inst, config.method));
    }
    return out;
  }
  if (config.method == RecoveryMethod::linear) {
    for (std::size_t h = h_lo; h <= h_hi; ++h) {
      CoolInstance inst = base;
      inst.h_cool = h;
      out.push_back(linear_cool_recovery(inst));
    }
    return out;
  }
  return stepwise_cool_recovery_range(base, h_lo, h_hi, config.method == RecoveryMethod::dual);
}

}  // namespace

RecoveryOutcome full_recover(const SampleSet& samples, const ReductionProfile& profile,
                             const CruelScores& scores, const RecoveryConfig& config,
                             const ProgressCallback& progress) {
  profile.validate();
  scores.validate();
  if (samples.n() != profile.n || samples.q() != profile.q) {
    throw DimensionError("full_recover: samples do not match the profile (n, q)");
  }
  if (scores.c != profile.c) throw DimensionError("full_recover: scores length differs from c");
  if (config.holdout_rows != 0 && config.holdout_rows < kMinVerificationRows) {
    throw ParameterError("full_recover: holdout needs at least 1000 rows (or 0 to disable)");
  }
  const std::size_t c = profile.c;
  const std::size_t cool = profile.n - c;
  const std::size_t work_rows = samples.size() - std::min(samples.size(), config.holdout_rows);
  if (work_rows < std::max(kMinVerificationRows, cool)) {
    throw ParameterError("full_recover: too few rows for regression and verification");
  }
  std::size_t h_lo = config.h.value_or(config.h_lo);
  std::size_t h_hi = config.h.value_or(config.h_hi);
  if (h_lo > h_hi) throw ParameterError("full_recover: h_lo > h_hi");
  if (h_hi > profile.n) throw ParameterError("full_recover: h exceeds n");

  const SampleSet work = samples.slice(0, work_rows);
  const SampleSet holdout = samples.slice(work_rows, samples.size());
  const auto design = CoolDesign::from_samples(work, c);

  RecoveryOutcome outcome;
  outcome.threshold = config.threshold.value_or(default_threshold(profile));

  EnumerationOptions opts;
  opts.k_lo = config.k_lo;
  opts.k_hi = std::min(c, config.k_hi.value_or(h_hi));
  opts.limit = config.limit;
  opts.alphabet = config.alphabet;
  if (opts.k_lo > opts.k_hi) return outcome;
  CandidateEnumerator stream(scores, opts);

  while (auto cand = stream.next()) {
    outcome.attempts = cand->rank;
    const std::size_t k = cand->support.size();
    AttemptRecord record{cand->rank, false, std::numeric_limits<double>::quiet_NaN()};
    if (k > h_hi || h_lo > k + cool) {
      if (progress) progress(record);
      continue;
    }
    const std::size_t cool_lo = h_lo > k ? h_lo - k : 0;
    const std::size_t cool_hi = std::min(h_hi - k, cool);
    const auto cruel = cand->assignment(c);
    const CoolInstance base = subtract_cruel(work, cruel, cool_lo, config.alphabet, design);

    std::optional<Attempt> best;
    for (const auto& cg : cool_guesses(base, cool_lo, cool_hi, config)) {
      std::vector<std::int64_t> coeffs = cruel;
      coeffs.insert(coeffs.end(), cg.coeffs.begin(), cg.coeffs.end());
      Secret guess(config.alphabet, std::move(coeffs));
      auto report = residual_test(work, guess, outcome.threshold);
      if (!best || report.residual_std < best->report.residual_std) {
        best = Attempt{std::move(guess), report};
      }
    }
    if (best) {
      record.residual_std = best->report.residual_std;
      record.accepted = best->report.accepted;
      if (record.accepted && config.holdout_rows != 0) {
        auto confirm = residual_test(holdout, best->guess, outcome.threshold);
        record.accepted = confirm.accepted;
        outcome.holdout_report = confirm;
      }
    }
    if (progress) progress(record);
    if (record.accepted) {
      outcome.secret = best->guess;
      outcome.candidate = *cand;
      outcome.report = best->report;
      return outcome;
    }
  }
  outcome.holdout_report.reset();
  return outcome;
}

WorkBoundError::WorkBoundError(double estimate, double bound)
    : ParameterError([&] {
        std::ostringstream msg;
        msg << "brute force would enumerate about " << estimate << " candidates, above the bound "
            << bound;
        return msg.str();
      }()),
      estimate_(estimate) {}

RecoveryOutcome brute_force_cruel(const SampleSet& samples, const ReductionProfile& profile,
                                  const RecoveryConfig& config, const ProgressCallback& progress) {
  const std::size_t h_hi = config.h.value_or(config.h_hi);
  const std::size_t k_hi = std::min(profile.c, config.k_hi.value_or(h_hi));
  const double estimate = config.k_lo > k_hi
                              ? 0.0
                              : candidate_space_size(profile.c, config.k_lo, k_hi, config.alphabet);
  if (estimate > config.work_bound) throw WorkBoundError(estimate, config.work_bound);
  RecoveryConfig full = config;
  full.k_hi = k_hi;
  full.limit = static_cast<std::size_t>(std::max(1.0, estimate));
  return full_recover(samples, profile, CruelScores::uniform(profile.c), full, progress);
}

void write_progress_header(std::ostream& out) { out << "rank,accepted,residual_std\n"; }

void write_progress_row(std::ostream& out, const AttemptRecord& record) {
  out << record.rank << ',' << (record.accepted ? 1 : 0) << ',';
  if (std::isnan(record.residual_std)) {
    out << "nan";
  } else {
    out << record.residual_std;
  }
  out << '\n';
}

}  // namespace sparselwe
