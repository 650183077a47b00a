#pragma once

// End-to-end secret recovery: stream cruel candidates, recover the cool bits
// for each, verify the full guess and re-verify accepted guesses on a
// disjoint holdout slice.

#include <functional>
#include <iosfwd>
#include <optional>

#include "sparselwe/candidates.hpp"
#include "sparselwe/error.hpp"
#include "sparselwe/recovery.hpp"
#include "sparselwe/reduction.hpp"
#include "sparselwe/verify.hpp"

namespace sparselwe {

struct RecoveryConfig {
  /// Total Hamming weight; when absent every weight in [h_lo, h_hi] is tried.
  std::optional<std::size_t> h;
  std::size_t h_lo = 0;
  std::size_t h_hi = 0;
  SecretKind alphabet = SecretKind::binary;
  std::size_t k_lo = 0;
  std::optional<std::size_t> k_hi;  // default: min(c, h or h_hi)
  std::size_t limit = kDefaultCandidateLimit;
  RecoveryMethod method = RecoveryMethod::dual;
  std::optional<double> threshold;  // default from the profile
  std::size_t holdout_rows = kMinVerificationRows;  // 0 disables re-verification
  bool full_rowsum_dual = false;
  double work_bound = 1e6;  // brute force: maximum candidate count
};

struct AttemptRecord {
  std::size_t rank = 0;
  bool accepted = false;
  double residual_std = 0.0;  // NaN when the candidate could not be completed
};

struct RecoveryOutcome {
  std::optional<Secret> secret;
  /// Rank of the accepted candidate, or the number of candidates tried.
  std::size_t attempts = 0;
  std::optional<CruelCandidate> candidate;
  std::optional<VerificationReport> report;
  std::optional<VerificationReport> holdout_report;
  double threshold = 0.0;
};

using ProgressCallback = std::function<void(const AttemptRecord&)>;

RecoveryOutcome full_recover(const SampleSet& samples, const ReductionProfile& profile,
                             const CruelScores& scores, const RecoveryConfig& config,
                             const ProgressCallback& progress = {});

/// Raised when an exhaustive search would exceed the configured work bound.
class WorkBoundError : public ParameterError {
 public:
  WorkBoundError(double estimate, double bound);
  [[nodiscard]] double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

/// Exhaustive cruel search: uniform scores over the whole [k_lo, k_hi] space.
RecoveryOutcome brute_force_cruel(const SampleSet& samples, const ReductionProfile& profile,
                                  const RecoveryConfig& config,
                                  const ProgressCallback& progress = {});

/// CSV: rank,accepted,residual_std
void write_progress_header(std::ostream& out);
void write_progress_row(std::ostream& out, const AttemptRecord& record);

}  // namespace sparselwe
