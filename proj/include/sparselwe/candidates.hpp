#pragma once

// Cruel-bit candidates, best first.
//
// Scores (likelihood that each cruel coordinate is nonzero) are min-max
// normalized, clamped to [1e-6, 1 - 1e-6] and mapped to log-odds. A candidate
// support is scored by the sum of its log-odds; candidates are emitted in
// nonincreasing score order, ties broken by lexicographic support order.
// Log-odds are held in fixed point so that sums compare exactly.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "sparselwe/lwe.hpp"

namespace sparselwe {

inline constexpr std::size_t kDefaultCandidateLimit = 15000;
inline constexpr double kLikelihoodClamp = 1e-6;

enum class ScoreSource { distinguisher, uniform };
std::string_view to_string(ScoreSource source);

struct CruelScores {
  std::size_t c = 0;
  std::vector<double> scores;
  ScoreSource source = ScoreSource::distinguisher;
  std::string meta = "{}";  // free-form JSON object

  static CruelScores uniform(std::size_t c);
  /// Throws ParameterError unless len(scores) == c and scores are finite, >= 0.
  void validate() const;
};

/// Scores file: one JSON object per line, {"c": int, "scores": [...], "meta": {...}}.
/// The source is taken from meta.source when present.
void write_scores_json(std::ostream& out, const CruelScores& scores);
CruelScores parse_scores_json(std::string_view line);
std::vector<CruelScores> read_scores(std::istream& in);

/// Log-odds after min-max normalization and clamping. Constant scores map to 0.
std::vector<double> candidate_logits(const CruelScores& scores);

struct CruelCandidate {
  std::vector<std::size_t> support;  // ascending cruel indices
  std::vector<int> signs;            // +1 / -1 per support element; all +1 for binary
  std::size_t rank = 0;              // 1-based position in the stream
  double score = 0.0;                // sum of log-odds

  /// Length-c assignment of the cruel region.
  [[nodiscard]] std::vector<std::int64_t> assignment(std::size_t c) const;
};

struct EnumerationOptions {
  std::size_t k_lo = 0;
  std::size_t k_hi = 0;
  std::size_t limit = kDefaultCandidateLimit;
  SecretKind alphabet = SecretKind::binary;
};

/// Number of candidates in the full space: sum over k of C(c, k) (times 2^k
/// for ternary). Returned as a double since it overflows quickly.
double candidate_space_size(std::size_t c, std::size_t k_lo, std::size_t k_hi, SecretKind alphabet);

/// Best-first stream over all support sizes in [k_lo, k_hi].
///
/// Items are sorted by log-odds (ties by index). A state is a vector of
/// increasing positions into that order; the parent of a state decrements its
/// first position that is not at its minimum, which gives every state a
/// unique parent with a score at least as high. The frontier is a heap keyed
/// on (score desc, support asc).
class CandidateEnumerator {
 public:
  CandidateEnumerator(const CruelScores& scores, EnumerationOptions options);

  /// Next candidate, or nothing when the limit or the space is exhausted.
  std::optional<CruelCandidate> next();
  [[nodiscard]] std::size_t emitted() const noexcept { return emitted_; }

 private:
  struct State {
    std::int64_t score;
    std::vector<std::size_t> positions;
    std::vector<std::size_t> support;
  };
  struct After {
    bool operator()(const State& x, const State& y) const;
  };

  State make_state(std::vector<std::size_t> positions) const;
  void push_children(const State& s);

  EnumerationOptions options_;
  std::size_t c_;
  std::vector<std::size_t> order_;       // item indices by logit desc
  std::vector<std::int64_t> fixed_;      // fixed-point logit per sorted position
  std::priority_queue<State, std::vector<State>, After> heap_;
  std::optional<State> current_;         // ternary: support whose signs are being emitted
  std::uint64_t sign_pattern_ = 0;
  std::size_t emitted_ = 0;
};

std::vector<CruelCandidate> enumerate_candidates(const CruelScores& scores,
                                                 const EnumerationOptions& options);

/// CSV: rank,support,signs,score with support and signs space-separated.
void write_candidates_header(std::ostream& out);
void write_candidate_row(std::ostream& out, const CruelCandidate& cand);

}  // namespace sparselwe
