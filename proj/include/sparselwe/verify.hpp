#pragma once

// Statistical acceptance of full secret guesses.
//
// For a correct guess, centered(b - a.g) is the (amplified) error, whose std
// is sigma_eps * q/sqrt(12); for a wrong guess it is close to uniform, q/sqrt(12).
// A guess is accepted when the residual std falls below threshold * q/sqrt(12).
// The default threshold sits midway between the profile's sigma_eps and 1,
// and falls back to 0.67 when sigma_eps is unknown.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "sparselwe/lwe.hpp"
#include "sparselwe/reduction.hpp"

namespace sparselwe {

inline constexpr double kFallbackThreshold = 0.67;
inline constexpr std::size_t kMinVerificationRows = 1000;

struct VerificationReport {
  bool accepted = false;
  double residual_std = 0.0;   // absolute, in units of Z_q
  double threshold = 0.0;      // fraction of q/sqrt(12)
  std::size_t sample_count = 0;
  std::optional<bool> exact_match;

  [[nodiscard]] std::string to_json() const;
  static VerificationReport from_json(std::string_view text);
};

double default_threshold(const std::optional<ReductionProfile>& profile);

/// Throws ParameterError with fewer than 1000 rows or a threshold outside (0, 2).
VerificationReport residual_test(const SampleSet& samples, const Secret& guess, double threshold,
                                 const Secret* truth = nullptr);

}  // namespace sparselwe
