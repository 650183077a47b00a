#pragma once

// Reduction statistics and synthetic reduced data.
//
// A reduced sample set is summarised by the size c of its unreduced (cruel)
// prefix, the spread of the remaining cool columns and the amplified error,
// both expressed as fractions of the uniform std q/sqrt(12). Synthetic data
// draws the cruel prefix uniformly and the cool columns from a centered
// Gaussian. Since real reduced cruel columns are somewhat below the uniform
// spread, synthetic data is a little less reduced than lattice-reduced data.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparselwe/lwe.hpp"

namespace sparselwe {

/// std of the uniform distribution on Z_q, q/sqrt(12).
inline double uniform_std(std::uint64_t q) { return static_cast<double>(q) / std::sqrt(12.0); }

struct ReductionProfile {
  std::size_t n = 0;
  std::uint64_t q = 0;
  std::size_t c = 0;                  // leading unreduced columns
  double sigma_cool = 0.0;            // fraction of q/sqrt(12)
  std::optional<double> sigma_eps;    // centered error std, fraction of q/sqrt(12)
  std::optional<double> rho;          // mean |off-diagonal correlation|

  /// Throws ParameterError unless c <= n, 0 <= sigma_cool < 0.5 and
  /// 0 < sigma_eps < 1.
  void validate() const;

  [[nodiscard]] double cool_std() const { return sigma_cool * uniform_std(q); }
  /// Width of the Gaussian error before reduction mod q, chosen so that its
  /// centered representative has std sigma_eps * q/sqrt(12). Throws when
  /// sigma_eps is absent.
  [[nodiscard]] double error_std() const;
  [[nodiscard]] std::size_t cool_columns() const { return n - c; }

  [[nodiscard]] std::string to_json() const;
  static ReductionProfile from_json(std::string_view text);
};

/// Std of a Gaussian of width s (fraction of q/sqrt(12)) once wrapped into
/// [-q/2, q/2), as a fraction of q/sqrt(12):
///   1 + (12/pi^2) sum_k (-1)^k exp(-pi^2 k^2 s^2 / 6) / k^2   (variance).
double wrapped_std_fraction(double s);
/// Inverse of wrapped_std_fraction on [0, 1).
double unwrapped_std_fraction(double wrapped);

/// Reduction statistics of the four standard settings.
/// Names: n256q12, n256q20, n512q28, n512q41.
ReductionProfile preset(std::string_view name);
std::vector<std::string> preset_names();

/// Per-column statistics of a set; sigma_eps is left absent.
ReductionProfile measure_profile(const SampleSet& samples);

/// std of centered(b - a.s) as a fraction of q/sqrt(12). Diagnostic path for
/// data whose secret is known.
double estimate_sigma_eps(const SampleSet& samples, const Secret& secret);

/// Row-addressable generator of synthetic reduced vectors a.
///
/// Row i draws its cruel prefix from a_rng.substream("cruel").substream(i) and
/// its cool suffix from a_rng.substream("cool").substream(i), so cool columns
/// can be regenerated without the prefix.
class SyntheticRows {
 public:
  SyntheticRows(const ReductionProfile& profile, const SeededRng& a_rng);

  [[nodiscard]] const ReductionProfile& profile() const noexcept { return profile_; }

  /// Full row over Z_q.
  void row(std::size_t i, std::span<Zq> out) const;
  /// Cool suffix only, as centered values.
  template <typename T>
  void cool_row(std::size_t i, std::span<T> out) const {
    SeededRng rng = cool_rng_.substream(i);
    fill_discrete_gaussian(cool_std_, rng, out);
  }

 private:
  ReductionProfile profile_;
  double cool_std_;
  SeededRng cruel_rng_;
  SeededRng cool_rng_;
};

/// Errors are drawn in blocks of this many rows, one substream per block.
inline constexpr std::size_t kErrorBlock = 1024;

/// Reduction-modelled error of row i for a given noise stream.
std::int64_t synthetic_error(const ReductionProfile& profile, const SeededRng& eps_rng,
                             std::size_t row);
/// Same with the pre-wrap width (profile.error_std()) already computed.
std::int64_t synthetic_error(double error_std, const SeededRng& eps_rng, std::size_t row);
/// Errors of rows start, start+1, ... into out; same values as synthetic_error.
void synthetic_errors(double error_std, const SeededRng& eps_rng, std::size_t start,
                      std::span<std::int64_t> out);

/// Synthetic reduced set: cruel coordinates uniform on [0, q), cool coordinates
/// centered Gaussian of std sigma_cool*q/sqrt(12) stored mod q, and
/// b = a.s + e mod q where centered(e) has std sigma_eps*q/sqrt(12).
SampleSet synth_samples(const ReductionProfile& profile, const Secret& secret, std::size_t count,
                        const SeededRng& rng);
/// Same, with explicit streams for a and for the error (shared-A experiments).
SampleSet synth_samples(const ReductionProfile& profile, const Secret& secret, std::size_t count,
                        const SeededRng& a_rng, const SeededRng& eps_rng);

struct DataBudget {
  std::size_t distinct = 0;
  std::size_t repetition = 1;
  [[nodiscard]] std::size_t total() const noexcept { return distinct * repetition; }
};

/// Chooses budget.distinct of the available rows and emits each exactly
/// budget.repetition times in a globally shuffled order.
std::vector<std::size_t> assemble_budget(std::size_t available_rows, const DataBudget& budget,
                                         SeededRng rng);
inline std::vector<std::size_t> assemble_budget(const SampleSet& samples,
                                                const DataBudget& budget, SeededRng rng) {
  return assemble_budget(samples.size(), budget, rng);
}

}  // namespace sparselwe
