#pragma once

// Closed-form and statistical analyses: the hypergeometric law of the number
// of cruel nonzeros, the expected recovery rate E(h), power-law fits of
// attempts against data with bootstrap intervals, and the penalty-loss
// formulas of the angular regression head.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sparselwe/rng.hpp"

namespace sparselwe {

/// log C(n, k) via lgamma.
double log_binomial(std::size_t n, std::size_t k);

/// P(k of the h nonzeros fall in the first c of n coordinates)
///   = C(c,k) C(n-c,h-k) / C(n,h).
/// Throws ParameterError for c > n, h > n or k > min(c, h). Returns 0 when
/// k < h - (n - c).
double hypergeom_pmf(std::size_t n, std::size_t c, std::size_t h, std::size_t k);

/// r(h, k): recovery rate for secrets with k cruel nonzeros.
class RecoveryRateTable {
 public:
  /// r(h, k) = 1{k <= K} for every h.
  static RecoveryRateTable step(std::size_t K);
  /// CSV with header h,k,rate.
  static RecoveryRateTable from_csv(std::istream& in);

  void set(std::size_t h, std::size_t k, double rate);
  /// Throws ParameterError when (h, k) is missing.
  [[nodiscard]] double rate(std::size_t h, std::size_t k) const;
  [[nodiscard]] bool has(std::size_t h, std::size_t k) const;
  [[nodiscard]] std::optional<std::size_t> step_k() const noexcept { return step_; }

  /// Writes the h,k,rate CSV; step tables are expanded over k in [0, k_max] for h.
  void write_csv(std::ostream& out, std::size_t h, std::size_t k_max) const;
  void write_csv(std::ostream& out) const;

 private:
  std::optional<std::size_t> step_;
  std::map<std::pair<std::size_t, std::size_t>, double> rates_;
};

/// E(h) = sum_k p(h, k) r(h, k).
double expected_rate(std::size_t n, std::size_t c, std::size_t h, const RecoveryRateTable& rates);

struct ScalingPoint {
  double data = 0.0;      // D
  double attempts = 0.0;  // A
};

/// ln A = C - alpha ln D by ordinary least squares.
struct ScalingFit {
  std::optional<double> repetition;
  double intercept = 0.0;  // C
  double alpha = 0.0;
  std::optional<std::pair<double, double>> ci;
  std::size_t points = 0;

  [[nodiscard]] std::string to_json() const;
  static ScalingFit from_json(std::string_view text);
};

/// Needs at least two points with distinct D; all D, A > 0.
ScalingFit fit_scaling(const std::vector<ScalingPoint>& points);

/// Percentile interval for alpha from a residual bootstrap on the log-log
/// fit. Residuals are leverage-adjusted (r_i / sqrt(1 - h_ii), then centered)
/// so small designs are not systematically too narrow. Needs at least five
/// points.
std::pair<double, double> bootstrap_ci(const std::vector<ScalingPoint>& points, SeededRng rng,
                                       std::size_t resamples = 1000, double level = 0.95);

/// CSV with header D,A (extra columns ignored).
std::vector<ScalingPoint> read_scaling_csv(std::istream& in);

struct PenaltyParams {
  double alpha = 0.0;
  double beta = 0.0;
};

/// L(r) = 1 + (1 + alpha) r^2 + beta / r^2, the expected loss of a model that
/// predicts uniformly random angles at radius r.
double clueless_loss(double r, const PenaltyParams& params);
/// argmin_r L(r) = (beta / (1 + alpha))^(1/4).
double optimal_radius(const PenaltyParams& params);
/// L_eps(r) = 1 + r^2 - 2 r sin(eps)/eps, with sin(eps)/eps = 1 at eps = 0.
double learned_loss(double r, double eps);

}  // namespace sparselwe
