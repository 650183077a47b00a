#pragma once

// Cool-bit recovery once the cruel bits are fixed: least-squares baseline,
// stepwise backward elimination and its dual variant.
//
// Every method is a task that asks a CrossProductSource for A^T y, where y is
// a centered target of the form  b_sign * b + sum_j w_j a_j  (mod q). The Gram
// matrix A^T A is computed once per source and shrunk as columns are
// eliminated. Cross-products are recomputed only when the target changes,
// because the reduction mod q makes them nonlinear in the target.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sparselwe/lwe.hpp"

namespace sparselwe {

enum class RecoveryMethod { linear, stepwise, dual, ternary };
std::string_view to_string(RecoveryMethod method);
RecoveryMethod parse_recovery_method(std::string_view text);

enum class StepMode { primal, dual };

struct EliminationStep {
  std::size_t index = 0;  // cool-region column
  StepMode mode = StepMode::primal;
  double normalized_coefficient = 0.0;
};

struct CoolGuess {
  std::vector<std::int64_t> coeffs;
  RecoveryMethod method = RecoveryMethod::linear;
  std::vector<EliminationStep> steps;

  [[nodiscard]] std::size_t weight() const;
};

/// CSV: step,mode,eliminated_index,normalized_coefficient
void write_trace_csv(std::ostream& out, const CoolGuess& guess);

/// Regression target b_sign * b + sum_j weights[j] * a_j, reduced mod q and
/// centered. Empty weights mean all zero.
struct TargetSpec {
  int b_sign = 1;
  std::vector<int> weights;
  friend bool operator==(const TargetSpec&, const TargetSpec&) = default;
};

struct TargetRequest {
  std::size_t instance = 0;
  TargetSpec target;
};

/// Source of Gram matrices and target cross-products for a fixed cool design
/// and one or more b vectors ("instances").
class CrossProductSource {
 public:
  virtual ~CrossProductSource() = default;
  [[nodiscard]] virtual std::size_t columns() const = 0;
  [[nodiscard]] virtual std::size_t rows() const = 0;
  [[nodiscard]] virtual std::uint64_t modulus() const = 0;
  [[nodiscard]] virtual std::size_t instances() const = 0;
  /// A^T A over the centered cool columns.
  virtual const Eigen::MatrixXd& gram() = 0;
  /// One column of A^T y per request.
  virtual Eigen::MatrixXd cross_products(std::span<const TargetRequest> requests) = 0;
};

/// Centered cool block of a sample set with its Gram matrix. Independent of
/// the cruel guess, so one design serves every candidate.
class CoolDesign {
 public:
  CoolDesign(Eigen::MatrixXd centered_cool, std::uint64_t q);
  static std::shared_ptr<const CoolDesign> from_samples(const SampleSet& samples, std::size_t c);

  [[nodiscard]] const Eigen::MatrixXd& a() const noexcept { return a_; }
  [[nodiscard]] const Eigen::MatrixXd& gram() const noexcept { return gram_; }
  [[nodiscard]] std::uint64_t q() const noexcept { return q_; }
  [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(a_.rows()); }
  [[nodiscard]] std::size_t columns() const noexcept { return static_cast<std::size_t>(a_.cols()); }

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd gram_;
  std::uint64_t q_;
};

/// Cool-region regression problem for one cruel guess.
struct CoolInstance {
  std::shared_ptr<const CoolDesign> design;
  std::vector<Zq> b_cool;
  std::size_t h_cool = 0;
  SecretKind alphabet = SecretKind::binary;

  [[nodiscard]] std::size_t columns() const { return design->columns(); }
  [[nodiscard]] std::uint64_t q() const { return design->q(); }
};

/// b_cool = b - a_cruel . g_cruel mod q, with the first c = len(cruel_guess)
/// columns as the cruel region. Pass a design built for the same c to reuse it.
CoolInstance subtract_cruel(const SampleSet& samples, std::span<const std::int64_t> cruel_guess,
                            std::size_t h_cool, SecretKind alphabet,
                            std::shared_ptr<const CoolDesign> design = nullptr);

/// In-memory source over a design and any number of b vectors.
class DenseCoolSource final : public CrossProductSource {
 public:
  explicit DenseCoolSource(std::shared_ptr<const CoolDesign> design);
  DenseCoolSource(std::shared_ptr<const CoolDesign> design, std::vector<Zq> b);

  std::size_t add_instance(std::vector<Zq> b);

  [[nodiscard]] std::size_t columns() const override { return design_->columns(); }
  [[nodiscard]] std::size_t rows() const override { return design_->rows(); }
  [[nodiscard]] std::uint64_t modulus() const override { return design_->q(); }
  [[nodiscard]] std::size_t instances() const override { return bs_.size(); }
  const Eigen::MatrixXd& gram() override { return design_->gram(); }
  Eigen::MatrixXd cross_products(std::span<const TargetRequest> requests) override;

 private:
  std::shared_ptr<const CoolDesign> design_;
  std::vector<std::vector<Zq>> bs_;
};

/// Least-squares solve through the Cholesky factor of a Gram block, retrying
/// with ridge jitter 1e-9 * trace when the factorization fails.
Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs);

/// One recovery method driven by cross-products.
class CoolRecoveryTask {
 public:
  virtual ~CoolRecoveryTask() = default;
  [[nodiscard]] virtual bool done() const = 0;
  /// Target whose cross-products the next step needs.
  [[nodiscard]] virtual const TargetSpec& target() const = 0;
  /// True when cached cross-products still match target().
  [[nodiscard]] virtual bool ready() const = 0;
  /// Full-length A^T y for target().
  virtual void supply(const Eigen::VectorXd& cross) = 0;
  virtual void step() = 0;
  [[nodiscard]] virtual CoolGuess guess() const = 0;
};

/// Least squares on all cool columns; keeps the h_cool largest coefficients
/// (binary) or largest magnitudes with their signs (ternary).
class LinearRegressor final : public CoolRecoveryTask {
 public:
  LinearRegressor(const Eigen::MatrixXd& gram, std::size_t h_cool, SecretKind alphabet);

  [[nodiscard]] bool done() const override { return result_.has_value(); }
  [[nodiscard]] const TargetSpec& target() const override { return target_; }
  [[nodiscard]] bool ready() const override { return cross_.has_value(); }
  void supply(const Eigen::VectorXd& cross) override { cross_ = cross; }
  void step() override;
  [[nodiscard]] CoolGuess guess() const override;

 private:
  Eigen::MatrixXd gram_;
  std::size_t h_cool_;
  SecretKind alphabet_;
  TargetSpec target_;
  std::optional<Eigen::VectorXd> cross_;
  std::optional<CoolGuess> result_;
};

struct StepwiseOptions {
  bool use_dual = true;
  /// Dual target from the row sum over all cool columns rather than the
  /// active ones.
  bool full_rowsum_dual = false;
  /// Ternary alphabet: primal-only elimination, survivors take the sign of
  /// their coefficient.
  bool ternary = false;
  /// Keep the least-squares coefficients (before normalization), the active
  /// set and the target of every step.
  bool record_coefficients = false;
  /// Also emit a guess each time the active set size lies in this range
  /// (non-dual only); used when h is not known exactly.
  std::optional<std::pair<std::size_t, std::size_t>> stop_range;
};

/// Backward elimination over the cool columns.
///
/// Each step regresses the current target on the active columns, normalizes
/// the coefficients by their largest magnitude and eliminates the column with
/// the smallest one. In primal mode the column is set to 0; in dual mode (more
/// ones than zeros remain) the target is the flipped residual and the column
/// is set to 1, after which its contribution is removed from b. Without the
/// dual flag the loop stops when h_cool columns survive, and they are set to 1.
class StepwiseEliminator final : public CoolRecoveryTask {
 public:
  StepwiseEliminator(const Eigen::MatrixXd& gram, std::size_t h_cool, StepwiseOptions options);

  [[nodiscard]] bool done() const override;
  [[nodiscard]] const TargetSpec& target() const override { return target_; }
  [[nodiscard]] bool ready() const override;
  void supply(const Eigen::VectorXd& cross) override;
  void step() override;
  [[nodiscard]] CoolGuess guess() const override;

  /// Guesses taken at each stop_range size, largest active set first.
  [[nodiscard]] const std::vector<CoolGuess>& range_guesses() const { return range_guesses_; }
  /// Raw coefficients per step (record_coefficients only), aligned with
  /// active_history()[step].
  [[nodiscard]] const std::vector<Eigen::VectorXd>& coefficient_history() const {
    return coef_history_;
  }
  [[nodiscard]] const std::vector<std::vector<std::size_t>>& active_history() const {
    return active_history_;
  }
  [[nodiscard]] const std::vector<TargetSpec>& target_history() const { return target_history_; }
  [[nodiscard]] std::span<const std::size_t> active() const { return active_; }

 private:
  [[nodiscard]] bool dual_now() const;
  [[nodiscard]] bool looping() const;
  void refresh_target();
  void maybe_snapshot_range();
  void finish_if_possible();
  void delete_active(std::size_t local);
  Eigen::VectorXd solve_active() const;
  CoolGuess snapshot(bool final_solve) const;

  std::size_t columns_;
  std::size_t h_cool_;
  StepwiseOptions options_;
  Eigen::MatrixXd gram_active_;  // Gram restricted to active_, compacted on deletion
  std::vector<std::size_t> active_;
  std::vector<std::int64_t> guess_;
  std::vector<bool> dual_one_;
  std::size_t ones_;
  std::size_t zeros_;
  TargetSpec target_;
  std::optional<TargetSpec> cross_target_;
  Eigen::VectorXd cross_;
  std::vector<EliminationStep> steps_;
  std::vector<CoolGuess> range_guesses_;
  std::vector<Eigen::VectorXd> coef_history_;
  std::vector<std::vector<std::size_t>> active_history_;
  std::vector<TargetSpec> target_history_;
  std::optional<std::vector<std::int64_t>> final_;
};

struct LockstepTask {
  std::size_t instance = 0;
  CoolRecoveryTask* task = nullptr;
};

/// Drives tasks to completion, batching every pending cross-product request
/// into one source call per round. Identical requests are computed once.
/// Returns the number of source calls.
std::size_t run_lockstep(CrossProductSource& source, std::span<const LockstepTask> tasks,
                         const std::function<void(std::size_t round, std::size_t pending)>&
                             on_round = {});

CoolGuess linear_cool_recovery(const CoolInstance& inst);
CoolGuess stepwise_cool_recovery(const CoolInstance& inst, bool use_dual,
                                 bool full_rowsum_dual = false);
CoolGuess ternary_stepwise(const CoolInstance& inst);
/// Unknown h: one guess per cool weight in [h_lo, h_hi].
std::vector<CoolGuess> stepwise_cool_recovery_range(const CoolInstance& inst, std::size_t h_lo,
                                                    std::size_t h_hi, bool use_dual);
CoolGuess recover_cool(const CoolInstance& inst, RecoveryMethod method);

}  // namespace sparselwe
