#pragma once

// Streaming cross-product source over synthetic reduced data.
//
// Rows are regenerated on demand from counter-based substreams, so a sweep
// over millions of rows needs O(cool^2) memory. All instances share the same
// a vectors (the SyntheticRows stream) and differ in secret and error stream.
// With the cruel bits known, the cool-region target is
//   b_cool = a_cool . s_cool + e  (mod q),
// which is exactly what subtract_cruel produces from synth_samples with the
// correct cruel guess.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sparselwe/recovery.hpp"
#include "sparselwe/reduction.hpp"

namespace sparselwe {

class SyntheticCoolSource final : public CrossProductSource {
 public:
  SyntheticCoolSource(const ReductionProfile& profile, const SeededRng& a_rng, std::size_t rows,
                      std::size_t block_rows = 8192);

  /// Registers a full-length secret (only the cool part matters) with its
  /// error stream. Returns the instance id.
  std::size_t add_instance(const Secret& secret, const SeededRng& eps_rng);

  [[nodiscard]] std::size_t columns() const override { return cool_; }
  [[nodiscard]] std::size_t rows() const override { return rows_; }
  [[nodiscard]] std::uint64_t modulus() const override { return profile_.q; }
  [[nodiscard]] std::size_t instances() const override { return s_cool_.size(); }
  const Eigen::MatrixXd& gram() override;
  Eigen::MatrixXd cross_products(std::span<const TargetRequest> requests) override;

  /// Number of passes over the rows so far (Gram pass included).
  [[nodiscard]] std::size_t passes() const noexcept { return passes_; }

 private:
  void fill_block(std::size_t start, std::size_t count);
  void fill_errors(std::size_t instance, std::size_t start, std::size_t count);

  ReductionProfile profile_;
  SyntheticRows generator_;
  std::size_t rows_;
  std::size_t cool_;
  std::size_t block_rows_;
  double error_std_;
  std::vector<Eigen::VectorXd> s_cool_;
  std::vector<SeededRng> eps_rngs_;
  std::optional<Eigen::MatrixXd> gram_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> block_;
  std::vector<std::int64_t> errors_;
  std::size_t passes_ = 0;
};

}  // namespace sparselwe
