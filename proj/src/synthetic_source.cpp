#include "sparselwe/synthetic_source.hpp"

#include <algorithm>
#include <cmath>

#include "sparselwe/error.hpp"

namespace sparselwe {

using Eigen::Index;

SyntheticCoolSource::SyntheticCoolSource(const ReductionProfile& profile, const SeededRng& a_rng,
                                         std::size_t rows, std::size_t block_rows)
    : profile_(profile),
      generator_(profile, a_rng),
      rows_(rows),
      cool_(profile.cool_columns()),
      block_rows_(std::max<std::size_t>(block_rows, 1)),
      error_std_(profile_.error_std()) {
  if (rows_ == 0) throw ParameterError("SyntheticCoolSource: zero rows");
}

std::size_t SyntheticCoolSource::add_instance(const Secret& secret, const SeededRng& eps_rng) {
  if (secret.n() != profile_.n) throw DimensionError("SyntheticCoolSource: secret length differs");
  Eigen::VectorXd s(static_cast<Index>(cool_));
  for (std::size_t j = 0; j < cool_; ++j) {
    s(static_cast<Index>(j)) = static_cast<double>(secret.coeffs()[profile_.c + j]);
  }
  s_cool_.push_back(std::move(s));
  eps_rngs_.push_back(eps_rng);
  return s_cool_.size() - 1;
}

void SyntheticCoolSource::fill_block(std::size_t start, std::size_t count) {
  block_.resize(static_cast<Index>(count), static_cast<Index>(cool_));
  for (std::size_t r = 0; r < count; ++r) {
    generator_.cool_row<double>(start + r, std::span<double>(block_.row(static_cast<Index>(r)).data(), cool_));
  }
}

void SyntheticCoolSource::fill_errors(std::size_t instance, std::size_t start, std::size_t count) {
  errors_.resize(count);
  synthetic_errors(error_std_, eps_rngs_[instance], start, errors_);
}

const Eigen::MatrixXd& SyntheticCoolSource::gram() {
  if (gram_) return *gram_;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Index>(cool_), static_cast<Index>(cool_));
  for (std::size_t start = 0; start < rows_; start += block_rows_) {
    const std::size_t count = std::min(block_rows_, rows_ - start);
    fill_block(start, count);
    g.selfadjointView<Eigen::Lower>().rankUpdate(block_.transpose());
  }
  ++passes_;
  gram_ = Eigen::MatrixXd(g.selfadjointView<Eigen::Lower>());
  return *gram_;
}

Eigen::MatrixXd SyntheticCoolSource::cross_products(std::span<const TargetRequest> requests) {
  const auto nreq = static_cast<Index>(requests.size());
  const auto qd = static_cast<double>(profile_.q);
  const double half_q = qd / 2.0;
  // w_r = weights_r + b_sign_r * s_cool; the error enters row-wise.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Index>(cool_), nreq);
  for (Index r = 0; r < nreq; ++r) {
    const auto& req = requests[static_cast<std::size_t>(r)];
    if (req.instance >= s_cool_.size()) throw ParameterError("SyntheticCoolSource: unknown instance");
    const auto& weights = req.target.weights;
    if (!weights.empty()) {
      if (weights.size() != cool_) throw DimensionError("target weights differ from column count");
      for (std::size_t j = 0; j < cool_; ++j) w(static_cast<Index>(j), r) = weights[j];
    }
    w.col(r) += static_cast<double>(req.target.b_sign) * s_cool_[req.instance];
  }

  std::vector<std::size_t> instances_used;
  for (const auto& req : requests) {
    if (std::find(instances_used.begin(), instances_used.end(), req.instance) ==
        instances_used.end()) {
      instances_used.push_back(req.instance);
    }
  }

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Index>(cool_), nreq);
  Eigen::MatrixXd y;
  for (std::size_t start = 0; start < rows_; start += block_rows_) {
    const std::size_t count = std::min(block_rows_, rows_ - start);
    fill_block(start, count);
    y.noalias() = block_ * w;
    for (std::size_t inst : instances_used) {
      fill_errors(inst, start, count);
      for (Index r = 0; r < nreq; ++r) {
        const auto& req = requests[static_cast<std::size_t>(r)];
        if (req.instance != inst) continue;
        // Centered lift in double; exact while |raw| < 2^51.
        const double sign = static_cast<double>(req.target.b_sign);
        double* col = y.col(r).data();
        for (std::size_t i = 0; i < count; ++i) {
          const double raw = std::round(col[i]) + sign * static_cast<double>(errors_[i]);
          col[i] = raw - qd * std::floor((raw + half_q) / qd);
        }
      }
    }
    out.noalias() += block_.transpose() * y;
  }
  ++passes_;
  return out;
}

}  // namespace sparselwe
