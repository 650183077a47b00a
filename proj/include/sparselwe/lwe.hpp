#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparselwe/modular.hpp"
#include "sparselwe/rng.hpp"

namespace sparselwe {

/// Ring parameters shared by every sample of an instance.
struct LweParams {
  std::size_t n = 0;
  std::uint64_t q = 0;
  double sigma_err = 3.0;  // error std, in units of Z_q elements

  LweParams() = default;
  LweParams(std::size_t n, std::uint64_t q, double sigma_err = 3.0);

  /// Throws ParameterError unless n >= 1, 2 <= q <= 2^41 and 0 <= sigma < q/16.
  void validate() const;
};

enum class SecretKind { binary, ternary };

std::string_view to_string(SecretKind kind);
SecretKind parse_secret_kind(std::string_view text);

/// Sparse small secret. Ground truth and guesses share this type.
class Secret {
 public:
  Secret() = default;
  Secret(SecretKind kind, std::vector<std::int64_t> coeffs,
         std::optional<std::uint64_t> seed = std::nullopt);

  static Secret zero(std::size_t n, SecretKind kind = SecretKind::binary);

  [[nodiscard]] SecretKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t n() const noexcept { return coeffs_.size(); }
  [[nodiscard]] std::size_t h() const noexcept { return h_; }
  [[nodiscard]] std::span<const std::int64_t> coeffs() const noexcept { return coeffs_; }
  [[nodiscard]] std::int64_t operator[](std::size_t j) const { return coeffs_[j]; }
  [[nodiscard]] std::optional<std::uint64_t> seed() const noexcept { return seed_; }

  /// Number of nonzeros among the first c coordinates.
  [[nodiscard]] std::size_t cruel_weight(std::size_t c) const;

  friend bool operator==(const Secret& x, const Secret& y) noexcept {
    return x.kind_ == y.kind_ && x.coeffs_ == y.coeffs_;
  }

 private:
  SecretKind kind_ = SecretKind::binary;
  std::vector<std::int64_t> coeffs_;
  std::size_t h_ = 0;
  std::optional<std::uint64_t> seed_;
};

/// Exactly h nonzeros at uniformly random positions; ternary signs are
/// independent fair coins. The rng seed is recorded for provenance.
Secret sample_secret(std::size_t n, std::size_t h, SecretKind kind, SeededRng rng);

/// Secret file record: one JSON object per line with n, q, kind, h, coeffs, seed.
void write_secret_json(std::ostream& out, const Secret& secret, std::uint64_t q);
struct SecretRecord {
  Secret secret;
  std::uint64_t q = 0;
};
SecretRecord parse_secret_json(std::string_view line);
std::vector<SecretRecord> read_secrets(std::istream& in);

/// Batch of (a, b) pairs over Z_q stored row-major.
class SampleSet {
 public:
  SampleSet() = default;
  SampleSet(LweParams params, std::optional<std::size_t> c_hint = std::nullopt);

  [[nodiscard]] const LweParams& params() const noexcept { return params_; }
  [[nodiscard]] std::size_t n() const noexcept { return params_.n; }
  [[nodiscard]] std::uint64_t q() const noexcept { return params_.q; }
  [[nodiscard]] std::size_t size() const noexcept { return b_.size(); }
  [[nodiscard]] bool empty() const noexcept { return b_.empty(); }
  [[nodiscard]] std::optional<std::size_t> c_hint() const noexcept { return c_hint_; }
  void set_c_hint(std::optional<std::size_t> c) noexcept { c_hint_ = c; }

  [[nodiscard]] std::span<const Zq> a(std::size_t row) const {
    return {a_.data() + row * params_.n, params_.n};
  }
  [[nodiscard]] std::span<Zq> a(std::size_t row) { return {a_.data() + row * params_.n, params_.n}; }
  [[nodiscard]] Zq b(std::size_t row) const { return b_[row]; }
  [[nodiscard]] std::span<const Zq> b() const noexcept { return b_; }

  void reserve(std::size_t rows);
  /// Appends a row; throws DimensionError / ParameterError on bad input.
  void push_back(std::span<const Zq> a, Zq b);
  /// Appends a zero row and returns its a-span for in-place filling.
  std::span<Zq> append_row(Zq b);
  void set_b(std::size_t row, Zq b) { b_[row] = b; }

  /// Rows [begin, end) as a new set.
  [[nodiscard]] SampleSet slice(std::size_t begin, std::size_t end) const;

 private:
  LweParams params_;
  std::optional<std::size_t> c_hint_;
  std::vector<Zq> a_;
  std::vector<Zq> b_;
};

/// Uniform a over Z_q^n with b = a.s + e mod q, e discrete Gaussian of width
/// params.sigma_err (or 0 when noiseless). Row i draws from rng.substream(i).
SampleSet gen_unreduced(const LweParams& params, const Secret& secret, std::size_t count,
                        bool noiseless, const SeededRng& rng);

/// centered(b - a.s mod q) for every row.
std::vector<std::int64_t> centered_residuals(const SampleSet& samples, const Secret& secret);

}  // namespace sparselwe
