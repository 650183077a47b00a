#include "sparselwe/reduction.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "sparselwe/error.hpp"

namespace sparselwe {

void ReductionProfile::validate() const {
  if (n < 1) throw ParameterError("profile: n must be >= 1");
  if (q < 2 || q > kMaxModulus) throw ParameterError("profile: q must lie in [2, 2^41]");
  if (c > n) throw ParameterError("profile: c exceeds n");
  if (!(sigma_cool >= 0.0 && sigma_cool < 0.5)) {
    throw ParameterError("profile: sigma_cool must lie in [0, 0.5)");
  }
  if (sigma_eps && !(*sigma_eps > 0.0 && *sigma_eps < 1.0)) {
    throw ParameterError("profile: sigma_eps must lie in (0, 1)");
  }
}

double ReductionProfile::error_std() const {
  if (!sigma_eps) throw ParameterError("profile: sigma_eps is unknown");
  return unwrapped_std_fraction(*sigma_eps) * uniform_std(q);
}

double wrapped_std_fraction(double s) {
  if (!(s >= 0.0)) throw ParameterError("wrapped_std_fraction: width must be >= 0");
  // Below 0.3 the wrap beyond q/2 (> 5.7 std) changes nothing measurable, and
  // the Fourier series converges too slowly to be useful.
  if (s < 0.3) return s;
  constexpr double kPi2 = 9.869604401089358;
  double sum = 0.0;
  for (int k = 1; k <= 64; ++k) {
    const double term = std::exp(-kPi2 * k * k * s * s / 6.0) / (k * k);
    sum += (k % 2 ? -term : term);
    if (term < 1e-18) break;
  }
  return std::sqrt(std::max(0.0, 1.0 + 12.0 / kPi2 * sum));
}

double unwrapped_std_fraction(double wrapped) {
  if (!(wrapped >= 0.0 && wrapped < 1.0)) {
    throw ParameterError("unwrapped_std_fraction: target must lie in [0, 1)");
  }
  // wrapped_std_fraction is increasing and below its argument.
  double lo = wrapped;
  double hi = std::max(1.0, 2.0 * wrapped);
  while (wrapped_std_fraction(hi) < wrapped) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (wrapped_std_fraction(mid) < wrapped ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::string ReductionProfile::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["q"] = q;
  j["c"] = c;
  j["sigma_cool"] = sigma_cool;
  j["sigma_eps"] = sigma_eps ? nlohmann::json(*sigma_eps) : nlohmann::json(nullptr);
  j["rho"] = rho ? nlohmann::json(*rho) : nlohmann::json(nullptr);
  return j.dump();
}

ReductionProfile ReductionProfile::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ReductionProfile p;
    p.n = j.at("n").get<std::size_t>();
    p.q = j.at("q").get<std::uint64_t>();
    p.c = j.at("c").get<std::size_t>();
    p.sigma_cool = j.at("sigma_cool").get<double>();
    if (j.contains("sigma_eps") && !j["sigma_eps"].is_null()) p.sigma_eps = j["sigma_eps"].get<double>();
    if (j.contains("rho") && !j["rho"].is_null()) p.rho = j["rho"].get<double>();
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed profile: ") + e.what());
  }
}

namespace {

struct PresetRow {
  std::string_view name;
  std::size_t n;
  int log2q;
  std::size_t c;
  double sigma_cool;
  double rho;
  double sigma_eps;
};

// Measured on lattice-reduced data (BKZ2.0 + flatter).
constexpr std::array<PresetRow, 4> kPresets{{
    {"n256q12", 256, 12, 143, 0.30, 0.0018, 0.88},
    {"n256q20", 256, 20, 34, 0.23, 0.0105, 0.90},
    {"n512q28", 512, 28, 224, 0.19, 0.0012, 0.70},
    {"n512q41", 512, 41, 46, 0.15, 0.0018, 0.80},
}};

}  // namespace

ReductionProfile preset(std::string_view name) {
  for (const auto& row : kPresets) {
    if (row.name == name) {
      ReductionProfile p;
      p.n = row.n;
      p.q = std::uint64_t{1} << row.log2q;
      p.c = row.c;
      p.sigma_cool = row.sigma_cool;
      p.sigma_eps = row.sigma_eps;
      p.rho = row.rho;
      return p;
    }
  }
  throw ParameterError("unknown preset: " + std::string(name));
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& row : kPresets) out.emplace_back(row.name);
  return out;
}

ReductionProfile measure_profile(const SampleSet& samples) {
  if (samples.empty()) throw ParameterError("measure_profile: empty sample set");
  const std::size_t n = samples.n();
  const std::size_t m = samples.size();
  const std::uint64_t q = samples.q();

  // Accumulate first and second moments block by block.
  constexpr std::size_t kBlock = 4096;
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                static_cast<Eigen::Index>(n));
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd block(static_cast<Eigen::Index>(kBlock), static_cast<Eigen::Index>(n));
  for (std::size_t start = 0; start < m; start += kBlock) {
    const std::size_t rows = std::min(kBlock, m - start);
    for (std::size_t r = 0; r < rows; ++r) {
      auto a = samples.a(start + r);
      for (std::size_t j = 0; j < n; ++j) {
        block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
            static_cast<double>(centered(a[j], q));
      }
    }
    auto used = block.topRows(static_cast<Eigen::Index>(rows));
    cross.selfadjointView<Eigen::Lower>().rankUpdate(used.transpose());
    sum += used.colwise().sum().transpose();
  }
  cross = cross.selfadjointView<Eigen::Lower>();
  const Eigen::VectorXd mean = sum / static_cast<double>(m);
  Eigen::MatrixXd cov = cross / static_cast<double>(m) - mean * mean.transpose();
  Eigen::VectorXd stdev = cov.diagonal().cwiseMax(0.0).cwiseSqrt();

  const double half_uniform = 0.5 * uniform_std(q);
  std::size_t c = n;
  while (c > 0 && stdev(static_cast<Eigen::Index>(c - 1)) < half_uniform) --c;

  ReductionProfile p;
  p.n = n;
  p.q = q;
  p.c = c;
  if (c < n) {
    const double mean_sq = stdev.tail(static_cast<Eigen::Index>(n - c)).squaredNorm() /
                           static_cast<double>(n - c);
    p.sigma_cool = std::sqrt(mean_sq) / uniform_std(q);
  }

  double abs_sum = 0.0;
  std::size_t pairs = 0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    if (stdev(i) == 0.0) continue;
    for (Eigen::Index j = i + 1; j < static_cast<Eigen::Index>(n); ++j) {
      if (stdev(j) == 0.0) continue;
      abs_sum += std::abs(cov(i, j) / (stdev(i) * stdev(j)));
      ++pairs;
    }
  }
  if (pairs > 0) p.rho = abs_sum / static_cast<double>(pairs);
  return p;
}

double estimate_sigma_eps(const SampleSet& samples, const Secret& secret) {
  if (samples.empty()) throw ParameterError("estimate_sigma_eps: empty sample set");
  const auto res = centered_residuals(samples, secret);
  double mean = 0.0;
  for (auto v : res) mean += static_cast<double>(v);
  mean /= static_cast<double>(res.size());
  double var = 0.0;
  for (auto v : res) var += (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
  var /= static_cast<double>(res.size());
  return std::sqrt(var) / uniform_std(samples.q());
}

SyntheticRows::SyntheticRows(const ReductionProfile& profile, const SeededRng& a_rng)
    : profile_(profile),
      cool_std_(profile.cool_std()),
      cruel_rng_(a_rng.substream("cruel")),
      cool_rng_(a_rng.substream("cool")) {
  profile_.validate();
}

void SyntheticRows::row(std::size_t i, std::span<Zq> out) const {
  if (out.size() != profile_.n) throw DimensionError("SyntheticRows: row length differs from n");
  const std::uint64_t q = profile_.q;
  SeededRng cruel = cruel_rng_.substream(i);
  for (std::size_t j = 0; j < profile_.c; ++j) out[j] = cruel.uniform_below(q);
  std::vector<std::int64_t> cool(profile_.n - profile_.c);
  cool_row<std::int64_t>(i, cool);
  for (std::size_t j = 0; j < cool.size(); ++j) out[profile_.c + j] = reduce(cool[j], q);
}

std::int64_t synthetic_error(const ReductionProfile& profile, const SeededRng& eps_rng,
                             std::size_t row) {
  return synthetic_error(profile.error_std(), eps_rng, row);
}

std::int64_t synthetic_error(double error_std, const SeededRng& eps_rng, std::size_t row) {
  std::int64_t e = 0;
  synthetic_errors(error_std, eps_rng, row, std::span<std::int64_t>(&e, 1));
  return e;
}

void synthetic_errors(double error_std, const SeededRng& eps_rng, std::size_t start,
                      std::span<std::int64_t> out) {
  std::array<std::int64_t, kErrorBlock> block;
  std::size_t done = 0;
  while (done < out.size()) {
    const std::size_t row = start + done;
    const std::size_t offset = row % kErrorBlock;
    const std::size_t take = std::min(kErrorBlock - offset, out.size() - done);
    SeededRng rng = eps_rng.substream(row / kErrorBlock);
    fill_discrete_gaussian(error_std, rng, std::span<std::int64_t>(block.data(), offset + take));
    std::copy_n(block.begin() + static_cast<std::ptrdiff_t>(offset), take, out.begin() + static_cast<std::ptrdiff_t>(done));
    done += take;
  }
}

SampleSet synth_samples(const ReductionProfile& profile, const Secret& secret, std::size_t count,
                        const SeededRng& rng) {
  return synth_samples(profile, secret, count, rng.substream("a"), rng.substream("eps"));
}

SampleSet synth_samples(const ReductionProfile& profile, const Secret& secret, std::size_t count,
                        const SeededRng& a_rng, const SeededRng& eps_rng) {
  profile.validate();
  if (secret.n() != profile.n) throw DimensionError("synth_samples: secret length differs from n");
  const double err_std = profile.error_std();
  SyntheticRows rows(profile, a_rng);
  // params carry the pre-reduction error width; the amplified one lives in the profile
  SampleSet out(LweParams(profile.n, profile.q, std::min(3.0, profile.q / 32.0)), profile.c);
  out.reserve(count);
  std::vector<std::int64_t> errors(count);
  synthetic_errors(err_std, eps_rng, 0, errors);
  for (std::size_t i = 0; i < count; ++i) {
    auto a = out.append_row(0);
    rows.row(i, a);
    const Zq dot = dot_mod(a, secret.coeffs(), profile.q);
    out.set_b(i, reduce(static_cast<i128>(dot) + errors[i], profile.q));
  }
  return out;
}

std::vector<std::size_t> assemble_budget(std::size_t available_rows, const DataBudget& budget,
                                         SeededRng rng) {
  if (budget.repetition < 1) throw ParameterError("assemble_budget: repetition must be >= 1");
  if (budget.distinct > available_rows) {
    throw ParameterError("assemble_budget: " + std::to_string(budget.distinct) +
                         " distinct rows requested, " + std::to_string(available_rows) +
                         " available");
  }
  // Choose the distinct rows (partial Fisher-Yates over an index table).
  std::vector<std::size_t> pool(available_rows);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < budget.distinct; ++i) {
    std::swap(pool[i], pool[i + rng.uniform_below(available_rows - i)]);
  }
  std::vector<std::size_t> stream;
  stream.reserve(budget.total());
  for (std::size_t r = 0; r < budget.repetition; ++r) {
    stream.insert(stream.end(), pool.begin(),
                  pool.begin() + static_cast<std::ptrdiff_t>(budget.distinct));
  }
  for (std::size_t i = stream.size(); i > 1; --i) {
    std::swap(stream[i - 1], stream[rng.uniform_below(i)]);
  }
  return stream;
}

}  // namespace sparselwe
