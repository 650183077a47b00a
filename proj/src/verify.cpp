#include "sparselwe/verify.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "sparselwe/error.hpp"

namespace sparselwe {

std::string VerificationReport::to_json() const {
  nlohmann::json j;
  j["accepted"] = accepted;
  j["residual_std"] = residual_std;
  j["threshold"] = threshold;
  j["sample_count"] = sample_count;
  j["exact_match"] = exact_match ? nlohmann::json(*exact_match) : nlohmann::json(nullptr);
  return j.dump();
}

VerificationReport VerificationReport::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    VerificationReport r;
    r.accepted = j.at("accepted").get<bool>();
    r.residual_std = j.at("residual_std").get<double>();
    r.threshold = j.at("threshold").get<double>();
    r.sample_count = j.at("sample_count").get<std::size_t>();
    if (j.contains("exact_match") && !j["exact_match"].is_null()) {
      r.exact_match = j["exact_match"].get<bool>();
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed verification report: ") + e.what());
  }
}

double default_threshold(const std::optional<ReductionProfile>& profile) {
  if (profile && profile->sigma_eps) {
    const double s = *profile->sigma_eps;
    return s + 0.5 * (1.0 - s);
  }
  return kFallbackThreshold;
}

VerificationReport residual_test(const SampleSet& samples, const Secret& guess, double threshold,
                                 const Secret* truth) {
  if (samples.size() < kMinVerificationRows) {
    throw ParameterError("residual_test: need at least " + std::to_string(kMinVerificationRows) +
                         " rows, got " + std::to_string(samples.size()));
  }
  if (!(threshold > 0.0 && threshold < 2.0)) {
    throw ParameterError("residual_test: threshold must lie in (0, 2)");
  }
  const auto res = centered_residuals(samples, guess);
  double mean = 0.0;
  for (auto v : res) mean += static_cast<double>(v);
  mean /= static_cast<double>(res.size());
  double var = 0.0;
  for (auto v : res) {
    const double d = static_cast<double>(v) - mean;
    var += d * d;
  }
  var /= static_cast<double>(res.size());

  VerificationReport r;
  r.residual_std = std::sqrt(var);
  r.threshold = threshold;
  r.sample_count = samples.size();
  r.accepted = r.residual_std < threshold * uniform_std(samples.q());
  if (truth) r.exact_match = *truth == guess;
  return r;
}

}  // namespace sparselwe
