#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sparselwe::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotFound = 2;

/// Preset name plus optional per-field overrides; without a preset every
/// field is required.
struct ProfileArgs {
  std::string preset;
  std::optional<std::size_t> n;
  std::optional<int> log2q;
  std::optional<std::size_t> c;
  std::optional<double> sigma_cool;
  std::optional<double> sigma_eps;
};

struct GenArgs {
  ProfileArgs profile;
  bool unreduced = false;
  double sigma = 3.0;  // unreduced error width
  std::string kind = "binary";
  std::size_t h = 0;
  std::size_t count = 0;
  std::string out;
  std::uint64_t seed = 0;
};

struct ProfileCmdArgs {
  std::string data;
  std::string secret;
  std::string out;
};

struct RecoverArgs {
  std::string data;
  std::string profile;
  std::string scores;
  std::size_t scores_index = 0;
  std::string secret;  // optional planted secret for the exact-match field
  std::optional<std::size_t> h;
  std::optional<std::size_t> h_lo;
  std::optional<std::size_t> h_hi;
  std::string kind = "binary";
  std::size_t k_lo = 0;
  std::optional<std::size_t> k_hi;
  std::size_t limit = 15000;
  std::string method = "dual";
  std::optional<double> threshold;
  std::size_t holdout = 1000;
  double work_bound = 1e6;
  bool full_rowsum_dual = false;
  std::string out;
};

struct VerifyArgs {
  std::string data;
  std::string secret;
  std::string profile;
  std::optional<double> threshold;
  std::string out;
};

struct SweepArgs {
  ProfileArgs profile;
  std::vector<std::string> weights;  // "h_cool:h" pairs
  std::vector<std::size_t> rows;
  std::vector<std::string> methods{"linear", "stepwise", "dual"};
  std::size_t secrets = 20;
  std::string kind = "binary";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string out;
};

struct ExpectedRateArgs {
  std::size_t n = 0;
  std::size_t c = 0;
  std::optional<std::size_t> h;
  std::optional<std::size_t> h_lo;
  std::optional<std::size_t> h_hi;
  std::optional<std::size_t> step;
  std::string rates;
  std::string out;
};

struct FitScalingArgs {
  std::string data;
  std::optional<double> repetition;
  std::size_t bootstrap = 1000;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::string out;
};

struct AnalyzeArgs {
  std::vector<std::string> scaling;
  std::vector<double> repetitions;
  ExpectedRateArgs rate;
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen(const GenArgs& args);
int cmd_profile(const ProfileCmdArgs& args);
int cmd_recover(const RecoverArgs& args);
int cmd_verify(const VerifyArgs& args);
int cmd_sweep(const SweepArgs& args);
int cmd_expected_rate(const ExpectedRateArgs& args);
int cmd_fit_scaling(const FitScalingArgs& args);
int cmd_analyze(const AnalyzeArgs& args);

}  // namespace sparselwe::cli
