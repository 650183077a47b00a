#include "commands.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sparselwe/analysis.hpp"
#include "sparselwe/candidates.hpp"
#include "sparselwe/dataset_io.hpp"
#include "sparselwe/error.hpp"
#include "sparselwe/pipeline.hpp"
#include "sparselwe/reduction.hpp"
#include "sparselwe/sweep.hpp"
#include "sparselwe/verify.hpp"

namespace sparselwe::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ReductionProfile resolve_profile(const ProfileArgs& a) {
  ReductionProfile p;
  if (!a.preset.empty()) {
    p = preset(a.preset);
  } else if (!(a.n && a.log2q && a.c && a.sigma_cool)) {
    throw ParameterError("profile: give --preset or all of --n, --log2q, --c, --sigma-cool");
  }
  if (a.n) p.n = *a.n;
  if (a.log2q) {
    if (*a.log2q < 1 || *a.log2q > 41) throw ParameterError("profile: log2q must lie in [1, 41]");
    p.q = std::uint64_t{1} << *a.log2q;
  }
  if (a.c) p.c = *a.c;
  if (a.sigma_cool) p.sigma_cool = *a.sigma_cool;
  if (a.sigma_eps) p.sigma_eps = *a.sigma_eps;
  p.validate();
  return p;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

Secret read_secret_file(const fs::path& path) {
  std::istringstream in(read_text(path));
  const auto recs = read_secrets(in);
  if (recs.empty()) throw IoError(path.string() + ": no secret record");
  return recs.front().secret;
}

ReductionProfile read_profile_file(const fs::path& path) {
  return ReductionProfile::from_json(read_text(path));
}

json candidate_json(const CruelCandidate& cand) {
  return {{"rank", cand.rank}, {"support", cand.support}, {"signs", cand.signs}, {"score", cand.score}};
}

std::pair<std::size_t, std::size_t> h_range(const std::optional<std::size_t>& h,
                                            const std::optional<std::size_t>& lo,
                                            const std::optional<std::size_t>& hi, const char* who) {
  if (h) return {*h, *h};
  if (lo && hi) return {*lo, *hi};
  throw ParameterError(std::string(who) + ": give --h or both --h-lo and --h-hi");
}

}  // namespace

int cmd_gen(const GenArgs& args) {
  if (args.count == 0) throw ParameterError("gen: count must be >= 1");
  ReductionProfile profile = resolve_profile(args.profile);
  const auto kind = parse_secret_kind(args.kind);
  const SeededRng root(args.seed);
  const Secret secret = sample_secret(profile.n, args.h, kind, root.substream("secret"));

  SampleSet set;
  if (args.unreduced) {
    const LweParams params(profile.n, profile.q, args.sigma);
    set = gen_unreduced(params, secret, args.count, false, root.substream("data"));
    profile.c = profile.n;
    profile.sigma_cool = 0.0;
    profile.rho.reset();
    profile.sigma_eps = args.sigma / uniform_std(profile.q);
  } else {
    if (!profile.sigma_eps) throw ParameterError("gen: synthetic data needs --sigma-eps");
    set = synth_samples(profile, secret, args.count, root.substream("data"));
  }

  const fs::path out(args.out);
  fs::create_directories(out);
  write_lwed(out / "samples.lwed", set);
  std::ostringstream sec;
  write_secret_json(sec, secret, profile.q);
  write_text(out / "secret.jsonl", sec.str());
  write_text(out / "profile.json", profile.to_json() + "\n");
  std::cerr << "gen: wrote " << set.size() << " rows (n=" << profile.n << ", q=" << profile.q
            << ", c=" << profile.c << ", h=" << secret.h() << ") to " << out.string() << "\n";
  return kExitOk;
}

int cmd_profile(const ProfileCmdArgs& args) {
  const auto set = read_lwed(args.data);
  auto p = measure_profile(set);
  if (!args.secret.empty()) p.sigma_eps = estimate_sigma_eps(set, read_secret_file(args.secret));
  const std::string text = p.to_json() + "\n";
  std::cout << text;
  if (!args.out.empty()) write_text(args.out, text);
  return kExitOk;
}

int cmd_recover(const RecoverArgs& args) {
  const auto samples = read_lwed(args.data);
  ReductionProfile profile;
  if (!args.profile.empty()) {
    profile = read_profile_file(args.profile);
  } else {
    profile = measure_profile(samples);
    if (samples.c_hint()) profile.c = *samples.c_hint();
    std::cerr << "recover: no profile given; measured c=" << profile.c
              << ", verification threshold falls back to " << kFallbackThreshold << "\n";
  }

  RecoveryConfig cfg;
  const auto [h_lo, h_hi] = h_range(args.h, args.h_lo, args.h_hi, "recover");
  if (args.h) {
    cfg.h = *args.h;
  } else {
    cfg.h_lo = h_lo;
    cfg.h_hi = h_hi;
  }
  cfg.alphabet = parse_secret_kind(args.kind);
  cfg.k_lo = args.k_lo;
  cfg.k_hi = args.k_hi;
  cfg.limit = args.limit;
  cfg.method = parse_recovery_method(args.method);
  cfg.threshold = args.threshold;
  cfg.holdout_rows = args.holdout;
  cfg.work_bound = args.work_bound;
  cfg.full_rowsum_dual = args.full_rowsum_dual;

  const fs::path out(args.out);
  fs::create_directories(out);
  std::ofstream progress(out / "progress.csv", std::ios::binary);
  if (!progress) throw IoError("cannot write " + (out / "progress.csv").string());
  write_progress_header(progress);
  const auto on_attempt = [&](const AttemptRecord& r) { write_progress_row(progress, r); };

  const auto t0 = std::chrono::steady_clock::now();
  RecoveryOutcome outcome;
  std::string path;
  if (args.scores.empty()) {
    path = "brute-force";
    std::cerr << "recover: no scores file given; brute-force over the cruel region with uniform scores\n";
    outcome = brute_force_cruel(samples, profile, cfg, on_attempt);
  } else {
    path = "scores";
    std::istringstream in(read_text(args.scores));
    const auto all = read_scores(in);
    if (args.scores_index >= all.size()) throw IoError("recover: scores record index out of range");
    outcome = full_recover(samples, profile, all[args.scores_index], cfg, on_attempt);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  progress.close();

  json report;
  report["found"] = outcome.secret.has_value();
  report["attempts"] = outcome.attempts;
  report["path"] = path;
  report["threshold"] = outcome.threshold;
  report["candidate"] = outcome.candidate ? candidate_json(*outcome.candidate) : json(nullptr);
  report["verification"] = outcome.report ? json::parse(outcome.report->to_json()) : json(nullptr);
  report["holdout"] = outcome.holdout_report ? json::parse(outcome.holdout_report->to_json()) : json(nullptr);
  report["secret"] = outcome.secret ? json(outcome.secret->coeffs()) : json(nullptr);
  if (!args.secret.empty()) {
    const Secret truth = read_secret_file(args.secret);
    report["exact_match"] = outcome.secret.has_value() && *outcome.secret == truth;
  }
  write_text(out / "report.json", report.dump() + "\n");
  write_text(out / "timing.json", json{{"wall_seconds", wall}}.dump() + "\n");
  if (outcome.secret) {
    std::ostringstream sec;
    write_secret_json(sec, *outcome.secret, profile.q);
    write_text(out / "recovered.jsonl", sec.str());
  }
  std::cout << report.dump() << "\n";
  std::cerr << "recover: " << (outcome.secret ? "found" : "not found") << " after " << outcome.attempts
            << " attempts in " << std::fixed << std::setprecision(1) << wall << " s\n";
  return outcome.secret ? kExitOk : kExitNotFound;
}

int cmd_verify(const VerifyArgs& args) {
  const auto samples = read_lwed(args.data);
  const Secret guess = read_secret_file(args.secret);
  std::optional<ReductionProfile> profile;
  if (!args.profile.empty()) profile = read_profile_file(args.profile);
  const double threshold = args.threshold.value_or(default_threshold(profile));
  const auto report = residual_test(samples, guess, threshold);
  const std::string text = report.to_json() + "\n";
  std::cout << text;
  if (!args.out.empty()) write_text(args.out, text);
  return report.accepted ? kExitOk : kExitNotFound;
}

int cmd_sweep(const SweepArgs& args) {
  if (args.weights.empty() || args.rows.empty() || args.methods.empty() || args.secrets == 0) {
    throw ParameterError("sweep: empty grid (need --weights, --rows, --methods and --secrets >= 1)");
  }
  const auto profile = resolve_profile(args.profile);
  const auto kind = parse_secret_kind(args.kind);
  std::vector<RecoveryMethod> methods;
  for (const auto& m : args.methods) methods.push_back(parse_recovery_method(m));

  std::vector<CellSpec> cells;
  for (const auto& w : args.weights) {
    const auto colon = w.find(':');
    if (colon == std::string::npos) throw ParameterError("sweep: weights are h_cool:h pairs, got " + w);
    std::size_t h_cool = 0;
    std::size_t h = 0;
    try {
      h_cool = std::stoul(w.substr(0, colon));
      h = std::stoul(w.substr(colon + 1));
    } catch (const std::logic_error&) {
      throw ParameterError("sweep: malformed weight pair " + w);
    }
    for (auto rows : args.rows) {
      CellSpec spec;
      spec.profile = profile;
      spec.h_cool = h_cool;
      spec.h_total = h;
      spec.rows = rows;
      spec.secrets = args.secrets;
      spec.methods = methods;
      spec.alphabet = kind;
      spec.seed = args.seed;
      cells.push_back(spec);
    }
  }

  const fs::path out(args.out);
  const fs::path cell_dir = out / "cells";
  fs::create_directories(cell_dir);
  const fs::path manifest = out / "manifest.txt";
  std::set<std::string> done;
  if (fs::exists(manifest)) {
    std::istringstream in(read_text(manifest));
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) done.insert(line);
    }
  }
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!(done.count(cells[i].key()) && fs::exists(cell_dir / (cells[i].key() + ".csv")))) pending.push_back(i);
  }
  std::cerr << "sweep: " << cells.size() << " cells, " << cells.size() - pending.size()
            << " already complete\n";

  std::mutex io;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  const auto worker = [&] {
    for (;;) {
      const std::size_t slot = next++;
      if (slot >= pending.size()) return;
      const auto& spec = cells[pending[slot]];
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const auto result = run_cell(spec);
        std::ostringstream rows;
        for (auto m : spec.methods) {
          rows << spec.h_cool << ',' << spec.h_total << ',' << spec.rows << ',' << to_string(m) << ','
               << result.successes.at(m) << ',' << result.secrets << '\n';
        }
        write_text(cell_dir / (spec.key() + ".csv"), rows.str());
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::lock_guard lock(io);
        std::ofstream(manifest, std::ios::app) << spec.key() << '\n';
        std::cerr << "sweep: " << spec.key() << " done in " << std::fixed << std::setprecision(0) << wall
                  << " s (" << result.passes << " passes)\n";
      } catch (...) {
        std::lock_guard lock(io);
        if (!failure) failure = std::current_exception();
        next = pending.size();
        return;
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(args.jobs, pending.size()));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::ostringstream merged;
  merged << "h_cool,h,rows,method,successes,secrets\n";
  for (const auto& spec : cells) merged << read_text(cell_dir / (spec.key() + ".csv"));
  write_text(out / "results.csv", merged.str());
  std::cout << merged.str();
  return kExitOk;
}

namespace {

std::string expected_rate_csv(const ExpectedRateArgs& args) {
  if (args.step.has_value() == !args.rates.empty()) {
    throw ParameterError("expected-rate: give exactly one of --step or --rates");
  }
  if (args.c > args.n) throw ParameterError("expected-rate: c exceeds n");
  const auto [lo, hi] = h_range(args.h, args.h_lo, args.h_hi, "expected-rate");
  if (lo > hi) throw ParameterError("expected-rate: h_lo > h_hi");
  RecoveryRateTable table;
  if (args.step) {
    table = RecoveryRateTable::step(*args.step);
  } else {
    std::istringstream in(read_text(args.rates));
    table = RecoveryRateTable::from_csv(in);
  }
  std::ostringstream out;
  out << "h,expected_rate\n" << std::setprecision(10);
  for (std::size_t h = lo; h <= hi; ++h) out << h << ',' << expected_rate(args.n, args.c, h, table) << '\n';
  return out.str();
}

ScalingFit scaling_fit_of(const std::string& path, std::optional<double> repetition, std::size_t bootstrap,
                          double level, SeededRng rng) {
  std::istringstream in(read_text(path));
  const auto points = read_scaling_csv(in);
  auto fit = fit_scaling(points);
  fit.repetition = repetition;
  if (bootstrap > 0 && points.size() >= 5) fit.ci = bootstrap_ci(points, rng, bootstrap, level);
  return fit;
}

}  // namespace

int cmd_expected_rate(const ExpectedRateArgs& args) {
  const auto text = expected_rate_csv(args);
  std::cout << text;
  if (!args.out.empty()) write_text(args.out, text);
  return kExitOk;
}

int cmd_fit_scaling(const FitScalingArgs& args) {
  const auto fit = scaling_fit_of(args.data, args.repetition, args.bootstrap, args.level, SeededRng(args.seed));
  const std::string text = fit.to_json() + "\n";
  std::cout << text;
  if (!args.out.empty()) write_text(args.out, text);
  return kExitOk;
}

int cmd_analyze(const AnalyzeArgs& args) {
  const bool rates = args.rate.step.has_value() || !args.rate.rates.empty();
  if (args.scaling.empty() && !rates) throw ParameterError("analyze: nothing to do (give --scaling or --step/--rates)");
  if (!args.repetitions.empty() && args.repetitions.size() != args.scaling.size()) {
    throw ParameterError("analyze: --repetitions needs one value per --scaling file");
  }
  const fs::path out(args.out);
  fs::create_directories(out);
  if (rates) {
    const auto text = expected_rate_csv(args.rate);
    write_text(out / "expected_rate.csv", text);
    std::cout << text;
  }
  if (!args.scaling.empty()) {
    const SeededRng root(args.seed);
    std::ostringstream fits;
    for (std::size_t i = 0; i < args.scaling.size(); ++i) {
      const std::optional<double> r =
          args.repetitions.empty() ? std::nullopt : std::optional<double>(args.repetitions[i]);
      fits << scaling_fit_of(args.scaling[i], r, args.bootstrap, 0.95, root.substream(i)).to_json() << '\n';
    }
    write_text(out / "scaling_fits.jsonl", fits.str());
    std::cout << fits.str();
  }
  return kExitOk;
}

}  // namespace sparselwe::cli
