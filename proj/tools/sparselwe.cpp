// sparselwe: dataset generation, profiling, recovery, sweeps and analysis.
//
// Every subcommand accepts --config FILE with flat key=value lines (keys are
// the long option names without dashes, '#' starts a comment). Flags given on
// the command line override the file. Subcommands that write an output
// directory also write the fully resolved settings to DIR/config.conf, which
// reproduces the run when passed back through --config.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "sparselwe/error.hpp"

namespace fs = std::filesystem;
using namespace sparselwe::cli;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

// Replaces "--config FILE" by one "--key=value" token per file entry that the
// command line does not set itself. Entries go before the user's flags.
void splice_config(std::vector<std::string>& args) {
  auto it = std::find_if(args.begin(), args.end(), [](const std::string& a) {
    return a == "--config" || a.rfind("--config=", 0) == 0;
  });
  if (it == args.end()) return;
  std::string path;
  if (*it == "--config") {
    if (std::next(it) == args.end()) throw sparselwe::ParameterError("--config needs a file");
    path = *std::next(it);
    args.erase(it, std::next(it, 2));
  } else {
    path = it->substr(9);
    args.erase(it);
  }
  std::ifstream in(path);
  if (!in) throw sparselwe::IoError("cannot open config " + path);
  std::vector<std::string> extra;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw sparselwe::IoError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (!given_on_command_line(args, key)) extra.push_back("--" + key + "=" + value);
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
}

std::string resolved_config(const CLI::App& sub) {
  std::ostringstream out;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || opt->get_lnames().empty()) continue;
    if (opt->get_expected_min() == 0) {
      if (opt->count() > 0 && opt->as<bool>()) out << name << "=true\n";
      continue;
    }
    std::string value;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      for (std::size_t i = 0; i < r.size(); ++i) value += (i ? "," : "") + r[i];
    } else {
      value = opt->get_default_str();
      if (value.size() >= 2 && value.front() == '[' && value.back() == ']') value = value.substr(1, value.size() - 2);
    }
    if (!value.empty()) out << name << "=" << value << "\n";
  }
  return out.str();
}

void write_resolved(const CLI::App& sub, const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream(fs::path(dir) / "config.conf", std::ios::binary) << resolved_config(sub);
}

void add_profile_options(CLI::App* sub, ProfileArgs& p) {
  sub->add_option("--preset", p.preset, "Reduction profile preset (n256q12, n256q20, n512q28, n512q41)");
  sub->add_option("--n", p.n, "Dimension");
  sub->add_option("--log2q", p.log2q, "log2 of the modulus");
  sub->add_option("--c", p.c, "Cruel region size");
  sub->add_option("--sigma-cool", p.sigma_cool, "Cool column std as a fraction of q/sqrt(12)");
  sub->add_option("--sigma-eps", p.sigma_eps, "Residual std as a fraction of q/sqrt(12)");
}

void add_config_option(CLI::App* sub) {
  // Handled by splice_config before parsing; declared for --help.
  static std::string unused;
  sub->add_option("--config", unused, "Flat key=value settings file; command-line flags win");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-secret LWE recovery toolkit"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic reduced (or unreduced) data set");
  add_config_option(g);
  add_profile_options(g, gen.profile);
  g->add_flag("--unreduced", gen.unreduced, "Uniform a with discrete Gaussian error of width --sigma");
  g->add_option("--sigma", gen.sigma, "Error width for --unreduced");
  g->add_option("--kind", gen.kind, "Secret alphabet")->check(CLI::IsMember({"binary", "ternary"}));
  g->add_option("--h", gen.h, "Secret Hamming weight")->required();
  g->add_option("--count", gen.count, "Number of rows")->required();
  g->add_option("--seed", gen.seed, "Global seed");
  g->add_option("--out", gen.out, "Output directory")->required();

  ProfileCmdArgs prof;
  auto* p = app.add_subcommand("profile", "Measure c, sigma_cool and rho of a data set");
  add_config_option(p);
  p->add_option("--data", prof.data, "LWED file")->required();
  p->add_option("--secret", prof.secret, "Known secret (JSON lines) to estimate sigma_eps");
  p->add_option("--out", prof.out, "Write the profile JSON here");

  RecoverArgs rec;
  auto* r = app.add_subcommand("recover", "Recover a secret: candidates, cool-bit regression, verification");
  add_config_option(r);
  r->add_option("--data", rec.data, "LWED file")->required();
  r->add_option("--profile", rec.profile, "Profile JSON (default: measured from the data)");
  r->add_option("--scores", rec.scores, "Cruel-score JSON lines (default: brute force)");
  r->add_option("--scores-index", rec.scores_index, "Record to use from the scores file");
  r->add_option("--secret", rec.secret, "Planted secret for the exact_match field");
  r->add_option("--h", rec.h, "Secret Hamming weight");
  r->add_option("--h-lo", rec.h_lo, "Lowest weight when h is unknown");
  r->add_option("--h-hi", rec.h_hi, "Highest weight when h is unknown");
  r->add_option("--kind", rec.kind, "Secret alphabet")->check(CLI::IsMember({"binary", "ternary"}));
  r->add_option("--k-lo", rec.k_lo, "Smallest number of cruel nonzeros to try");
  r->add_option("--k-hi", rec.k_hi, "Largest number of cruel nonzeros to try");
  r->add_option("--limit", rec.limit, "Candidate limit (scores path)");
  r->add_option("--method", rec.method, "Cool-bit method")
      ->check(CLI::IsMember({"linear", "stepwise", "dual", "ternary"}));
  r->add_option("--threshold", rec.threshold, "Acceptance threshold, fraction of q/sqrt(12)");
  r->add_option("--holdout", rec.holdout, "Rows held out for re-verification (0 disables)");
  r->add_option("--work-bound", rec.work_bound, "Brute force: maximum candidate count");
  r->add_flag("--full-rowsum-dual", rec.full_rowsum_dual, "Dual target from the full cool row sum");
  r->add_option("--out", rec.out, "Output directory")->required();

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Residual test of a candidate secret");
  add_config_option(v);
  v->add_option("--data", ver.data, "LWED file")->required();
  v->add_option("--secret", ver.secret, "Candidate secret (JSON lines)")->required();
  v->add_option("--profile", ver.profile, "Profile JSON for the default threshold");
  v->add_option("--threshold", ver.threshold, "Acceptance threshold, fraction of q/sqrt(12)");
  v->add_option("--out", ver.out, "Write the report JSON here");

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Cool-bit recovery counts over a (weights x rows x method) grid");
  add_config_option(s);
  add_profile_options(s, sw.profile);
  s->add_option("--weights", sw.weights, "h_cool:h pairs")->delimiter(',');
  s->add_option("--rows", sw.rows, "Sample counts")->delimiter(',');
  s->add_option("--methods", sw.methods, "Methods")->delimiter(',');
  s->add_option("--secrets", sw.secrets, "Planted secrets per cell");
  s->add_option("--kind", sw.kind, "Secret alphabet")->check(CLI::IsMember({"binary", "ternary"}));
  s->add_option("--seed", sw.seed, "Global seed");
  s->add_option("--jobs", sw.jobs, "Worker threads");
  s->add_option("--out", sw.out, "Output directory")->required();

  ExpectedRateArgs er;
  auto* e = app.add_subcommand("expected-rate", "Expected recovery rate over the hypergeometric law of k");
  add_config_option(e);
  e->add_option("--n", er.n, "Dimension")->required();
  e->add_option("--c", er.c, "Cruel region size")->required();
  e->add_option("--h", er.h, "Secret weight");
  e->add_option("--h-lo", er.h_lo, "First weight");
  e->add_option("--h-hi", er.h_hi, "Last weight");
  e->add_option("--step", er.step, "Rate 1 for k <= K, else 0");
  e->add_option("--rates", er.rates, "Rate table CSV (h,k,rate)");
  e->add_option("--out", er.out, "Write the CSV here");

  FitScalingArgs fs_args;
  auto* f = app.add_subcommand("fit-scaling", "Fit ln A = C - alpha ln D with a bootstrap interval");
  add_config_option(f);
  f->add_option("--data", fs_args.data, "CSV with columns D,A")->required();
  f->add_option("--repetition", fs_args.repetition, "Repetition R recorded in the output");
  f->add_option("--bootstrap", fs_args.bootstrap, "Bootstrap resamples (0 disables)");
  f->add_option("--level", fs_args.level, "Interval level");
  f->add_option("--seed", fs_args.seed, "Bootstrap seed");
  f->add_option("--out", fs_args.out, "Write the fit JSON here");

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "Expected-rate tables and scaling fits from files");
  add_config_option(a);
  a->add_option("--scaling", an.scaling, "Scaling CSV files (D,A)")->delimiter(',');
  a->add_option("--repetitions", an.repetitions, "R per scaling file")->delimiter(',');
  a->add_option("--n", an.rate.n, "Dimension");
  a->add_option("--c", an.rate.c, "Cruel region size");
  a->add_option("--h", an.rate.h, "Secret weight");
  a->add_option("--h-lo", an.rate.h_lo, "First weight");
  a->add_option("--h-hi", an.rate.h_hi, "Last weight");
  a->add_option("--step", an.rate.step, "Rate 1 for k <= K, else 0");
  a->add_option("--rates", an.rate.rates, "Rate table CSV (h,k,rate)");
  a->add_option("--bootstrap", an.bootstrap, "Bootstrap resamples (0 disables)");
  a->add_option("--seed", an.seed, "Bootstrap seed");
  a->add_option("--out", an.out, "Output directory")->required();

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    splice_config(args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitError;
  }

  try {
    if (g->parsed()) {
      write_resolved(*g, gen.out);
      return cmd_gen(gen);
    }
    if (p->parsed()) return cmd_profile(prof);
    if (r->parsed()) {
      write_resolved(*r, rec.out);
      return cmd_recover(rec);
    }
    if (v->parsed()) return cmd_verify(ver);
    if (s->parsed()) {
      write_resolved(*s, sw.out);
      return cmd_sweep(sw);
    }
    if (e->parsed()) return cmd_expected_rate(er);
    if (f->parsed()) return cmd_fit_scaling(fs_args);
    if (a->parsed()) {
      write_resolved(*a, an.out);
      return cmd_analyze(an);
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
