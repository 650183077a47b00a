#include "sparselwe/sweep.hpp"

#include <memory>
#include <sstream>

#include "sparselwe/error.hpp"
#include "sparselwe/synthetic_source.hpp"

namespace sparselwe {

std::string CellSpec::key() const {
  std::ostringstream k;
  k << "n" << profile.n << "_q" << profile.q << "_c" << profile.c << "_hc" << h_cool << "_h" << h_total
    << "_rows" << rows << "_" << to_string(alphabet);
  return k.str();
}

Secret planted_secret(const ReductionProfile& profile, std::size_t h_cool, std::size_t h_total,
                      SecretKind alphabet, SeededRng rng) {
  if (h_cool > h_total) throw ParameterError("planted_secret: h_cool exceeds h");
  const std::size_t cool = profile.n - profile.c;
  if (h_cool > cool || h_total - h_cool > profile.c) {
    throw ParameterError("planted_secret: weights do not fit the cruel/cool split");
  }
  const auto cruel = sample_secret(profile.c, h_total - h_cool, alphabet, rng.substream("cruel"));
  const auto cool_part = sample_secret(cool, h_cool, alphabet, rng.substream("cool"));
  std::vector<std::int64_t> v(cruel.coeffs().begin(), cruel.coeffs().end());
  v.insert(v.end(), cool_part.coeffs().begin(), cool_part.coeffs().end());
  return Secret(alphabet, std::move(v));
}

CellResult run_cell(const CellSpec& spec, const std::function<void(std::size_t, std::size_t)>& on_round) {
  spec.profile.validate();
  if (spec.rows == 0) throw ParameterError("run_cell: rows must be >= 1");
  if (spec.secrets == 0) throw ParameterError("run_cell: secrets must be >= 1");
  if (spec.methods.empty()) throw ParameterError("run_cell: no methods");
  for (auto m : spec.methods) {
    if (spec.alphabet == SecretKind::ternary && (m == RecoveryMethod::stepwise || m == RecoveryMethod::dual)) {
      throw ParameterError("run_cell: ternary secrets use the linear or ternary methods");
    }
    if (spec.alphabet == SecretKind::binary && m == RecoveryMethod::ternary) {
      throw ParameterError("run_cell: the ternary method needs ternary secrets");
    }
  }

  const SeededRng root = SeededRng(spec.seed).substream(spec.key());
  SyntheticCoolSource source(spec.profile, root.substream("a"), spec.rows);
  std::vector<Secret> secrets;
  for (std::size_t i = 0; i < spec.secrets; ++i) {
    secrets.push_back(planted_secret(spec.profile, spec.h_cool, spec.h_total, spec.alphabet,
                                     root.substream("secret").substream(i)));
    source.add_instance(secrets.back(), root.substream("eps").substream(i));
  }

  const Eigen::MatrixXd& gram = source.gram();
  std::vector<std::unique_ptr<CoolRecoveryTask>> tasks;
  std::vector<LockstepTask> lockstep;
  std::vector<RecoveryMethod> task_method;
  for (std::size_t i = 0; i < spec.secrets; ++i) {
    for (auto m : spec.methods) {
      if (m == RecoveryMethod::linear) {
        tasks.push_back(std::make_unique<LinearRegressor>(gram, spec.h_cool, spec.alphabet));
      } else {
        StepwiseOptions opts;
        opts.use_dual = m == RecoveryMethod::dual;
        opts.ternary = m == RecoveryMethod::ternary;
        tasks.push_back(std::make_unique<StepwiseEliminator>(gram, spec.h_cool, opts));
      }
      lockstep.push_back({i, tasks.back().get()});
      task_method.push_back(m);
    }
  }
  run_lockstep(source, lockstep, on_round);

  CellResult result;
  result.secrets = spec.secrets;
  for (auto m : spec.methods) result.successes[m] = 0;
  const std::size_t c = spec.profile.c;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto& truth = secrets[lockstep[t].instance].coeffs();
    const auto guess = tasks[t]->guess();
    if (std::equal(guess.coeffs.begin(), guess.coeffs.end(), truth.begin() + static_cast<std::ptrdiff_t>(c))) {
      ++result.successes[task_method[t]];
    }
  }
  result.passes = source.passes();
  return result;
}

}  // namespace sparselwe
