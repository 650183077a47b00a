#include "sparselwe/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "sparselwe/error.hpp"

namespace sparselwe {

using Eigen::Index;

std::string_view to_string(RecoveryMethod method) {
  switch (method) {
    case RecoveryMethod::linear: return "linear";
    case RecoveryMethod::stepwise: return "stepwise";
    case RecoveryMethod::dual: return "dual";
    case RecoveryMethod::ternary: return "ternary";
  }
  return "?";
}

RecoveryMethod parse_recovery_method(std::string_view text) {
  if (text == "linear") return RecoveryMethod::linear;
  if (text == "stepwise") return RecoveryMethod::stepwise;
  if (text == "dual") return RecoveryMethod::dual;
  if (text == "ternary") return RecoveryMethod::ternary;
  throw ParameterError("unknown recovery method: " + std::string(text));
}

std::size_t CoolGuess::weight() const {
  return static_cast<std::size_t>(
      std::count_if(coeffs.begin(), coeffs.end(), [](std::int64_t v) { return v != 0; }));
}

void write_trace_csv(std::ostream& out, const CoolGuess& guess) {
  out << "step,mode,eliminated_index,normalized_coefficient\n";
  for (std::size_t i = 0; i < guess.steps.size(); ++i) {
    const auto& s = guess.steps[i];
    out << i << ',' << (s.mode == StepMode::dual ? "dual" : "primal") << ',' << s.index << ','
        << s.normalized_coefficient << '\n';
  }
}

// ---------------------------------------------------------------------------
// Designs and dense sources

CoolDesign::CoolDesign(Eigen::MatrixXd centered_cool, std::uint64_t q)
    : a_(std::move(centered_cool)), q_(q) {
  gram_ = Eigen::MatrixXd::Zero(a_.cols(), a_.cols());
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(a_.transpose());
  gram_ = gram_.selfadjointView<Eigen::Lower>();
}

std::shared_ptr<const CoolDesign> CoolDesign::from_samples(const SampleSet& samples,
                                                           std::size_t c) {
  if (c > samples.n()) throw ParameterError("cool design: c exceeds n");
  const std::size_t cool = samples.n() - c;
  Eigen::MatrixXd a(static_cast<Index>(samples.size()), static_cast<Index>(cool));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto row = samples.a(i);
    for (std::size_t j = 0; j < cool; ++j) {
      a(static_cast<Index>(i), static_cast<Index>(j)) =
          static_cast<double>(centered(row[c + j], samples.q()));
    }
  }
  return std::make_shared<const CoolDesign>(std::move(a), samples.q());
}

CoolInstance subtract_cruel(const SampleSet& samples, std::span<const std::int64_t> cruel_guess,
                            std::size_t h_cool, SecretKind alphabet,
                            std::shared_ptr<const CoolDesign> design) {
  const std::size_t c = cruel_guess.size();
  if (c > samples.n()) throw DimensionError("subtract_cruel: cruel guess longer than n");
  if (!design) design = CoolDesign::from_samples(samples, c);
  if (design->rows() != samples.size() || design->columns() != samples.n() - c) {
    throw DimensionError("subtract_cruel: design does not match the sample set");
  }
  if (h_cool > design->columns()) throw ParameterError("subtract_cruel: h_cool exceeds cool size");
  CoolInstance inst;
  inst.design = std::move(design);
  inst.h_cool = h_cool;
  inst.alphabet = alphabet;
  inst.b_cool.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Zq cruel_dot = dot_mod(samples.a(i).first(c), cruel_guess, samples.q());
    inst.b_cool[i] = sub_mod(samples.b(i), cruel_dot, samples.q());
  }
  return inst;
}

DenseCoolSource::DenseCoolSource(std::shared_ptr<const CoolDesign> design)
    : design_(std::move(design)) {}

DenseCoolSource::DenseCoolSource(std::shared_ptr<const CoolDesign> design, std::vector<Zq> b)
    : design_(std::move(design)) {
  add_instance(std::move(b));
}

std::size_t DenseCoolSource::add_instance(std::vector<Zq> b) {
  if (b.size() != design_->rows()) throw DimensionError("DenseCoolSource: b length differs");
  bs_.push_back(std::move(b));
  return bs_.size() - 1;
}

namespace {

Eigen::MatrixXd weight_matrix(std::span<const TargetRequest> requests, std::size_t columns) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Index>(columns),
                                            static_cast<Index>(requests.size()));
  for (std::size_t r = 0; r < requests.size(); ++r) {
    const auto& weights = requests[r].target.weights;
    if (weights.empty()) continue;
    if (weights.size() != columns) throw DimensionError("target weights differ from column count");
    for (std::size_t j = 0; j < columns; ++j) {
      w(static_cast<Index>(j), static_cast<Index>(r)) = weights[j];
    }
  }
  return w;
}

}  // namespace

Eigen::MatrixXd DenseCoolSource::cross_products(std::span<const TargetRequest> requests) {
  const auto& a = design_->a();
  const std::uint64_t q = design_->q();
  const Eigen::MatrixXd w = weight_matrix(requests, columns());
  // Integer-valued products, exact in double for |values| < 2^53.
  Eigen::MatrixXd y = a * w;
  for (std::size_t r = 0; r < requests.size(); ++r) {
    const auto& req = requests[r];
    if (req.instance >= bs_.size()) throw ParameterError("DenseCoolSource: unknown instance");
    const auto& b = bs_[req.instance];
    for (Index i = 0; i < y.rows(); ++i) {
      const auto raw = static_cast<std::int64_t>(std::llround(y(i, static_cast<Index>(r)))) +
                       req.target.b_sign * static_cast<std::int64_t>(b[static_cast<std::size_t>(i)]);
      y(i, static_cast<Index>(r)) = static_cast<double>(centered(reduce(raw, q), q));
    }
  }
  return a.transpose() * y;
}

// ---------------------------------------------------------------------------
// Solves

Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs) {
  if (gram.rows() != gram.cols() || gram.rows() != rhs.size()) {
    throw DimensionError("normal equations: shape mismatch");
  }
  if (gram.rows() == 0) return Eigen::VectorXd();
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success) {
    Eigen::VectorXd x = llt.solve(rhs);
    if (x.allFinite()) return x;
  }
  const double jitter = 1e-9 * gram.trace();
  Eigen::MatrixXd ridge = gram;
  ridge.diagonal().array() += jitter;
  llt.compute(ridge);
  if (llt.info() == Eigen::Success && jitter > 0.0) {
    Eigen::VectorXd x = llt.solve(rhs);
    if (x.allFinite()) return x;
  }
  std::ostringstream msg;
  msg << "normal equations are not positive definite (" << gram.rows() << " columns, trace "
      << gram.trace() << ", ridge " << jitter << "); the cool design is rank deficient";
  throw NumericalError(msg.str());
}

namespace {

// Indices of the k largest keys, ties to the lower index.
std::vector<std::size_t> top_k(const Eigen::VectorXd& keys, std::size_t k) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(keys.size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return keys(static_cast<Index>(x)) > keys(static_cast<Index>(y));
  });
  idx.resize(k);
  return idx;
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear baseline

LinearRegressor::LinearRegressor(const Eigen::MatrixXd& gram, std::size_t h_cool,
                                 SecretKind alphabet)
    : gram_(gram), h_cool_(h_cool), alphabet_(alphabet) {
  if (h_cool > static_cast<std::size_t>(gram.rows())) {
    throw ParameterError("linear recovery: h_cool exceeds the cool size");
  }
}

void LinearRegressor::step() {
  if (done()) throw std::logic_error("LinearRegressor: already finished");
  if (!cross_) throw std::logic_error("LinearRegressor: cross-products missing");
  const Eigen::VectorXd coef = solve_normal_equations(gram_, *cross_);
  CoolGuess g;
  g.method = RecoveryMethod::linear;
  g.coeffs.assign(static_cast<std::size_t>(gram_.rows()), 0);
  if (alphabet_ == SecretKind::binary) {
    for (std::size_t j : top_k(coef, h_cool_)) g.coeffs[j] = 1;
  } else {
    for (std::size_t j : top_k(coef.cwiseAbs(), h_cool_)) {
      g.coeffs[j] = coef(static_cast<Index>(j)) < 0 ? -1 : 1;
    }
  }
  result_ = std::move(g);
}

CoolGuess LinearRegressor::guess() const {
  if (!result_) throw std::logic_error("LinearRegressor: not finished");
  return *result_;
}

// ---------------------------------------------------------------------------
// Stepwise elimination

StepwiseEliminator::StepwiseEliminator(const Eigen::MatrixXd& gram, std::size_t h_cool,
                                       StepwiseOptions options)
    : columns_(static_cast<std::size_t>(gram.rows())),
      h_cool_(h_cool),
      options_(std::move(options)),
      gram_active_(gram),
      active_(columns_),
      guess_(columns_, 0),
      dual_one_(columns_, false),
      ones_(h_cool),
      zeros_(columns_ - std::min(h_cool, columns_)) {
  if (gram.rows() != gram.cols()) throw DimensionError("stepwise: Gram matrix is not square");
  if (h_cool > columns_) throw ParameterError("stepwise: h_cool exceeds the cool size");
  if (options_.ternary) options_.use_dual = false;
  if (options_.stop_range) {
    if (options_.use_dual) throw ParameterError("stepwise: stop ranges need the primal-only loop");
    if (options_.stop_range->first > options_.stop_range->second) {
      throw ParameterError("stepwise: empty stop range");
    }
  }
  std::iota(active_.begin(), active_.end(), std::size_t{0});
  refresh_target();
  finish_if_possible();
}

bool StepwiseEliminator::dual_now() const { return options_.use_dual && ones_ > zeros_; }

bool StepwiseEliminator::looping() const {
  return options_.use_dual ? !active_.empty() : active_.size() > h_cool_;
}

bool StepwiseEliminator::done() const { return final_.has_value(); }

bool StepwiseEliminator::ready() const { return cross_target_ && *cross_target_ == target_; }

void StepwiseEliminator::supply(const Eigen::VectorXd& cross) {
  if (static_cast<std::size_t>(cross.size()) != columns_) {
    throw DimensionError("stepwise: cross-product length differs from column count");
  }
  cross_ = cross;
  cross_target_ = target_;
}

void StepwiseEliminator::refresh_target() {
  TargetSpec t;
  const bool any_dual_one = std::find(dual_one_.begin(), dual_one_.end(), true) != dual_one_.end();
  if (dual_now()) {
    // Flipped residual: sum of the remaining columns minus b_primal, where
    // b_primal = b - sum of the columns already set to 1.
    t.b_sign = -1;
    t.weights.assign(columns_, options_.full_rowsum_dual ? 1 : 0);
    for (std::size_t j : active_) t.weights[j] = 1;
    for (std::size_t j = 0; j < columns_; ++j) {
      if (dual_one_[j]) t.weights[j] += 1;
    }
  } else if (any_dual_one) {
    t.b_sign = 1;
    t.weights.assign(columns_, 0);
    for (std::size_t j = 0; j < columns_; ++j) {
      if (dual_one_[j]) t.weights[j] = -1;
    }
  }
  target_ = std::move(t);
}

void StepwiseEliminator::delete_active(std::size_t local) {
  const auto k = static_cast<Index>(active_.size());
  const auto i = static_cast<Index>(local);
  if (i < k - 1) {
    const Index tail = k - 1 - i;
    gram_active_.block(i, 0, tail, k) = gram_active_.block(i + 1, 0, tail, k).eval();
    gram_active_.block(0, i, k, tail) = gram_active_.block(0, i + 1, k, tail).eval();
  }
  gram_active_.conservativeResize(k - 1, k - 1);
  active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(local));
}

Eigen::VectorXd StepwiseEliminator::solve_active() const {
  Eigen::VectorXd rhs(static_cast<Index>(active_.size()));
  for (std::size_t l = 0; l < active_.size(); ++l) {
    rhs(static_cast<Index>(l)) = cross_(static_cast<Index>(active_[l]));
  }
  return solve_normal_equations(gram_active_, rhs);
}

CoolGuess StepwiseEliminator::snapshot(bool need_signs) const {
  CoolGuess g;
  g.method = options_.ternary ? RecoveryMethod::ternary
                              : (options_.use_dual ? RecoveryMethod::dual : RecoveryMethod::stepwise);
  g.coeffs = guess_;
  g.steps = steps_;
  if (!active_.empty() && need_signs) {
    const Eigen::VectorXd coef = solve_active();
    for (std::size_t l = 0; l < active_.size(); ++l) {
      g.coeffs[active_[l]] = coef(static_cast<Index>(l)) < 0 ? -1 : 1;
    }
  } else {
    for (std::size_t j : active_) g.coeffs[j] = 1;
  }
  return g;
}

void StepwiseEliminator::maybe_snapshot_range() {
  if (!options_.stop_range) return;
  const auto [lo, hi] = *options_.stop_range;
  const std::size_t k = active_.size();
  if (k < lo || k > hi) return;
  if (options_.ternary && !active_.empty() && !ready()) return;
  const std::size_t taken = range_guesses_.size();
  // One guess per size, taken in decreasing size order.
  if (taken == 0 || range_guesses_.back().weight() != k) {
    range_guesses_.push_back(snapshot(options_.ternary));
  }
}

void StepwiseEliminator::finish_if_possible() {
  if (done() || looping()) return;
  if (options_.ternary && !active_.empty() && !ready()) return;  // signs need one more solve
  maybe_snapshot_range();
  final_ = snapshot(options_.ternary).coeffs;
}

void StepwiseEliminator::step() {
  if (done()) throw std::logic_error("stepwise: already finished");
  if (!ready()) throw std::logic_error("stepwise: cross-products missing for the current target");
  if (!looping()) {
    finish_if_possible();
    return;
  }
  maybe_snapshot_range();

  const bool dual = dual_now();
  Eigen::VectorXd coef = solve_active();
  if (options_.record_coefficients) {
    coef_history_.push_back(coef);
    active_history_.push_back(active_);
    target_history_.push_back(target_);
  }
  const double scale = coef.cwiseAbs().maxCoeff();
  if (scale > 0.0) coef /= scale;
  Index local = 0;
  coef.cwiseAbs().minCoeff(&local);
  const std::size_t global = active_[static_cast<std::size_t>(local)];
  steps_.push_back({global, dual ? StepMode::dual : StepMode::primal, coef(local)});

  if (dual) {
    guess_[global] = 1;
    dual_one_[global] = true;
    --ones_;
  } else {
    --zeros_;
  }
  delete_active(static_cast<std::size_t>(local));
  refresh_target();
  finish_if_possible();
}

CoolGuess StepwiseEliminator::guess() const {
  if (!final_) throw std::logic_error("stepwise: not finished");
  CoolGuess g;
  g.method = options_.ternary ? RecoveryMethod::ternary
                              : (options_.use_dual ? RecoveryMethod::dual : RecoveryMethod::stepwise);
  g.coeffs = *final_;
  g.steps = steps_;
  return g;
}

// ---------------------------------------------------------------------------
// Drivers

std::size_t run_lockstep(CrossProductSource& source, std::span<const LockstepTask> tasks,
                         const std::function<void(std::size_t, std::size_t)>& on_round) {
  std::size_t rounds = 0;
  for (;;) {
    std::vector<std::size_t> pending;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      auto* task = tasks[t].task;
      while (!task->done() && task->ready()) task->step();
      if (!task->done()) pending.push_back(t);
    }
    if (pending.empty()) break;

    std::vector<TargetRequest> requests;
    std::vector<std::size_t> slot(pending.size());
    for (std::size_t p = 0; p < pending.size(); ++p) {
      const auto& lt = tasks[pending[p]];
      const TargetSpec& target = lt.task->target();
      auto it = std::find_if(requests.begin(), requests.end(), [&](const TargetRequest& r) {
        return r.instance == lt.instance && r.target == target;
      });
      if (it == requests.end()) {
        requests.push_back({lt.instance, target});
        slot[p] = requests.size() - 1;
      } else {
        slot[p] = static_cast<std::size_t>(it - requests.begin());
      }
    }
    const Eigen::MatrixXd cross = source.cross_products(requests);
    ++rounds;
    for (std::size_t p = 0; p < pending.size(); ++p) {
      tasks[pending[p]].task->supply(cross.col(static_cast<Index>(slot[p])));
    }
    if (on_round) on_round(rounds, pending.size());
  }
  return rounds;
}

namespace {

CoolGuess run_single(CoolRecoveryTask& task, DenseCoolSource& source) {
  const LockstepTask lt{0, &task};
  run_lockstep(source, std::span<const LockstepTask>(&lt, 1));
  return task.guess();
}

void check_instance(const CoolInstance& inst) {
  if (!inst.design) throw ParameterError("cool instance without design");
  if (inst.h_cool > inst.columns()) throw ParameterError("cool instance: h_cool exceeds cool size");
}

}  // namespace

CoolGuess linear_cool_recovery(const CoolInstance& inst) {
  check_instance(inst);
  DenseCoolSource source(inst.design, inst.b_cool);
  LinearRegressor task(source.gram(), inst.h_cool, inst.alphabet);
  return run_single(task, source);
}

CoolGuess stepwise_cool_recovery(const CoolInstance& inst, bool use_dual, bool full_rowsum_dual) {
  check_instance(inst);
  if (inst.alphabet != SecretKind::binary) {
    throw ParameterError("stepwise recovery is binary; use ternary_stepwise");
  }
  DenseCoolSource source(inst.design, inst.b_cool);
  StepwiseOptions opts;
  opts.use_dual = use_dual;
  opts.full_rowsum_dual = full_rowsum_dual;
  StepwiseEliminator task(source.gram(), inst.h_cool, opts);
  return run_single(task, source);
}

CoolGuess ternary_stepwise(const CoolInstance& inst) {
  check_instance(inst);
  if (inst.alphabet != SecretKind::ternary) throw ParameterError("ternary_stepwise: binary instance");
  DenseCoolSource source(inst.design, inst.b_cool);
  StepwiseOptions opts;
  opts.ternary = true;
  StepwiseEliminator task(source.gram(), inst.h_cool, opts);
  return run_single(task, source);
}

std::vector<CoolGuess> stepwise_cool_recovery_range(const CoolInstance& inst, std::size_t h_lo,
                                                    std::size_t h_hi, bool use_dual) {
  check_instance(inst);
  if (h_lo > h_hi) throw ParameterError("stepwise range: h_lo > h_hi");
  h_hi = std::min(h_hi, inst.columns());
  if (h_lo > h_hi) return {};
  const bool ternary = inst.alphabet == SecretKind::ternary;
  DenseCoolSource source(inst.design, inst.b_cool);
  std::vector<CoolGuess> out;
  if (use_dual && !ternary) {
    // Mode switching depends on h, so each weight gets its own run.
    for (std::size_t h = h_lo; h <= h_hi; ++h) {
      StepwiseOptions opts;
      StepwiseEliminator task(source.gram(), h, opts);
      out.push_back(run_single(task, source));
    }
    return out;
  }
  StepwiseOptions opts;
  opts.use_dual = false;
  opts.ternary = ternary;
  opts.stop_range = std::make_pair(h_lo, h_hi);
  StepwiseEliminator task(source.gram(), h_lo, opts);
  run_single(task, source);
  out = task.range_guesses();
  return out;
}

CoolGuess recover_cool(const CoolInstance& inst, RecoveryMethod method) {
  switch (method) {
    case RecoveryMethod::linear: return linear_cool_recovery(inst);
    case RecoveryMethod::stepwise: return stepwise_cool_recovery(inst, false);
    case RecoveryMethod::dual: return stepwise_cool_recovery(inst, true);
    case RecoveryMethod::ternary: return ternary_stepwise(inst);
  }
  throw ParameterError("unknown recovery method");
}

}  // namespace sparselwe
