#include "sparselwe/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "sparselwe/error.hpp"

namespace sparselwe {

namespace {

constexpr double kFixedScale = 0x1p40;

}  // namespace

std::string_view to_string(ScoreSource source) {
  return source == ScoreSource::uniform ? "uniform" : "distinguisher";
}

CruelScores CruelScores::uniform(std::size_t c) {
  CruelScores s;
  s.c = c;
  s.scores.assign(c, 0.5);
  s.source = ScoreSource::uniform;
  s.meta = R"({"source":"uniform"})";
  return s;
}

void CruelScores::validate() const {
  if (scores.size() != c) {
    throw ParameterError("scores: expected " + std::to_string(c) + " values, got " +
                         std::to_string(scores.size()));
  }
  for (double v : scores) {
    if (!std::isfinite(v) || v < 0.0) throw ParameterError("scores must be finite and >= 0");
  }
}

void write_scores_json(std::ostream& out, const CruelScores& scores) {
  nlohmann::json j;
  j["c"] = scores.c;
  j["scores"] = scores.scores;
  auto meta = nlohmann::json::parse(scores.meta.empty() ? "{}" : scores.meta);
  if (!meta.is_object()) throw ParameterError("scores meta must be a JSON object");
  if (!meta.contains("source")) meta["source"] = to_string(scores.source);
  j["meta"] = meta;
  out << j.dump() << '\n';
}

CruelScores parse_scores_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    CruelScores s;
    s.c = j.at("c").get<std::size_t>();
    s.scores = j.at("scores").get<std::vector<double>>();
    if (j.contains("meta")) {
      const auto& meta = j["meta"];
      if (!meta.is_object()) throw IoError("scores: meta must be an object");
      s.meta = meta.dump();
      if (meta.contains("source") && meta["source"] == "uniform") s.source = ScoreSource::uniform;
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed scores record: ") + e.what());
  } catch (const ParameterError& e) {
    throw IoError(std::string("invalid scores record: ") + e.what());
  }
}

std::vector<CruelScores> read_scores(std::istream& in) {
  std::vector<CruelScores> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_scores_json(line));
  }
  return out;
}

std::vector<double> candidate_logits(const CruelScores& scores) {
  scores.validate();
  std::vector<double> out(scores.c, 0.0);
  if (scores.c == 0) return out;
  const auto [lo, hi] = std::minmax_element(scores.scores.begin(), scores.scores.end());
  const double span = *hi - *lo;
  if (!(span > 0.0)) return out;
  for (std::size_t i = 0; i < scores.c; ++i) {
    double p = (scores.scores[i] - *lo) / span;
    p = std::clamp(p, kLikelihoodClamp, 1.0 - kLikelihoodClamp);
    out[i] = std::log(p / (1.0 - p));
  }
  return out;
}

std::vector<std::int64_t> CruelCandidate::assignment(std::size_t c) const {
  std::vector<std::int64_t> a(c, 0);
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] >= c) throw DimensionError("candidate support outside the cruel region");
    a[support[i]] = signs.empty() ? 1 : signs[i];
  }
  return a;
}

double candidate_space_size(std::size_t c, std::size_t k_lo, std::size_t k_hi,
                            SecretKind alphabet) {
  double total = 0.0;
  for (std::size_t k = k_lo; k <= std::min(k_hi, c); ++k) {
    const double log_binom = std::lgamma(c + 1.0) - std::lgamma(k + 1.0) - std::lgamma(c - k + 1.0);
    double count = std::round(std::exp(log_binom));
    if (alphabet == SecretKind::ternary) count *= std::ldexp(1.0, static_cast<int>(k));
    total += count;
  }
  return total;
}

bool CandidateEnumerator::After::operator()(const State& x, const State& y) const {
  // priority_queue pops the largest element; "largest" = best.
  if (x.score != y.score) return x.score < y.score;
  return std::lexicographical_compare(y.support.begin(), y.support.end(), x.support.begin(),
                                      x.support.end());
}

CandidateEnumerator::CandidateEnumerator(const CruelScores& scores, EnumerationOptions options)
    : options_(options), c_(scores.c) {
  if (options_.k_lo > options_.k_hi) throw ParameterError("candidates: empty k range");
  if (options_.k_hi > c_) throw ParameterError("candidates: k_hi exceeds c");
  if (options_.limit == 0) throw ParameterError("candidates: limit must be >= 1");
  if (options_.alphabet == SecretKind::ternary && options_.k_hi > 62) {
    throw ParameterError("candidates: ternary sign patterns limited to k <= 62");
  }
  const auto logits = candidate_logits(scores);
  order_.resize(c_);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t x, std::size_t y) { return logits[x] > logits[y]; });
  fixed_.resize(c_);
  for (std::size_t p = 0; p < c_; ++p) {
    fixed_[p] = std::llround(logits[order_[p]] * kFixedScale);
  }
  for (std::size_t k = options_.k_lo; k <= options_.k_hi; ++k) {
    std::vector<std::size_t> root(k);
    std::iota(root.begin(), root.end(), std::size_t{0});
    heap_.push(make_state(std::move(root)));
  }
}

CandidateEnumerator::State CandidateEnumerator::make_state(std::vector<std::size_t> positions) const {
  State s;
  s.score = 0;
  s.support.reserve(positions.size());
  for (std::size_t p : positions) {
    s.score += fixed_[p];
    s.support.push_back(order_[p]);
  }
  std::sort(s.support.begin(), s.support.end());
  s.positions = std::move(positions);
  return s;
}

void CandidateEnumerator::push_children(const State& s) {
  const auto& p = s.positions;
  const std::size_t k = p.size();
  std::size_t m = 0;
  while (m < k && p[m] == m) ++m;
  auto free_after = [&](std::size_t j) {
    return j + 1 < k ? p[j] + 1 < p[j + 1] : p[j] + 1 < c_;
  };
  if (m >= 1 && free_after(m - 1)) {
    auto child = p;
    ++child[m - 1];
    heap_.push(make_state(std::move(child)));
  }
  if (m < k && free_after(m)) {
    auto child = p;
    ++child[m];
    heap_.push(make_state(std::move(child)));
  }
}

std::optional<CruelCandidate> CandidateEnumerator::next() {
  if (emitted_ >= options_.limit) return std::nullopt;
  if (!current_) {
    if (heap_.empty()) return std::nullopt;
    current_ = heap_.top();
    heap_.pop();
    push_children(*current_);
    sign_pattern_ = 0;
  }
  CruelCandidate cand;
  cand.support = current_->support;
  cand.score = static_cast<double>(current_->score) / kFixedScale;
  cand.rank = ++emitted_;
  const std::size_t k = cand.support.size();
  cand.signs.assign(k, 1);
  if (options_.alphabet == SecretKind::ternary) {
    for (std::size_t i = 0; i < k; ++i) {
      if ((sign_pattern_ >> (k - 1 - i)) & 1U) cand.signs[i] = -1;
    }
    if (++sign_pattern_ == (std::uint64_t{1} << k)) current_.reset();
  } else {
    current_.reset();
  }
  return cand;
}

std::vector<CruelCandidate> enumerate_candidates(const CruelScores& scores,
                                                 const EnumerationOptions& options) {
  CandidateEnumerator e(scores, options);
  std::vector<CruelCandidate> out;
  while (auto cand = e.next()) out.push_back(std::move(*cand));
  return out;
}

void write_candidates_header(std::ostream& out) { out << "rank,support,signs,score\n"; }

void write_candidate_row(std::ostream& out, const CruelCandidate& cand) {
  out << cand.rank << ',';
  for (std::size_t i = 0; i < cand.support.size(); ++i) out << (i ? " " : "") << cand.support[i];
  out << ',';
  for (std::size_t i = 0; i < cand.signs.size(); ++i) out << (i ? " " : "") << cand.signs[i];
  out << ',' << cand.score << '\n';
}

}  // namespace sparselwe
