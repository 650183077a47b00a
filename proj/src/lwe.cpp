#include "sparselwe/lwe.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "sparselwe/error.hpp"

namespace sparselwe {

LweParams::LweParams(std::size_t n_, std::uint64_t q_, double sigma)
    : n(n_), q(q_), sigma_err(sigma) {
  validate();
}

void LweParams::validate() const {
  if (n < 1) throw ParameterError("LweParams: n must be >= 1");
  if (q < 2 || q > kMaxModulus) throw ParameterError("LweParams: q must lie in [2, 2^41]");
  if (!(sigma_err >= 0.0)) throw ParameterError("LweParams: sigma_err must be >= 0");
  if (!(sigma_err < static_cast<double>(q) / 16.0)) {
    throw ParameterError("LweParams: sigma_err must be < q/16");
  }
}

std::string_view to_string(SecretKind kind) {
  return kind == SecretKind::binary ? "binary" : "ternary";
}

SecretKind parse_secret_kind(std::string_view text) {
  if (text == "binary") return SecretKind::binary;
  if (text == "ternary") return SecretKind::ternary;
  throw ParameterError("unknown secret kind: " + std::string(text));
}

Secret::Secret(SecretKind kind, std::vector<std::int64_t> coeffs,
               std::optional<std::uint64_t> seed)
    : kind_(kind), coeffs_(std::move(coeffs)), seed_(seed) {
  for (std::int64_t v : coeffs_) {
    const bool ok = kind_ == SecretKind::binary ? (v == 0 || v == 1) : (v >= -1 && v <= 1);
    if (!ok) {
      throw ParameterError("Secret: coefficient " + std::to_string(v) + " outside the " +
                           std::string(to_string(kind_)) + " alphabet");
    }
    if (v != 0) ++h_;
  }
}

Secret Secret::zero(std::size_t n, SecretKind kind) {
  return Secret(kind, std::vector<std::int64_t>(n, 0));
}

std::size_t Secret::cruel_weight(std::size_t c) const {
  std::size_t k = 0;
  for (std::size_t j = 0; j < std::min(c, coeffs_.size()); ++j) k += coeffs_[j] != 0;
  return k;
}

Secret sample_secret(std::size_t n, std::size_t h, SecretKind kind, SeededRng rng) {
  if (h > n) {
    throw ParameterError("sample_secret: h=" + std::to_string(h) + " exceeds n=" +
                         std::to_string(n));
  }
  const std::uint64_t seed = rng.seed();
  std::vector<std::size_t> pos(n);
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  // Partial Fisher-Yates: the first h entries are a uniform h-subset.
  for (std::size_t i = 0; i < h; ++i) {
    const std::size_t j = i + rng.uniform_below(n - i);
    std::swap(pos[i], pos[j]);
  }
  std::vector<std::int64_t> coeffs(n, 0);
  for (std::size_t i = 0; i < h; ++i) {
    coeffs[pos[i]] = (kind == SecretKind::ternary && (rng() >> 63) != 0) ? -1 : 1;
  }
  return Secret(kind, std::move(coeffs), seed);
}

void write_secret_json(std::ostream& out, const Secret& secret, std::uint64_t q) {
  nlohmann::json j;
  j["n"] = secret.n();
  j["q"] = q;
  j["kind"] = to_string(secret.kind());
  j["h"] = secret.h();
  j["coeffs"] = std::vector<std::int64_t>(secret.coeffs().begin(), secret.coeffs().end());
  j["seed"] = secret.seed() ? nlohmann::json(*secret.seed()) : nlohmann::json(nullptr);
  out << j.dump() << '\n';
}

SecretRecord parse_secret_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    std::optional<std::uint64_t> seed;
    if (j.contains("seed") && !j["seed"].is_null()) seed = j["seed"].get<std::uint64_t>();
    Secret s(parse_secret_kind(j.at("kind").get<std::string>()),
             j.at("coeffs").get<std::vector<std::int64_t>>(), seed);
    if (s.n() != j.at("n").get<std::size_t>()) throw IoError("secret: n does not match coeffs");
    if (s.h() != j.at("h").get<std::size_t>()) throw IoError("secret: h does not match coeffs");
    return {std::move(s), j.at("q").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed secret record: ") + e.what());
  }
}

std::vector<SecretRecord> read_secrets(std::istream& in) {
  std::vector<SecretRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_secret_json(line));
  }
  return out;
}

SampleSet::SampleSet(LweParams params, std::optional<std::size_t> c_hint)
    : params_(params), c_hint_(c_hint) {
  params_.validate();
  if (c_hint_ && *c_hint_ > params_.n) throw ParameterError("SampleSet: c_hint exceeds n");
}

void SampleSet::reserve(std::size_t rows) {
  a_.reserve(rows * params_.n);
  b_.reserve(rows);
}

void SampleSet::push_back(std::span<const Zq> a, Zq b) {
  if (a.size() != params_.n) throw DimensionError("SampleSet: row length differs from n");
  for (Zq v : a) {
    if (v >= params_.q) throw ParameterError("SampleSet: coordinate outside [0, q)");
  }
  if (b >= params_.q) throw ParameterError("SampleSet: b outside [0, q)");
  a_.insert(a_.end(), a.begin(), a.end());
  b_.push_back(b);
}

std::span<Zq> SampleSet::append_row(Zq b) {
  a_.resize(a_.size() + params_.n, 0);
  b_.push_back(b);
  return a(b_.size() - 1);
}

SampleSet SampleSet::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw ParameterError("SampleSet::slice: bad range");
  SampleSet out(params_, c_hint_);
  out.a_.assign(a_.begin() + static_cast<std::ptrdiff_t>(begin * params_.n),
                a_.begin() + static_cast<std::ptrdiff_t>(end * params_.n));
  out.b_.assign(b_.begin() + static_cast<std::ptrdiff_t>(begin),
                b_.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

SampleSet gen_unreduced(const LweParams& params, const Secret& secret, std::size_t count,
                        bool noiseless, const SeededRng& rng) {
  params.validate();
  if (count < 1) throw ParameterError("gen_unreduced: count must be >= 1");
  if (secret.n() != params.n) throw DimensionError("gen_unreduced: secret length differs from n");
  SampleSet out(params);
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SeededRng row_rng = rng.substream(i);
    auto a = out.append_row(0);
    for (auto& v : a) v = row_rng.uniform_below(params.q);
    const std::int64_t e = noiseless ? 0 : sample_discrete_gaussian(params.sigma_err, row_rng);
    const Zq dot = dot_mod(a, secret.coeffs(), params.q);
    out.set_b(i, reduce(static_cast<i128>(dot) + e, params.q));
  }
  return out;
}

std::vector<std::int64_t> centered_residuals(const SampleSet& samples, const Secret& secret) {
  if (secret.n() != samples.n()) throw DimensionError("residuals: secret length differs from n");
  std::vector<std::int64_t> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Zq dot = dot_mod(samples.a(i), secret.coeffs(), samples.q());
    out[i] = centered(sub_mod(samples.b(i), dot, samples.q()), samples.q());
  }
  return out;
}

}  // namespace sparselwe
