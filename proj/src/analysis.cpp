#include "sparselwe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sparselwe/error.hpp"

namespace sparselwe {

double log_binomial(std::size_t n, std::size_t k) {
  if (k > n) throw ParameterError("log_binomial: k > n");
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double hypergeom_pmf(std::size_t n, std::size_t c, std::size_t h, std::size_t k) {
  if (c > n || h > n) throw ParameterError("hypergeom_pmf: c and h must be <= n");
  if (k > std::min(c, h)) throw ParameterError("hypergeom_pmf: k exceeds min(c, h)");
  if (h - k > n - c) return 0.0;
  return std::exp(log_binomial(c, k) + log_binomial(n - c, h - k) - log_binomial(n, h));
}

RecoveryRateTable RecoveryRateTable::step(std::size_t K) {
  RecoveryRateTable t;
  t.step_ = K;
  return t;
}

void RecoveryRateTable::set(std::size_t h, std::size_t k, double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ParameterError("recovery rate must lie in [0, 1]");
  rates_[{h, k}] = rate;
}

bool RecoveryRateTable::has(std::size_t h, std::size_t k) const {
  return rates_.count({h, k}) != 0 || step_.has_value();
}

double RecoveryRateTable::rate(std::size_t h, std::size_t k) const {
  if (auto it = rates_.find({h, k}); it != rates_.end()) return it->second;
  if (step_) return k <= *step_ ? 1.0 : 0.0;
  throw ParameterError("recovery rate missing for h=" + std::to_string(h) +
                       ", k=" + std::to_string(k));
}

RecoveryRateTable RecoveryRateTable::from_csv(std::istream& in) {
  RecoveryRateTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (lineno == 1 && line.rfind("h", 0) == 0) continue;
    std::istringstream row(line);
    std::string hs, ks, rs;
    if (!std::getline(row, hs, ',') || !std::getline(row, ks, ',') || !std::getline(row, rs, ',')) {
      throw IoError("rate table line " + std::to_string(lineno) + ": expected h,k,rate");
    }
    try {
      t.set(std::stoul(hs), std::stoul(ks), std::stod(rs));
    } catch (const std::logic_error&) {
      throw IoError("rate table line " + std::to_string(lineno) + ": malformed value");
    }
  }
  return t;
}

void RecoveryRateTable::write_csv(std::ostream& out, std::size_t h, std::size_t k_max) const {
  out << "h,k,rate\n";
  for (std::size_t k = 0; k <= k_max; ++k) out << h << ',' << k << ',' << rate(h, k) << '\n';
}

void RecoveryRateTable::write_csv(std::ostream& out) const {
  out << "h,k,rate\n";
  for (const auto& [key, r] : rates_) out << key.first << ',' << key.second << ',' << r << '\n';
}

double expected_rate(std::size_t n, std::size_t c, std::size_t h, const RecoveryRateTable& rates) {
  if (c > n || h > n) throw ParameterError("expected_rate: c and h must be <= n");
  double e = 0.0;
  for (std::size_t k = 0; k <= std::min(c, h); ++k) {
    const double p = hypergeom_pmf(n, c, h, k);
    if (p == 0.0) continue;
    e += p * rates.rate(h, k);
  }
  return e;
}

std::string ScalingFit::to_json() const {
  nlohmann::json j;
  j["R"] = repetition ? nlohmann::json(*repetition) : nlohmann::json(nullptr);
  j["C"] = intercept;
  j["alpha"] = alpha;
  j["ci"] = ci ? nlohmann::json::array({ci->first, ci->second}) : nlohmann::json(nullptr);
  j["points"] = points;
  return j.dump();
}

ScalingFit ScalingFit::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ScalingFit f;
    if (j.contains("R") && !j["R"].is_null()) f.repetition = j["R"].get<double>();
    f.intercept = j.at("C").get<double>();
    f.alpha = j.at("alpha").get<double>();
    if (j.contains("ci") && !j["ci"].is_null()) {
      f.ci = std::make_pair(j["ci"].at(0).get<double>(), j["ci"].at(1).get<double>());
    }
    f.points = j.at("points").get<std::size_t>();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed scaling fit: ") + e.what());
  }
}

ScalingFit fit_scaling(const std::vector<ScalingPoint>& points) {
  if (points.size() < 2) throw ParameterError("fit_scaling: need at least two points");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : points) {
    if (!(p.data > 0.0 && p.attempts > 0.0)) throw ParameterError("fit_scaling: D and A must be > 0");
    mx += std::log(p.data);
    my += std::log(p.attempts);
  }
  const double m = static_cast<double>(points.size());
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : points) {
    const double dx = std::log(p.data) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(p.attempts) - my);
  }
  if (!(sxx > 1e-300)) throw ParameterError("fit_scaling: all D values are equal");
  const double slope = sxy / sxx;
  ScalingFit f;
  f.alpha = -slope;
  f.intercept = my - slope * mx;
  f.points = points.size();
  return f;
}

std::pair<double, double> bootstrap_ci(const std::vector<ScalingPoint>& points, SeededRng rng,
                                       std::size_t resamples, double level) {
  if (points.size() < 5) throw ParameterError("bootstrap_ci: need at least five points");
  if (resamples < 1) throw ParameterError("bootstrap_ci: resamples must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("bootstrap_ci: level must lie in (0, 1)");
  const std::size_t m = points.size();
  std::vector<double> x(m);
  std::vector<double> y(m);
  double mx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = std::log(points[i].data);
    y[i] = std::log(points[i].attempts);
    mx += x[i];
  }
  mx /= static_cast<double>(m);
  double sxx = 0.0;
  for (double v : x) sxx += (v - mx) * (v - mx);
  const ScalingFit base = fit_scaling(points);
  std::vector<double> fitted(m);
  std::vector<double> resid(m);
  double rmean = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    fitted[i] = base.intercept - base.alpha * x[i];
    const double lev = 1.0 / static_cast<double>(m) + (x[i] - mx) * (x[i] - mx) / sxx;
    resid[i] = (y[i] - fitted[i]) / std::sqrt(std::max(1e-12, 1.0 - lev));
    rmean += resid[i];
  }
  rmean /= static_cast<double>(m);
  for (auto& r : resid) r -= rmean;

  std::vector<double> alphas;
  alphas.reserve(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    // Slope of y* on the fixed design, y* = fitted + resampled residuals.
    double sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double ys = fitted[i] + resid[rng.uniform_below(m)];
      sxy += (x[i] - mx) * ys;
    }
    alphas.push_back(-sxy / sxx);
  }
  std::sort(alphas.begin(), alphas.end());
  // Percentile interval with linear interpolation between order statistics.
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(alphas.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, alphas.size() - 1);
    return alphas[lo] + (pos - static_cast<double>(lo)) * (alphas[hi] - alphas[lo]);
  };
  const double tail = (1.0 - level) / 2.0;
  return {quantile(tail), quantile(1.0 - tail)};
}

std::vector<ScalingPoint> read_scaling_csv(std::istream& in) {
  std::vector<ScalingPoint> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (lineno == 1 && (line[0] == 'D' || line[0] == 'd')) continue;
    std::istringstream row(line);
    std::string ds, as;
    if (!std::getline(row, ds, ',') || !std::getline(row, as, ',')) {
      throw IoError("scaling CSV line " + std::to_string(lineno) + ": expected D,A");
    }
    try {
      out.push_back({std::stod(ds), std::stod(as)});
    } catch (const std::logic_error&) {
      throw IoError("scaling CSV line " + std::to_string(lineno) + ": malformed value");
    }
  }
  return out;
}

double clueless_loss(double r, const PenaltyParams& params) {
  if (!(r > 0.0)) throw ParameterError("clueless_loss: r must be > 0");
  return 1.0 + (1.0 + params.alpha) * r * r + params.beta / (r * r);
}

double optimal_radius(const PenaltyParams& params) {
  if (!(params.beta > 0.0)) throw ParameterError("optimal_radius: beta must be > 0");
  if (!(params.alpha >= 0.0)) throw ParameterError("optimal_radius: alpha must be >= 0");
  return std::pow(params.beta / (1.0 + params.alpha), 0.25);
}

double learned_loss(double r, double eps) {
  if (!(r > 0.0)) throw ParameterError("learned_loss: r must be > 0");
  if (!(eps >= 0.0)) throw ParameterError("learned_loss: eps must be >= 0");
  const double sinc = eps == 0.0 ? 1.0 : std::sin(eps) / eps;
  return 1.0 + r * r - 2.0 * r * sinc;
}

}  // namespace sparselwe
