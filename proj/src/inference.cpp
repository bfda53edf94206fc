#include "adopt/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace adopt {

HiddenSampler parse_hidden_sampler(const std::string& s) {
  if (s == "rqmc") return HiddenSampler::Rqmc;
  if (s == "iid") return HiddenSampler::Iid;
  throw ValidationError("unknown sampler '" + s + "' (expected rqmc|iid)");
}

void InferenceConfig::validate() const {
  if (!(sigma > 0.0 && sigma < 1.0)) throw ValidationError("sigma must lie in (0, 1)");
  if (min_samples < 1) throw ValidationError("min_samples must be >= 1");
  if (max_samples < min_samples) throw ValidationError("max_samples must be >= min_samples");
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Log-odds of class 1 over class 0 without the hidden term.
double observed_log_odds(const ParamVector& t, const TestPoint& q) {
  double l[2];
  Coords x = coords_of(q);
  for (int a = 0; a < 2; ++a) {
    if (t.prior[a] <= 0.0) {
      l[a] = kNegInf;
      continue;
    }
    l[a] = std::log(t.prior[a]) + std::log(t.hidden[a]);
    for (int f = 0; f < t.factors; ++f) l[a] += std::log(t.rate[a][f]) - t.rate[a][f] * x[f];
  }
  if (l[1] == kNegInf) return kNegInf;
  if (l[0] == kNegInf) return std::numeric_limits<double>::infinity();
  return l[1] - l[0];
}

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double van_der_corput(std::uint64_t k) {
  double v = 0.0, scale = 0.5;
  while (k) {
    if (k & 1u) v += scale;
    k >>= 1;
    scale *= 0.5;
  }
  return v;
}

}  // namespace

double posterior_given_h(const ParamVector& theta, const TestPoint& test, double h) {
  double base = observed_log_odds(theta, test);
  if (std::isinf(base)) return base > 0 ? 1.0 : 0.0;
  return logistic(base - (theta.hidden[1] - theta.hidden[0]) * h);
}

double sample_hidden(const ParamVector& theta, std::mt19937_64& rng) {
  int a = unit_uniform(rng) < theta.prior[1] ? 1 : 0;
  return -std::log1p(-unit_uniform(rng)) / theta.hidden[a];
}

InferenceTrace infer_probability_traced(const ParamVector& theta, const TestPoint& test,
                                        const InferenceConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  InferenceTrace out;
  double base = observed_log_odds(theta, test);
  if (std::isinf(base)) {
    out.probability = base > 0 ? 1.0 : 0.0;
    return out;
  }
  double slope = theta.hidden[1] - theta.hidden[0];
  auto at = [&](double h) { return logistic(base - slope * h); };
  auto component = [&](int a, double v) { return at(-std::log1p(-v) / theta.hidden[a]); };
  double shift = unit_uniform(rng);
  double sum = 0.0, checkpoint_mean = -1.0;
  std::size_t n = 0;
  for (;;) {
    double value;
    if (cfg.sampler == HiddenSampler::Rqmc) {
      // Each component integrated on its own, with the antithetic point 1 - u.
      double u = van_der_corput(n) + shift;
      if (u >= 1.0) u -= 1.0;
      double w = 1.0 - u;
      if (w >= 1.0) w = std::nextafter(1.0, 0.0);
      value = 0.0;
      for (int a = 0; a < 2; ++a)
        if (theta.prior[a] > 0.0) value += theta.prior[a] * 0.5 * (component(a, u) + component(a, w));
    } else {
      value = at(sample_hidden(theta, rng));
    }
    double pre_mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
    sum += value;
    ++n;
    double mean = sum / static_cast<double>(n);
    if (n >= cfg.max_samples) break;
    bool power_of_two = (n & (n - 1)) == 0;
    if (n >= cfg.min_samples) {
      if (mean == 0.0) break;
      if (cfg.sampler == HiddenSampler::Iid) {
        if (std::abs(mean - pre_mean) / mean <= cfg.sigma) break;
      } else if (power_of_two && checkpoint_mean >= 0.0 &&
                 std::abs(mean - checkpoint_mean) / mean <= cfg.sigma) {
        break;
      }
    }
    if (power_of_two) checkpoint_mean = mean;
  }
  out.probability = std::clamp(sum / static_cast<double>(n), 0.0, 1.0);
  out.samples = n;
  return out;
}

double infer_probability(const ParamVector& theta, const TestPoint& test, const InferenceConfig& cfg,
                         std::mt19937_64& rng) {
  return infer_probability_traced(theta, test, cfg, rng).probability;
}

}  // namespace adopt
