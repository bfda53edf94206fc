#include "adopt/lemnb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace adopt {

double RateClamp::operator()(double rate) const {
  if (std::isnan(rate)) return hi;
  return std::clamp(rate, lo, hi);
}

void Diagnostics::merge(const Diagnostics& o) {
  if (o.updates > 0) min_weight = updates > 0 ? std::min(min_weight, o.min_weight) : o.min_weight;
  updates += o.updates;
  hidden_holds += o.hidden_holds;
  empty_class_holds += o.empty_class_holds;
  nonpositive_weights += o.nonpositive_weights;
}

Coords coords_of(const PowerRecord& r) { return {r.I, r.E, r.S, r.Z}; }
Coords coords_of(const TestPoint& q) { return {q.I, q.E, q.S, q.Z}; }

namespace {

double squared_distance(const Coords& a, const Coords& b, int factors) {
  double s = 0.0;
  for (int f = 0; f < factors; ++f) s += (a[f] - b[f]) * (a[f] - b[f]);
  return s;
}

// Third moment terms of E[w H_i] for class a: E[w H_i] = (c_i + kappa) / λ_a - beta_a.
double hidden_beta(const ParamVector& bar, int a) {
  double la = bar.hidden[a], lb = bar.hidden[1 - a];
  double pa = bar.prior[a], pb = bar.prior[1 - a];
  return (6.0 - 2.0 * pa) / (la * la * la) - 4.0 * pb / (la * la * lb) + 2.0 * pb / (la * lb * lb);
}

double hidden_kappa(const ParamVector& bar) {
  return 2.0 / (bar.hidden[0] * bar.hidden[0]) + 2.0 / (bar.hidden[1] * bar.hidden[1]);
}

// Σ_a E[w_i H_i] over the records of class a.
double hidden_moment(const ClassSums& c, const ParamVector& bar, int a) {
  return (c.sum_c + hidden_kappa(bar) * c.count) / bar.hidden[a] - hidden_beta(bar, a) * c.count;
}

}  // namespace

std::array<double, 2> weight_offsets(const ParamVector& bar) {
  double l0 = bar.hidden[0], l1 = bar.hidden[1];
  double p0 = bar.prior[0], p1 = bar.prior[1];
  return {2.0 * p0 / (l1 * l1) + 2.0 * p1 / (l0 * l1), 2.0 * p1 / (l0 * l0) + 2.0 * p0 / (l0 * l1)};
}

ParamVector init_observed(const SampleSums& s, const RateClamp& clamp) {
  ParamVector p;
  p.factors = s.factors;
  double n = s.cls[0].count + s.cls[1].count;
  p.prior[1] = n > 0 ? s.cls[1].count / n : 0.5;
  p.prior[0] = 1.0 - p.prior[1];
  for (int a = 0; a < 2; ++a) {
    const ClassSums& c = s.cls[a];
    for (int f = 0; f < kMaxFactors; ++f) {
      if (c.count == 0.0 || f >= s.factors) {
        p.rate[a][f] = 1.0;
      } else {
        p.rate[a][f] = c.sum_f[f] > 0.0 ? clamp(c.count / c.sum_f[f]) : clamp.hi;
      }
    }
  }
  return p;
}

ParamVector init_observed(std::span<const PowerRecord> sample, int factors, const RateClamp& clamp) {
  if (sample.empty()) throw ValidationError("cannot initialize from an empty training sample");
  SampleSums s;
  s.factors = factors;
  for (const auto& r : sample) {
    ClassSums& c = s.cls[r.A == 1 ? 1 : 0];
    c.count += 1.0;
    Coords x = coords_of(r);
    for (int f = 0; f < factors; ++f) c.sum_f[f] += x[f];
  }
  return init_observed(s, clamp);
}

ParamVector init_hidden(ParamVector p, int case_k, double eps, const RateClamp& clamp) {
  if (case_k < 1 || case_k > 3) throw std::invalid_argument("initialization case must be 1, 2, or 3");
  for (int a = 0; a < 2; ++a) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
    for (int f = 0; f < 3; ++f) {
      double mean = 1.0 / p.rate[a][f];
      lo = std::min(lo, mean);
      hi = std::max(hi, mean);
      sum += mean;
    }
    double mean_h = case_k == 1 ? hi * (1.0 + eps) : case_k == 2 ? (sum / 3.0) * (1.0 + eps) : lo * (1.0 - eps);
    p.hidden[a] = clamp(1.0 / mean_h);
  }
  return p;
}

double draw_epsilon(int case_k, std::mt19937_64& rng) {
  double u = unit_uniform(rng);
  return case_k == 2 ? 0.01 * u - 0.005 : 0.01 * u;
}

WeightContext compute_K(std::span<const PowerRecord> sample, const TestPoint& test, const ParamVector& bar) {
  WeightContext ctx;
  Coords q = coords_of(test);
  ctx.C.reserve(sample.size());
  for (const auto& r : sample) {
    double c = squared_distance(coords_of(r), q, bar.factors);
    ctx.C.push_back(c);
    ctx.c_max = std::max(ctx.c_max, c);
  }
  ctx.K = ctx.c_max + hidden_kappa(bar);
  auto alpha = weight_offsets(bar);
  ctx.Q.reserve(sample.size());
  ctx.R.reserve(sample.size());
  for (double c : ctx.C) {
    ctx.Q.push_back(ctx.c_max - c + alpha[1]);
    ctx.R.push_back(ctx.c_max - c + alpha[0]);
  }
  return ctx;
}

SampleSums sums_from_context(std::span<const PowerRecord> sample, const WeightContext& ctx, int factors) {
  SampleSums s;
  s.factors = factors;
  s.c_max = ctx.c_max;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    ClassSums& c = s.cls[sample[i].A == 1 ? 1 : 0];
    double ci = ctx.c_max - ctx.C[i];
    Coords x = coords_of(sample[i]);
    c.count += 1.0;
    c.sum_c += ci;
    for (int f = 0; f < factors; ++f) {
      c.sum_f[f] += x[f];
      c.sum_cf[f] += ci * x[f];
    }
  }
  return s;
}

ParamVector update_from_sums(const SampleSums& s, const ParamVector& bar, const RateClamp& clamp,
                             Diagnostics* diag) {
  auto alpha = weight_offsets(bar);
  ParamVector out = bar;
  out.factors = s.factors;
  std::array<double, 2> W{};
  for (int a = 0; a < 2; ++a) W[a] = s.cls[a].sum_c + alpha[a] * s.cls[a].count;

  if (diag) {
    double min_w = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 2; ++a)
      if (s.cls[a].count > 0) min_w = std::min(min_w, alpha[a]);
    if (min_w <= 0.0) ++diag->nonpositive_weights;
    if (std::isfinite(min_w)) diag->min_weight = diag->updates > 0 ? std::min(diag->min_weight, min_w) : min_w;
    ++diag->updates;
  }

  double total = W[0] + W[1];
  if (total > 0.0) {
    out.prior[1] = W[1] / total;
    out.prior[0] = 1.0 - out.prior[1];
  }
  for (int a = 0; a < 2; ++a) {
    const ClassSums& c = s.cls[a];
    if (c.count == 0.0 || W[a] <= 0.0) {
      if (diag) ++diag->empty_class_holds;
      continue;
    }
    for (int f = 0; f < s.factors; ++f) {
      double denom = c.sum_cf[f] + alpha[a] * c.sum_f[f];
      out.rate[a][f] = denom > 0.0 ? clamp(W[a] / denom) : clamp.hi;
    }
    double m = hidden_moment(c, bar, a);
    if (m > 0.0) {
      out.hidden[a] = clamp(W[a] / m);
    } else if (diag) {
      ++diag->hidden_holds;
    }
  }
  return out;
}

ParamVector em_update(std::span<const PowerRecord> sample, const ParamVector& bar, const WeightContext& ctx,
                      const RateClamp& clamp, Diagnostics* diag) {
  return update_from_sums(sums_from_context(sample, ctx, bar.factors), bar, clamp, diag);
}

double loglik_from_sums(const SampleSums& s, const ParamVector& theta, const ParamVector& bar) {
  auto alpha = weight_offsets(bar);
  double g = 0.0;
  for (int a = 0; a < 2; ++a) {
    const ClassSums& c = s.cls[a];
    if (c.count == 0.0) continue;
    double W = c.sum_c + alpha[a] * c.count;
    double log_terms = std::log(theta.hidden[a]);
    for (int f = 0; f < s.factors; ++f) log_terms += std::log(theta.rate[a][f]);
    if (W != 0.0) g += W * (std::log(theta.prior[a]) + log_terms);
    for (int f = 0; f < s.factors; ++f) g -= theta.rate[a][f] * (c.sum_cf[f] + alpha[a] * c.sum_f[f]);
    g -= theta.hidden[a] * hidden_moment(c, bar, a);
  }
  return g;
}

double expected_weighted_loglik(std::span<const PowerRecord> sample, const ParamVector& theta,
                                const ParamVector& bar, const WeightContext& ctx) {
  return loglik_from_sums(sums_from_context(sample, ctx, bar.factors), theta, bar);
}

ParamVector average(std::span<const ParamVector> thetas) {
  ParamVector out = thetas.front();
  double n = static_cast<double>(thetas.size());
  for (int a = 0; a < 2; ++a) {
    out.prior[a] = 0.0;
    out.hidden[a] = 0.0;
    out.rate[a].fill(0.0);
  }
  for (const auto& t : thetas) {
    for (int a = 0; a < 2; ++a) {
      out.prior[a] += t.prior[a] / n;
      out.hidden[a] += t.hidden[a] / n;
      for (int f = 0; f < kMaxFactors; ++f) out.rate[a][f] += t.rate[a][f] / n;
    }
  }
  out.prior[0] = 1.0 - out.prior[1];
  return out;
}

// ---------------------------------------------------------------- bootstrap ensemble

BootstrapEnsemble::BootstrapEnsemble(const TrainingSet& train, int M, std::uint64_t seed) {
  if (M < 2) throw std::invalid_argument("M must be at least 2");
  if (train.records.empty()) throw ValidationError("empty training set");
  factors_ = train.with_connectedness ? 4 : 3;
  const std::size_t n = train.records.size();
  coords_.reserve(n);
  for (const auto& r : train.records) coords_.push_back(coords_of(r));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
  samples_.resize(M);
  std::vector<char> seen(n);
  for (auto& sample : samples_) {
    sample.indices.resize(n);
    for (auto& idx : sample.indices) idx = pick(rng);
    std::fill(seen.begin(), seen.end(), 0);
    for (auto idx : sample.indices) {
      if (!seen[idx]) {
        seen[idx] = 1;
        sample.distinct.push_back(idx);
      }
      Moments& m = sample.moments[train.records[idx].A == 1 ? 1 : 0];
      const Coords& x = coords_[idx];
      m.n += 1.0;
      for (int g = 0; g < factors_; ++g) {
        m.s1[g] += x[g];
        for (int f = 0; f < factors_; ++f) {
          m.s2[g][f] += x[g] * x[f];
          m.s3[g][f] += x[g] * x[g] * x[f];
        }
      }
    }
  }
}

SampleSums BootstrapEnsemble::sums(int j, const TestPoint& test, double c_max) const {
  const Sample& sample = samples_[j];
  Coords q = coords_of(test);
  SampleSums out;
  out.factors = factors_;
  out.c_max = c_max;
  for (int a = 0; a < 2; ++a) {
    const Moments& m = sample.moments[a];
    ClassSums& c = out.cls[a];
    c.count = m.n;
    if (m.n == 0.0) continue;
    double sum_C = 0.0;
    for (int g = 0; g < factors_; ++g) sum_C += m.s2[g][g] - 2.0 * q[g] * m.s1[g] + m.n * q[g] * q[g];
    c.sum_c = m.n * c_max - sum_C;
    for (int f = 0; f < factors_; ++f) {
      double sum_Cx = 0.0;
      for (int g = 0; g < factors_; ++g) sum_Cx += m.s3[g][f] - 2.0 * q[g] * m.s2[g][f] + q[g] * q[g] * m.s1[f];
      c.sum_f[f] = m.s1[f];
      c.sum_cf[f] = c_max * m.s1[f] - sum_Cx;
    }
  }
  return out;
}

SampleSums BootstrapEnsemble::sums(int j, const TestPoint& test) const {
  Coords q = coords_of(test);
  double c_max = 0.0;
  for (auto idx : samples_[j].distinct) c_max = std::max(c_max, squared_distance(coords_[idx], q, factors_));
  return sums(j, test, c_max);
}

FitResult BootstrapEnsemble::fit(const TestPoint& q, int N, std::uint64_t seed, const RateClamp& clamp,
                                 Diagnostics* diag) const {
  if (N < 1) throw std::invalid_argument("N must be at least 1");
  const int M = size();
  std::vector<SampleSums> per_sample(M);
  for (int j = 0; j < M; ++j) per_sample[j] = sums(j, q);
  ParamVector observed = init_observed(per_sample[0], clamp);

  std::mt19937_64 rng(seed);
  FitResult best;
  std::vector<ParamVector> trials(N);
  for (int k = 1; k <= 3; ++k) {
    double e_sum = 0.0;
    for (int h = 0; h < N; ++h) {
      ParamVector bar = init_hidden(observed, k, draw_epsilon(k, rng), clamp);
      double e = 0.0;
      for (int j = 1; j < M; ++j) {
        ParamVector next = update_from_sums(per_sample[j], bar, clamp, diag);
        if (j == M - 1) e = loglik_from_sums(per_sample[j], next, bar);
        bar = next;
      }
      trials[h] = bar;
      e_sum += e;
    }
    double e_k = e_sum / N;
    best.case_loglik[k - 1] = e_k;
    if (k == 1 || e_k > best.expected_loglik) {
      best.expected_loglik = e_k;
      best.case_index = k;
      best.theta = average(trials);
    }
  }
  return best;
}

FitResult fit_lemnb(const TrainingSet& train, const TestPoint& test, int M, int N, std::mt19937_64& rng,
                    const RateClamp& clamp, Diagnostics* diag) {
  std::uint64_t sample_seed = rng();
  std::uint64_t trial_seed = rng();
  BootstrapEnsemble ensemble(train, M, sample_seed);
  return ensemble.fit(test, N, trial_seed, clamp, diag);
}

}  // namespace adopt
