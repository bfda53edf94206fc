#pragma once

// Independent numerical references for the learner. Nothing here calls the
// closed forms under test: hidden-power expectations come from 2-D quadrature,
// the maximizer is a generic Newton iteration on finite differences.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "adopt/lemnb.hpp"

namespace adopt::oracle {

/// Composite Gauss-Legendre rule on [0, t_max]: `panels` equal panels of `order` nodes.
struct Quadrature {
  std::vector<double> t, w;
  Quadrature(double t_max, int panels, int order = 12) {
    // Legendre nodes on [-1, 1] by Newton iteration from the Chebyshev guesses.
    std::vector<double> x(order), wx(order);
    for (int i = 0; i < order; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (order + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= order; ++k) {
          double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        double dp = order * (z * p1 - p0) / (z * z - 1.0);
        double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) {
          x[i] = z;
          wx[i] = 2.0 / ((1.0 - z * z) * dp * dp);
          break;
        }
      }
    }
    double width = t_max / panels;
    for (int p = 0; p < panels; ++p)
      for (int i = 0; i < order; ++i) {
        t.push_back(width * (p + 0.5 * (x[i] + 1.0)));
        w.push_back(0.5 * width * wx[i]);
      }
  }
};

/// E[(H_i - H_q)^2], E[H_i], E[(H_i - H_q)^2 H_i] for H_i ~ Exp(λ_a) and H_q drawn
/// from the two-component mixture of θ̄, by a double integral per mixture component.
struct HiddenMoments {
  double sq = 0.0, h = 0.0, sq_h = 0.0;
};

inline HiddenMoments hidden_moments(const ParamVector& bar, int a) {
  static const Quadrature rule(60.0, 60);
  HiddenMoments m;
  double la = bar.hidden[a];
  for (int b = 0; b < 2; ++b) {
    double lb = bar.hidden[b];
    if (bar.prior[b] == 0.0) continue;
    HiddenMoments part;
    for (std::size_t x = 0; x < rule.t.size(); ++x) {
      double hi = rule.t[x] / la, wi = rule.w[x] * std::exp(-rule.t[x]);
      part.h += wi * hi;
      for (std::size_t y = 0; y < rule.t.size(); ++y) {
        double hq = rule.t[y] / lb, wq = rule.w[y] * std::exp(-rule.t[y]);
        double d2 = (hi - hq) * (hi - hq);
        part.sq += wi * wq * d2;
        part.sq_h += wi * wq * d2 * hi;
      }
    }
    m.sq += bar.prior[b] * part.sq;
    m.sq_h += bar.prior[b] * part.sq_h;
    m.h += bar.prior[b] * part.h;
  }
  return m;
}

/// Per-class sufficient statistics of the expected weighted log-likelihood,
/// with weight K - C_i - (H_i - H_q)^2 and K = C_max + 2/λ̄_{H|0}^2 + 2/λ̄_{H|1}^2.
struct ExpectedStats {
  int factors = 3;
  std::array<double, 2> W{};                            // Σ E[w_i]
  std::array<std::array<double, kMaxFactors>, 2> WF{};  // Σ E[w_i] F_i
  std::array<double, 2> WH{};                           // Σ E[w_i H_i]
  std::array<double, 2> min_weight{1e300, 1e300};
};

inline ExpectedStats expected_stats(std::span<const PowerRecord> sample, std::span<const double> C, double c_max,
                                    const ParamVector& bar) {
  ExpectedStats s;
  s.factors = bar.factors;
  double K = c_max + 2.0 / (bar.hidden[0] * bar.hidden[0]) + 2.0 / (bar.hidden[1] * bar.hidden[1]);
  std::array<HiddenMoments, 2> hm{hidden_moments(bar, 0), hidden_moments(bar, 1)};
  for (std::size_t i = 0; i < sample.size(); ++i) {
    int a = sample[i].A == 1 ? 1 : 0;
    double base = K - C[i];
    double ew = base - hm[a].sq;
    double ewh = base * hm[a].h - hm[a].sq_h;
    Coords x = coords_of(sample[i]);
    s.W[a] += ew;
    for (int f = 0; f < s.factors; ++f) s.WF[a][f] += ew * x[f];
    s.WH[a] += ewh;
    s.min_weight[a] = std::min(s.min_weight[a], ew);
  }
  return s;
}

inline double g_of(const ExpectedStats& s, const ParamVector& th) {
  double g = 0.0;
  for (int a = 0; a < 2; ++a) {
    if (s.W[a] == 0.0) continue;
    g += s.W[a] * std::log(th.prior[a]);
    for (int f = 0; f < s.factors; ++f) g += s.W[a] * std::log(th.rate[a][f]) - th.rate[a][f] * s.WF[a][f];
    g += s.W[a] * std::log(th.hidden[a]) - th.hidden[a] * s.WH[a];
  }
  return g;
}

/// Free coordinates: logit p1, then log rates (class 0 factors, class 1 factors), then log hidden rates.
inline int dimension(int factors) { return 1 + 2 * factors + 2; }

inline ParamVector from_free(const Eigen::VectorXd& z, int factors) {
  ParamVector th;
  th.factors = factors;
  th.prior[1] = 1.0 / (1.0 + std::exp(-z[0]));
  th.prior[0] = 1.0 - th.prior[1];
  int k = 1;
  for (int a = 0; a < 2; ++a)
    for (int f = 0; f < factors; ++f) th.rate[a][f] = std::exp(z[k++]);
  for (int a = 0; a < 2; ++a) th.hidden[a] = std::exp(z[k++]);
  return th;
}

inline Eigen::VectorXd to_free(const ParamVector& th) {
  Eigen::VectorXd z(dimension(th.factors));
  z[0] = std::log(th.prior[1] / th.prior[0]);
  int k = 1;
  for (int a = 0; a < 2; ++a)
    for (int f = 0; f < th.factors; ++f) z[k++] = std::log(th.rate[a][f]);
  for (int a = 0; a < 2; ++a) z[k++] = std::log(th.hidden[a]);
  return z;
}

/// Damped Newton ascent with central-difference derivatives and backtracking.
inline Eigen::VectorXd newton_maximize(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd z,
                                       int max_iter = 200) {
  const int d = static_cast<int>(z.size());
  for (int it = 0; it < max_iter; ++it) {
    const double h = 1e-4;
    Eigen::VectorXd grad(d);
    Eigen::MatrixXd hess(d, d);
    double f0 = f(z);
    for (int i = 0; i < d; ++i) {
      Eigen::VectorXd zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      double fp = f(zp), fm = f(zm);
      grad[i] = (fp - fm) / (2 * h);
      hess(i, i) = (fp - 2 * f0 + fm) / (h * h);
      for (int j = 0; j < i; ++j) {
        Eigen::VectorXd a = z, b = z, c = z, e = z;
        a[i] += h, a[j] += h;
        b[i] += h, b[j] -= h;
        c[i] -= h, c[j] += h;
        e[i] -= h, e[j] -= h;
        hess(i, j) = hess(j, i) = (f(a) - f(b) - f(c) + f(e)) / (4 * h * h);
      }
    }
    // Ascent direction from the negated Hessian, regularized until positive definite.
    Eigen::MatrixXd neg = -hess;
    double shift = 0.0;
    Eigen::VectorXd step;
    for (int tries = 0; tries < 60; ++tries) {
      Eigen::LLT<Eigen::MatrixXd> llt(neg + shift * Eigen::MatrixXd::Identity(d, d));
      if (llt.info() == Eigen::Success) {
        step = llt.solve(grad);
        break;
      }
      shift = shift == 0.0 ? 1e-8 * (1.0 + neg.diagonal().cwiseAbs().maxCoeff()) : shift * 10.0;
    }
    if (step.size() == 0) step = grad;
    double t = 1.0;
    while (t > 1e-12 && !(f(z + t * step) >= f0)) t *= 0.5;
    z += t * step;
    if ((t * step).cwiseAbs().maxCoeff() < 1e-13) break;
  }
  return z;
}

/// Maximizer of g under the expected statistics, started from the NB estimates.
inline ParamVector maximize_g(const ExpectedStats& s, const ParamVector& start) {
  auto f = [&](const Eigen::VectorXd& z) { return g_of(s, from_free(z, s.factors)); };
  return from_free(newton_maximize(f, to_free(start)), s.factors);
}

/// Central-difference gradient of g in the raw coordinates (p1 with p0 = 1 - p1, rates, hidden rates).
inline std::vector<double> raw_gradient(const ExpectedStats& s, const ParamVector& th) {
  std::vector<double> out;
  auto eval = [&](const ParamVector& p) { return g_of(s, p); };
  auto probe = [&](auto setter, double value) {
    double h = 1e-6 * std::max(1.0, std::abs(value));
    ParamVector p = th, m = th;
    setter(p, value + h);
    setter(m, value - h);
    out.push_back((eval(p) - eval(m)) / (2 * h));
  };
  probe([](ParamVector& p, double v) { p.prior[1] = v, p.prior[0] = 1.0 - v; }, th.prior[1]);
  for (int a = 0; a < 2; ++a)
    for (int f = 0; f < th.factors; ++f)
      probe([a, f](ParamVector& p, double v) { p.rate[a][f] = v; }, th.rate[a][f]);
  for (int a = 0; a < 2; ++a) probe([a](ParamVector& p, double v) { p.hidden[a] = v; }, th.hidden[a]);
  return out;
}

/// P(A = 1 | x, h) from the joint densities, in log space.
inline double posterior_at(const ParamVector& th, const TestPoint& q, double h) {
  Coords x = coords_of(q);
  std::array<double, 2> lj{};
  for (int a = 0; a < 2; ++a) {
    if (th.prior[a] == 0.0) {
      lj[a] = -INFINITY;
      continue;
    }
    lj[a] = std::log(th.prior[a]) + std::log(th.hidden[a]) - th.hidden[a] * h;
    for (int f = 0; f < th.factors; ++f) lj[a] += std::log(th.rate[a][f]) - th.rate[a][f] * x[f];
  }
  if (lj[1] == -INFINITY) return 0.0;
  if (lj[0] == -INFINITY) return 1.0;
  return 1.0 / (1.0 + std::exp(lj[0] - lj[1]));
}

/// ∫ P(A = 1 | x, h) f(h | θ) dh with f the prior mixture per mixture component.
inline double marginal_probability(const ParamVector& th, const TestPoint& q) {
  static const Quadrature rule(60.0, 240);
  double total = 0.0;
  for (int b = 0; b < 2; ++b) {
    if (th.prior[b] == 0.0) continue;
    double part = 0.0;
    for (std::size_t k = 0; k < rule.t.size(); ++k)
      part += rule.w[k] * std::exp(-rule.t[k]) * posterior_at(th, q, rule.t[k] / th.hidden[b]);
    total += th.prior[b] * part;
  }
  return total;
}

/// Small random learning problem: both classes present, powers in (0.1, 3).
struct Instance {
  std::vector<PowerRecord> records;
  TestPoint test;
  ParamVector bar;
};

inline Instance random_instance(std::mt19937_64& rng, int factors = 3) {
  std::uniform_real_distribution<double> power(0.1, 3.0), rate(0.3, 3.0), prior(0.1, 0.9);
  std::uniform_int_distribution<int> size(4, 20);
  Instance in;
  int n = size(rng);
  for (int i = 0; i < n; ++i) {
    PowerRecord r;
    r.entity = static_cast<EntityId>(i + 1);
    r.I = power(rng), r.E = power(rng), r.S = power(rng);
    if (factors == 4) r.Z = power(rng) / 3.0;
    r.A = i == 0 ? 1 : i == 1 ? 0 : static_cast<int>(rng() % 2);
    in.records.push_back(r);
  }
  in.test.I = power(rng), in.test.E = power(rng), in.test.S = power(rng);
  if (factors == 4) in.test.Z = power(rng) / 3.0;
  in.bar.factors = factors;
  in.bar.prior[1] = prior(rng);
  in.bar.prior[0] = 1.0 - in.bar.prior[1];
  for (int a = 0; a < 2; ++a) {
    for (int f = 0; f < factors; ++f) in.bar.rate[a][f] = rate(rng);
    in.bar.hidden[a] = rate(rng);
  }
  return in;
}

}  // namespace adopt::oracle
