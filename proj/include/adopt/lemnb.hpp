#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "adopt/train_builder.hpp"

namespace adopt {

/// Observed factors are I, E, S and optionally Z (the connectedness extension).
inline constexpr int kMaxFactors = 4;

/// θ. Index 1 is the adopter class, index 0 the nonadopter class.
struct ParamVector {
  int factors = 3;
  std::array<double, 2> prior{0.5, 0.5};
  std::array<std::array<double, kMaxFactors>, 2> rate{{{1, 1, 1, 1}, {1, 1, 1, 1}}};
  std::array<double, 2> hidden{1.0, 1.0};

  double p1() const { return prior[1]; }
  double p0() const { return prior[0]; }
};

struct RateClamp {
  double lo = 1e-8;
  double hi = 1e8;
  double operator()(double rate) const;
};

/// Counters for the guarded branches of the update; summed across fits.
struct Diagnostics {
  std::uint64_t updates = 0;
  std::uint64_t hidden_holds = 0;        // hidden-rate denominator <= 0, previous rate kept
  std::uint64_t empty_class_holds = 0;   // class absent from the sample, its rates kept
  std::uint64_t nonpositive_weights = 0; // some expected weight Q_i or R_i <= 0
  double min_weight = 0.0;               // smallest expected weight seen (0 until the first update)

  void merge(const Diagnostics& other);
};

using Coords = std::array<double, kMaxFactors>;

Coords coords_of(const PowerRecord& r);
Coords coords_of(const TestPoint& q);

/// Per-class sums for one sample and one test point, with c_i = C_max - C_i.
struct ClassSums {
  double count = 0.0;
  double sum_c = 0.0;
  Coords sum_f{};
  Coords sum_cf{};
};

struct SampleSums {
  int factors = 3;
  double c_max = 0.0;
  std::array<ClassSums, 2> cls{};
};

/// Expected weight E[K - C_i - (H_i - H_q)^2] is c_i + alpha[A_i].
std::array<double, 2> weight_offsets(const ParamVector& bar);

/// Standard NB estimates: p̄1 = n1/n and λ̄_{F|a} = n_a / Σ_a F. A class with no
/// records keeps unit rates; a zero power sum gives the rate ceiling.
ParamVector init_observed(std::span<const PowerRecord> sample, int factors, const RateClamp& clamp = {});
ParamVector init_observed(const SampleSums& sums, const RateClamp& clamp = {});

/// Sets 1/λ̄_{H|a} to the largest (case 1), average (case 2), or smallest (case 3)
/// of the class's observed means 1/λ̄_{I|a}, 1/λ̄_{E|a}, 1/λ̄_{S|a}, scaled by
/// (1 + eps) for cases 1 and 2 and (1 - eps) for case 3.
ParamVector init_hidden(ParamVector partial, int case_k, double eps, const RateClamp& clamp = {});

/// ε1, ε3 ~ U(0, 0.01); ε2 ~ U(-0.005, 0.005).
double draw_epsilon(int case_k, std::mt19937_64& rng);

struct WeightContext {
  double K = 0.0;
  double c_max = 0.0;
  std::vector<double> C;  // squared observed distance to the test point
  std::vector<double> Q;  // expected weight of record i as an adopter record
  std::vector<double> R;  // expected weight of record i as a nonadopter record
};

WeightContext compute_K(std::span<const PowerRecord> sample, const TestPoint& test, const ParamVector& bar);

SampleSums sums_from_context(std::span<const PowerRecord> sample, const WeightContext& ctx, int factors);

/// Maximizer of the expected weighted log-likelihood given the per-class sums.
ParamVector update_from_sums(const SampleSums& s, const ParamVector& bar, const RateClamp& clamp = {},
                             Diagnostics* diag = nullptr);

ParamVector em_update(std::span<const PowerRecord> sample, const ParamVector& bar, const WeightContext& ctx,
                      const RateClamp& clamp = {}, Diagnostics* diag = nullptr);

/// g(θ): expected weighted log-likelihood under weights and hidden densities from θ̄.
double loglik_from_sums(const SampleSums& s, const ParamVector& theta, const ParamVector& bar);

double expected_weighted_loglik(std::span<const PowerRecord> sample, const ParamVector& theta,
                                const ParamVector& bar, const WeightContext& ctx);

struct FitResult {
  ParamVector theta;
  double expected_loglik = 0.0;
  int case_index = 1;
  std::array<double, 3> case_loglik{};
};

struct LemnbConfig {
  int M = 5;
  int N = 20;
  RateClamp clamp;
  bool with_connectedness = false;
};

/// Bootstrap samples of one training set, reduced to per-class moment sums so
/// that the sums for any test point cost O(factors^2) plus one farthest-record scan.
class BootstrapEnsemble {
 public:
  BootstrapEnsemble(const TrainingSet& train, int M, std::uint64_t seed);

  int size() const { return static_cast<int>(samples_.size()); }
  int factors() const { return factors_; }
  const std::vector<std::uint32_t>& indices(int j) const { return samples_[j].indices; }

  /// Sums of sample j for test point q.
  SampleSums sums(int j, const TestPoint& q) const;
  /// Same, with the farthest squared distance supplied by the caller.
  SampleSums sums(int j, const TestPoint& q, double c_max) const;

  /// Per initialization case and trial: initialize on sample 1, update on samples 2..M.
  FitResult fit(const TestPoint& q, int N, std::uint64_t seed, const RateClamp& clamp = {},
                Diagnostics* diag = nullptr) const;

 private:
  struct Moments {
    double n = 0.0;
    Coords s1{};
    std::array<Coords, kMaxFactors> s2{};  // Σ x_g x_f
    std::array<Coords, kMaxFactors> s3{};  // Σ x_g^2 x_f
  };
  struct Sample {
    std::vector<std::uint32_t> indices;
    std::vector<std::uint32_t> distinct;
    std::array<Moments, 2> moments;
  };

  int factors_ = 3;
  std::vector<Coords> coords_;
  std::vector<Sample> samples_;
};

/// Draws M bootstrap samples and N trials per case from `rng`, in that order.
FitResult fit_lemnb(const TrainingSet& train, const TestPoint& test, int M, int N, std::mt19937_64& rng,
                    const RateClamp& clamp = {}, Diagnostics* diag = nullptr);

ParamVector average(std::span<const ParamVector> thetas);

}  // namespace adopt
