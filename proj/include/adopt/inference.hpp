#pragma once

#include <cstddef>
#include <random>
#include <string>

#include "adopt/lemnb.hpp"

namespace adopt {

enum class HiddenSampler {
  Rqmc,  // shifted van der Corput points with antithetic pairs, per mixture component;
         // convergence checked at powers of two
  Iid,   // independent draws, convergence checked after every draw
};

HiddenSampler parse_hidden_sampler(const std::string& s);

struct InferenceConfig {
  double sigma = 1e-4;
  std::size_t min_samples = 100;
  std::size_t max_samples = 100000;
  HiddenSampler sampler = HiddenSampler::Rqmc;

  void validate() const;
};

/// P(A = 1 | I, E, S[, Z], h) under θ, evaluated in log space.
double posterior_given_h(const ParamVector& theta, const TestPoint& test, double h);

/// One draw from the two-component exponential mixture of the hidden power.
double sample_hidden(const ParamVector& theta, std::mt19937_64& rng);

/// Running-mean estimate of E_h[P(A = 1 | ..., h)].
double infer_probability(const ParamVector& theta, const TestPoint& test, const InferenceConfig& cfg,
                         std::mt19937_64& rng);

struct InferenceTrace {
  double probability = 0.0;
  std::size_t samples = 0;
};

InferenceTrace infer_probability_traced(const ParamVector& theta, const TestPoint& test,
                                        const InferenceConfig& cfg, std::mt19937_64& rng);

}  // namespace adopt
