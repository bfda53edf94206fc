#pragma once

#include <span>
#include <string>

#include "adopt/network.hpp"

namespace adopt {

enum class DistanceScheme { MixedMean, Euclidean };

DistanceScheme parse_distance_scheme(const std::string& s);
const char* to_string(DistanceScheme s);

/// Minima are 0; maxima are the observed values at the evaluation week.
struct NormalizationBounds {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double d_min = 0.0, d_max = 0.0;
};

struct PairPowers {
  double influence = 0.0;
  double equivalence = 0.0;
  double similarity = 0.0;
};

struct TotalPowers {
  double influence = 0.0;
  double equivalence = 0.0;
  double similarity = 0.0;
  double connectedness = 0.0;
};

/// (x_ij - x_min) / (x_max - x_min), with x_ij clamped into the bounds; 0 for degenerate bounds.
double influence_power(const NetworkSnapshot& s, Index i, Index j, const NormalizationBounds& b);

/// Euclidean distance of structural equivalence, by neighborhood counting.
/// Throws std::domain_error when i == j.
double structural_distance(const NetworkSnapshot& s, Index i, Index j);

/// Reference summation over every third entity z; O(n) per pair.
double structural_distance_naive(const NetworkSnapshot& s, Index i, Index j);

double equivalence_power(double y, const NormalizationBounds& b);

/// Nominal attributes contribute 0/1, numeric ones |x - y| / (max - min) (0 when max == min).
/// Throws ValidationError on a schema mismatch.
double entity_distance(const CharacteristicVector& a, const CharacteristicVector& b,
                       const AttributeSchema& schema, const std::vector<AttributeRange>& ranges,
                       DistanceScheme scheme);

double similarity_power(double d, const NormalizationBounds& b);

PairPowers pair_powers(const NetworkSnapshot& s, Index i, Index j, const NormalizationBounds& b,
                       DistanceScheme scheme);

/// Sums pair powers from every adopter in `adopters` onto target j. Entries equal to j are skipped.
TotalPowers total_powers(const NetworkSnapshot& s, Index j, std::span<const Index> adopters,
                         const NormalizationBounds& b, DistanceScheme scheme);

/// Fraction of pairs in F that are tied; 0 when |F| < 2.
double connectedness(const NetworkSnapshot& s, std::span<const Index> F);

/// Members of `adopters` tied to v in either direction.
std::vector<Index> adopter_neighbors(const NetworkSnapshot& s, Index v, std::span<const Index> adopters);

/// Observed maxima over every ordered pair of the snapshot.
NormalizationBounds observed_bounds(const NetworkSnapshot& s, DistanceScheme scheme, unsigned threads = 1);

}  // namespace adopt
