#include "adopt/powers.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace adopt {

DistanceScheme parse_distance_scheme(const std::string& s) {
  if (s == "mixed_mean") return DistanceScheme::MixedMean;
  if (s == "euclidean") return DistanceScheme::Euclidean;
  throw ValidationError("unknown distance_scheme '" + s + "' (expected mixed_mean|euclidean)");
}

const char* to_string(DistanceScheme s) {
  return s == DistanceScheme::MixedMean ? "mixed_mean" : "euclidean";
}

namespace {

double rising(double v, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return (std::clamp(v, lo, hi) - lo) / (hi - lo);
}

double falling(double v, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return (hi - std::clamp(v, lo, hi)) / (hi - lo);
}

template <class T, class Key>
std::size_t count_common(std::span<const T> a, std::span<const T> b, Key key) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    Index ka = key(*ia), kb = key(*ib);
    if (ka < kb) {
      ++ia;
    } else if (kb < ka) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

template <class T, class Key>
bool contains(std::span<const T> a, Index v, Key key) {
  auto it = std::lower_bound(a.begin(), a.end(), v, [&](const T& x, Index w) { return key(x) < w; });
  return it != a.end() && key(*it) == v;
}

// |A \ {j}| + |B \ {i}| - 2 |A ∩ B|; i ∉ A and j ∉ B since there are no self ties.
template <class T, class Key>
double mismatch_count(std::span<const T> a, std::span<const T> b, Index i, Index j, Key key) {
  double na = static_cast<double>(a.size()) - (contains(a, j, key) ? 1.0 : 0.0);
  double nb = static_cast<double>(b.size()) - (contains(b, i, key) ? 1.0 : 0.0);
  return na + nb - 2.0 * static_cast<double>(count_common(a, b, key));
}

}  // namespace

double influence_power(const NetworkSnapshot& s, Index i, Index j, const NormalizationBounds& b) {
  return rising(s.strength(i, j), b.x_min, b.x_max);
}

double structural_distance(const NetworkSnapshot& s, Index i, Index j) {
  if (i == j) throw std::domain_error("structural distance of an entity with itself");
  auto by_index = [](const Neighbor& n) { return n.index; };
  double sq = mismatch_count(s.out_neighbors(i), s.out_neighbors(j), i, j, by_index);
  if (s.directed()) sq += mismatch_count(s.in_neighbors(i), s.in_neighbors(j), i, j, by_index);
  return std::sqrt(std::max(0.0, sq));
}

double structural_distance_naive(const NetworkSnapshot& s, Index i, Index j) {
  if (i == j) throw std::domain_error("structural distance of an entity with itself");
  double sum = 0.0;
  for (Index z = 0; z < s.size(); ++z) {
    if (z == i || z == j) continue;
    double d_out = double(s.has_tie(i, z)) - double(s.has_tie(j, z));
    sum += d_out * d_out;
    if (s.directed()) {
      double d_in = double(s.has_tie(z, i)) - double(s.has_tie(z, j));
      sum += d_in * d_in;
    }
  }
  return std::sqrt(sum);
}

double equivalence_power(double y, const NormalizationBounds& b) { return falling(y, b.y_min, b.y_max); }

double entity_distance(const CharacteristicVector& a, const CharacteristicVector& b,
                       const AttributeSchema& schema, const std::vector<AttributeRange>& ranges,
                       DistanceScheme scheme) {
  const std::size_t n = schema.size();
  if (a.size() != n || b.size() != n || ranges.size() != n)
    throw ValidationError("characteristic vectors do not match the attribute schema");
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double d;
    if (schema.attributes[k].type == AttributeType::Nominal) {
      d = a[k] == b[k] ? 0.0 : 1.0;
    } else {
      double span = ranges[k].max - ranges[k].min;
      d = span > 0.0 ? std::min(1.0, std::abs(a[k] - b[k]) / span) : 0.0;
    }
    sum += scheme == DistanceScheme::MixedMean ? d : d * d;
  }
  return scheme == DistanceScheme::MixedMean ? sum / static_cast<double>(n) : std::sqrt(sum);
}

double similarity_power(double d, const NormalizationBounds& b) { return falling(d, b.d_min, b.d_max); }

PairPowers pair_powers(const NetworkSnapshot& s, Index i, Index j, const NormalizationBounds& b,
                       DistanceScheme scheme) {
  PairPowers p;
  p.influence = influence_power(s, i, j, b);
  p.equivalence = equivalence_power(structural_distance(s, i, j), b);
  p.similarity = similarity_power(
      entity_distance(s.characteristics(i), s.characteristics(j), s.schema(), s.ranges(), scheme), b);
  return p;
}

TotalPowers total_powers(const NetworkSnapshot& s, Index j, std::span<const Index> adopters,
                         const NormalizationBounds& b, DistanceScheme scheme) {
  TotalPowers t;
  for (Index i : adopters) {
    if (i == j) continue;
    PairPowers p = pair_powers(s, i, j, b, scheme);
    t.influence += p.influence;
    t.equivalence += p.equivalence;
    t.similarity += p.similarity;
  }
  return t;
}

double connectedness(const NetworkSnapshot& s, std::span<const Index> F) {
  if (F.size() < 2) return 0.0;
  std::size_t edges = 0;
  for (std::size_t a = 0; a < F.size(); ++a)
    for (std::size_t b = a + 1; b < F.size(); ++b)
      if (s.connected(F[a], F[b])) ++edges;
  double pairs = 0.5 * static_cast<double>(F.size()) * static_cast<double>(F.size() - 1);
  return static_cast<double>(edges) / pairs;
}

std::vector<Index> adopter_neighbors(const NetworkSnapshot& s, Index v, std::span<const Index> adopters) {
  std::vector<Index> out;
  for (Index a : adopters)
    if (a != v && s.connected(v, a)) out.push_back(a);
  return out;
}

NormalizationBounds observed_bounds(const NetworkSnapshot& s, DistanceScheme scheme, unsigned threads) {
  NormalizationBounds b;
  b.x_max = s.max_strength();
  const std::size_t n = s.size();
  std::mutex m;
  parallel_for(n, threads, [&](std::size_t ii) {
    Index i = static_cast<Index>(ii);
    double y = 0.0, d = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      y = std::max(y, structural_distance(s, i, j));
      d = std::max(d, entity_distance(s.characteristics(i), s.characteristics(j), s.schema(),
                                      s.ranges(), scheme));
    }
    std::lock_guard lock(m);
    b.y_max = std::max(b.y_max, y);
    b.d_max = std::max(b.d_max, d);
  });
  return b;
}

}  // namespace adopt
