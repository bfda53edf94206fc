#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "adopt/lemnb.hpp"
#include "adopt/network.hpp"
#include "adopt/train_builder.hpp"

namespace adopt {

enum class CascadeVariant { CM1, CM2, CM3 };

/// Entities whose influence can reach v: in-neighbors for directed networks, all neighbors otherwise.
std::vector<Index> influencing_neighbors(const NetworkSnapshot& s, Index v);

/// 1 - (1 - p)^l, where l counts neighbors adopting exactly at the snapshot week and
/// p is 1/k (k = neighbor count, 0 if isolated), 0.1, or 0.01.
double cascade_predict(const NetworkSnapshot& s, Index v, CascadeVariant variant);

class InfluenceProbTable {
 public:
  void set(Index u, Index v, double p) { table_[key(u, v)] = p; }
  /// 0 for absent pairs.
  double get(Index u, Index v) const;
  std::size_t size() const { return table_.size(); }

 private:
  static std::uint64_t key(Index u, Index v) { return (std::uint64_t(u) << 32) | v; }
  std::unordered_map<std::uint64_t, double> table_;
};

/// A tie from u to v (either direction when nondirectional) and the week it first appeared.
struct TieOnset {
  Index u, v;
  Week first_week;
};

/// p_{u,v} = (#items propagated u -> v) / (#items u adopted). An item propagates when
/// v adopts it strictly after u and the tie u -> v existed before u's adoption week.
InfluenceProbTable learn_influence_probs(std::span<const ActionEvent> actions, std::span<const TieOnset> ties,
                                         bool directed);

/// As above from a dataset's non-focal action log, using only events up to week T.
InfluenceProbTable learn_influence_probs(const Dataset& data, Week T);

/// 1 - Π (1 - p_{u,v}) over neighbors u adopting exactly at the snapshot week.
double ip_predict(const InfluenceProbTable& table, const NetworkSnapshot& s, Index v);

/// Plain NB posterior over the observed factors, with estimates from the whole training set.
ParamVector nb_fit(const TrainingSet& train, const RateClamp& clamp = {});
double nb_posterior(const ParamVector& theta, const TestPoint& test);
double nb_predict(const TrainingSet& train, const TestPoint& test, const RateClamp& clamp = {});

/// NB with record weights K' - C_i, K' = max C_i + 1.
double lwnb_predict(const TrainingSet& train, const TestPoint& test, const RateClamp& clamp = {});

/// Fraction of adopters among the k nearest records on (I, E, S); ties broken by entity id.
double knn_predict(const TrainingSet& train, const TestPoint& test, int k);

inline const std::vector<int> kDefaultKnnGrid{1, 3, 5, 11, 21, 51};

/// k with the best mean AUC over stratified folds; ties go to the smaller k.
/// Candidates larger than the training fold are skipped.
int select_knn_k(const TrainingSet& train, const std::vector<int>& grid, int folds, std::uint64_t seed);

}  // namespace adopt
