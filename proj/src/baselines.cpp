#include "adopt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "adopt/evaluation.hpp"
#include "adopt/inference.hpp"

namespace adopt {

std::vector<Index> influencing_neighbors(const NetworkSnapshot& s, Index v) {
  std::vector<Index> out;
  for (const Neighbor& n : s.in_neighbors(v)) out.push_back(n.index);
  return out;
}

double cascade_predict(const NetworkSnapshot& s, Index v, CascadeVariant variant) {
  std::vector<Index> nbrs = influencing_neighbors(s, v);
  int l = 0;
  for (Index u : nbrs)
    if (s.adoption_week(u) == s.week()) ++l;
  if (l == 0) return 0.0;
  double p = variant == CascadeVariant::CM1 ? 1.0 / static_cast<double>(nbrs.size())
             : variant == CascadeVariant::CM2 ? 0.1
                                              : 0.01;
  return 1.0 - std::pow(1.0 - p, l);
}

double InfluenceProbTable::get(Index u, Index v) const {
  auto it = table_.find(key(u, v));
  return it == table_.end() ? 0.0 : it->second;
}

InfluenceProbTable learn_influence_probs(std::span<const ActionEvent> actions, std::span<const TieOnset> ties,
                                         bool directed) {
  std::map<Index, std::vector<std::pair<Index, Week>>> out_ties;
  for (const auto& t : ties) {
    out_ties[t.u].push_back({t.v, t.first_week});
    if (!directed) out_ties[t.v].push_back({t.u, t.first_week});
  }
  std::map<std::pair<Index, ItemId>, Week> adopted;
  std::map<Index, int> item_count;
  for (const auto& e : actions) {
    adopted[{e.entity, e.item}] = e.week;
    ++item_count[e.entity];
  }
  std::map<std::pair<Index, Index>, int> propagated;
  for (const auto& e : actions) {
    auto it = out_ties.find(e.entity);
    if (it == out_ties.end()) continue;
    for (const auto& [v, onset] : it->second) {
      if (onset >= e.week) continue;
      auto a = adopted.find({v, e.item});
      if (a != adopted.end() && a->second > e.week) ++propagated[{e.entity, v}];
    }
  }
  InfluenceProbTable table;
  for (const auto& [pair, n] : propagated)
    table.set(pair.first, pair.second, static_cast<double>(n) / item_count[pair.first]);
  return table;
}

InfluenceProbTable learn_influence_probs(const Dataset& data, Week T) {
  std::vector<ActionEvent> actions;
  for (const auto& e : data.actions())
    if (e.week <= T) actions.push_back(e);
  std::vector<TieOnset> ties;
  for (const auto& s : data.series())
    if (s.first_week() <= T) ties.push_back({s.src, s.dst, s.first_week()});
  return learn_influence_probs(actions, ties, data.directed());
}

double ip_predict(const InfluenceProbTable& table, const NetworkSnapshot& s, Index v) {
  double keep = 1.0;
  for (Index u : influencing_neighbors(s, v))
    if (s.adoption_week(u) == s.week()) keep *= 1.0 - table.get(u, v);
  return 1.0 - keep;
}

ParamVector nb_fit(const TrainingSet& train, const RateClamp& clamp) {
  return init_observed(train.records, train.with_connectedness ? 4 : 3, clamp);
}

double nb_posterior(const ParamVector& theta, const TestPoint& test) {
  ParamVector t = theta;
  t.hidden = {1.0, 1.0};
  return posterior_given_h(t, test, 0.0);
}

double nb_predict(const TrainingSet& train, const TestPoint& test, const RateClamp& clamp) {
  return nb_posterior(nb_fit(train, clamp), test);
}

double lwnb_predict(const TrainingSet& train, const TestPoint& test, const RateClamp& clamp) {
  if (train.records.empty()) throw ValidationError("empty training set");
  const int factors = train.with_connectedness ? 4 : 3;
  Coords q = coords_of(test);
  std::vector<double> C(train.size());
  double c_max = 0.0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    Coords x = coords_of(train.records[i]);
    double c = 0.0;
    for (int f = 0; f < factors; ++f) c += (x[f] - q[f]) * (x[f] - q[f]);
    C[i] = c;
    c_max = std::max(c_max, c);
  }
  std::array<double, 2> W{};
  std::array<Coords, 2> WF{};
  for (std::size_t i = 0; i < train.size(); ++i) {
    int a = train.records[i].A == 1 ? 1 : 0;
    double w = c_max + 1.0 - C[i];
    Coords x = coords_of(train.records[i]);
    W[a] += w;
    for (int f = 0; f < factors; ++f) WF[a][f] += w * x[f];
  }
  ParamVector t;
  t.factors = factors;
  t.prior[1] = W[1] / (W[0] + W[1]);
  t.prior[0] = 1.0 - t.prior[1];
  for (int a = 0; a < 2; ++a)
    for (int f = 0; f < factors; ++f)
      t.rate[a][f] = W[a] == 0.0 ? 1.0 : WF[a][f] > 0.0 ? clamp(W[a] / WF[a][f]) : clamp.hi;
  return nb_posterior(t, test);
}

namespace {

struct Candidate {
  double dist;
  EntityId entity;
  std::size_t row;
  bool operator<(const Candidate& o) const {
    return dist != o.dist ? dist < o.dist : entity != o.entity ? entity < o.entity : row < o.row;
  }
};

// Adopter counts among the nearest k for each k in the sorted grid.
std::vector<double> nearest_fractions(const TrainingSet& train, std::span<const std::size_t> rows,
                                      const Coords& q, const std::vector<int>& ks) {
  std::vector<Candidate> c;
  c.reserve(rows.size());
  for (std::size_t r : rows) {
    const PowerRecord& rec = train.records[r];
    double d = (rec.I - q[0]) * (rec.I - q[0]) + (rec.E - q[1]) * (rec.E - q[1]) + (rec.S - q[2]) * (rec.S - q[2]);
    c.push_back({d, rec.entity, r});
  }
  int k_max = std::min<int>(ks.back(), static_cast<int>(c.size()));
  std::partial_sort(c.begin(), c.begin() + k_max, c.end());
  std::vector<double> out;
  int positives = 0, taken = 0;
  for (int k : ks) {
    k = std::min<int>(k, static_cast<int>(c.size()));
    for (; taken < k; ++taken) positives += train.records[c[taken].row].A;
    out.push_back(static_cast<double>(positives) / k);
  }
  return out;
}

}  // namespace

double knn_predict(const TrainingSet& train, const TestPoint& test, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > train.size()) throw ValidationError("k must lie in [1, n]");
  std::vector<std::size_t> rows(train.size());
  std::iota(rows.begin(), rows.end(), 0);
  return nearest_fractions(train, rows, coords_of(test), {k}).front();
}

int select_knn_k(const TrainingSet& train, const std::vector<int>& grid, int folds, std::uint64_t seed) {
  std::vector<int> ks = grid;
  std::sort(ks.begin(), ks.end());
  if (ks.empty()) throw ValidationError("empty k grid");

  // Stratified fold assignment.
  std::vector<int> fold_of(train.size());
  std::mt19937_64 rng(seed);
  for (int label = 0; label < 2; ++label) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < train.size(); ++i)
      if (train.records[i].A == label) rows.push_back(i);
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t k = 0; k < rows.size(); ++k) fold_of[rows[k]] = static_cast<int>(k % folds);
  }

  std::vector<double> auc_sum(ks.size(), 0.0);
  std::vector<int> auc_count(ks.size(), 0);
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> fit_rows, held;
    for (std::size_t i = 0; i < train.size(); ++i) (fold_of[i] == f ? held : fit_rows).push_back(i);
    if (held.empty() || fit_rows.empty()) continue;
    std::vector<std::vector<double>> scores(ks.size());
    std::vector<int> labels;
    for (std::size_t r : held) {
      const PowerRecord& rec = train.records[r];
      auto fr = nearest_fractions(train, fit_rows, {rec.I, rec.E, rec.S, 0.0}, ks);
      for (std::size_t k = 0; k < ks.size(); ++k) scores[k].push_back(fr[k]);
      labels.push_back(rec.A);
    }
    for (std::size_t k = 0; k < ks.size(); ++k) {
      if (static_cast<std::size_t>(ks[k]) > fit_rows.size()) continue;
      if (auto a = auc(scores[k], labels)) {
        auc_sum[k] += *a;
        ++auc_count[k];
      }
    }
  }
  int best = ks.front();
  double best_auc = -1.0;
  for (std::size_t k = 0; k < ks.size(); ++k) {
    if (auc_count[k] == 0) continue;
    double mean = auc_sum[k] / auc_count[k];
    if (mean > best_auc) {
      best_auc = mean;
      best = ks[k];
    }
  }
  return std::min<int>(best, static_cast<int>(train.size()));
}

}  // namespace adopt
