#include "adopt/train_builder.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace adopt {

namespace {

PowerRecord record_for(const NetworkSnapshot& s, Index target, std::span<const Index> adopters,
                       const NormalizationBounds& b, const PowerOptions& o, EntityId id, int label) {
  TotalPowers t = total_powers(s, target, adopters, b, o.scheme);
  PowerRecord r;
  r.entity = id;
  r.as_of_week = s.week();
  r.I = t.influence;
  r.E = t.equivalence;
  r.S = t.similarity;
  if (o.with_connectedness) r.Z = connectedness(s, adopter_neighbors(s, target, adopters));
  r.A = label;
  return r;
}

}  // namespace

TrainingSet construct_train(const Dataset& data, Week T, const PowerOptions& options,
                            const NormalizationBounds& bounds) {
  if (T < 1) throw ValidationError("training week T must be >= 1");
  if (T > data.horizon()) throw ValidationError("training week T beyond the horizon");

  TrainingSet train;
  train.with_connectedness = options.with_connectedness;

  // Adopters grouped by week; each group sees only strictly earlier adopters.
  std::map<Week, std::vector<Index>> by_week;
  for (Index i = 0; i < data.size(); ++i) {
    Week w = data.adoption_week(i);
    if (w != 0 && w <= T) by_week[w].push_back(i);
  }
  for (const auto& [week, group] : by_week) {
    NetworkSnapshot s = data.snapshot(week - 1);
    std::vector<Index> early = s.adopters();
    std::vector<PowerRecord> rows(group.size());
    parallel_for(group.size(), options.threads, [&](std::size_t k) {
      rows[k] = record_for(s, group[k], early, bounds, options, data.id(group[k]), 1);
    });
    train.records.insert(train.records.end(), rows.begin(), rows.end());
  }

  NetworkSnapshot s = data.snapshot(T - 1);
  std::vector<Index> early = s.adopters();
  std::vector<Index> targets;
  for (Index i = 0; i < data.size(); ++i) {
    Week w = data.adoption_week(i);
    if (w == 0 || w > T) targets.push_back(i);
  }
  std::vector<PowerRecord> rows(targets.size());
  parallel_for(targets.size(), options.threads, [&](std::size_t k) {
    rows[k] = record_for(s, targets[k], early, bounds, options, data.id(targets[k]), 0);
  });
  train.records.insert(train.records.end(), rows.begin(), rows.end());
  return train;
}

TrainingSet construct_train(const Dataset& data, Week T, const PowerOptions& options) {
  NormalizationBounds b = observed_bounds(data.snapshot(T), options.scheme, options.threads);
  return construct_train(data, T, options, b);
}

std::vector<TestPoint> build_test_points(const NetworkSnapshot& s, const PowerOptions& options,
                                         const NormalizationBounds& bounds) {
  std::vector<Index> adopters = s.adopters();
  std::vector<Index> targets = s.nonadopters();
  std::vector<TestPoint> out(targets.size());
  parallel_for(targets.size(), options.threads, [&](std::size_t k) {
    TotalPowers t = total_powers(s, targets[k], adopters, bounds, options.scheme);
    TestPoint& q = out[k];
    q.index = targets[k];
    q.I = t.influence;
    q.E = t.equivalence;
    q.S = t.similarity;
    if (options.with_connectedness) q.Z = connectedness(s, adopter_neighbors(s, targets[k], adopters));
  });
  return out;
}

void write_train_csv(const TrainingSet& train, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out.precision(17);
  out << "entity,week,I,E,S" << (train.with_connectedness ? ",Z" : "") << ",A\n";
  for (const auto& r : train.records) {
    out << r.entity << ',' << r.as_of_week << ',' << r.I << ',' << r.E << ',' << r.S;
    if (train.with_connectedness) out << ',' << r.Z;
    out << ',' << r.A << '\n';
  }
}

}  // namespace adopt
