#pragma once

#include <string>
#include <vector>

#include "adopt/network.hpp"
#include "adopt/powers.hpp"

namespace adopt {

/// One training row: total powers received by an entity and its adoption decision.
struct PowerRecord {
  EntityId entity = 0;
  Week as_of_week = 0;
  double I = 0.0, E = 0.0, S = 0.0, Z = 0.0;
  int A = 0;
};

struct TrainingSet {
  std::vector<PowerRecord> records;
  bool with_connectedness = false;

  std::size_t size() const { return records.size(); }
};

struct PowerOptions {
  DistanceScheme scheme = DistanceScheme::MixedMean;
  bool with_connectedness = false;
  unsigned threads = 1;
};

/// Powers received by a nonadopter at week T from every adopter by T. Z is set
/// only when `with_connectedness` is on.
struct TestPoint {
  Index index = 0;
  double I = 0.0, E = 0.0, S = 0.0, Z = 0.0;
};

/// Replays the adoption history up to T. Adopters get powers at τ_k - 1 from
/// the adopters of strictly earlier weeks (label 1); nonadopters at T get powers
/// at T - 1 from the adopters by T - 1 (label 0). Adopter records come first,
/// ordered by adoption week then entity id.
TrainingSet construct_train(const Dataset& data, Week T, const PowerOptions& options,
                            const NormalizationBounds& bounds);

/// As above, with bounds observed on the week-T snapshot.
TrainingSet construct_train(const Dataset& data, Week T, const PowerOptions& options);

/// Test points for every nonadopter at T, in entity order.
std::vector<TestPoint> build_test_points(const NetworkSnapshot& snapshot_T, const PowerOptions& options,
                                         const NormalizationBounds& bounds);

/// Writes `entity,week,I,E,S[,Z],A`.
void write_train_csv(const TrainingSet& train, const std::string& path);

}  // namespace adopt
