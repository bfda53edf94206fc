#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "adopt/network.hpp"

namespace adopt::testing {

struct Edge {
  EntityId a, b;
  Week week = 1;
  double intensity = 1.0;
};

/// Entities 1..n with no attributes; `adoptions` holds (entity, week) pairs of item 0.
inline Dataset graph_dataset(int n, const std::vector<Edge>& edges,
                             const std::vector<std::pair<EntityId, Week>>& adoptions, Week horizon,
                             bool directed = false) {
  DatasetBuilder b(AttributeSchema{}, directed);
  for (int i = 1; i <= n; ++i) b.add_entity(static_cast<EntityId>(i));
  for (const auto& e : edges) b.add_communication(e.a, e.b, e.week, e.intensity);
  for (const auto& [id, w] : adoptions) b.add_adoption(id, 0, w);
  return std::move(b).build(horizon, ItemId{0});
}

/// Random nondirectional graph with edge probability p, all ties formed in week 1.
inline std::vector<Edge> random_edges(int n, double p, std::mt19937_64& rng, bool directed = false) {
  std::bernoulli_distribution coin(p);
  std::vector<Edge> out;
  for (int i = 1; i <= n; ++i)
    for (int j = directed ? 1 : i + 1; j <= n; ++j)
      if (i != j && coin(rng)) out.push_back({EntityId(i), EntityId(j), 1, 1.0});
  return out;
}

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("adopt_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace adopt::testing
