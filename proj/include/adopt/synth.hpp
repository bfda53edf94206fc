#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adopt/network.hpp"

namespace adopt {

enum class GraphModel { SmallWorld, PreferentialAttachment };
enum class ConfounderFamily { Exponential, Lognormal };

GraphModel parse_graph_model(const std::string& s);
ConfounderFamily parse_confounder_family(const std::string& s);
const char* to_string(GraphModel g);
const char* to_string(ConfounderFamily c);

struct SynthConfig {
  int n_entities = 2000;
  GraphModel graph = GraphModel::SmallWorld;
  int mean_degree = 8;
  double rewire_prob = 0.1;  // small-world rewiring
  bool directed = false;
  int horizon = 30;

  // Hazard weights on the normalized powers and the latent trait; with the
  // connectedness term they sum to 1 together.
  double w_I = 0.25, w_E = 0.15, w_S = 0.15, w_H = 0.45, w_Z = 0.0;
  double base_hazard = 0.004;
  double innovator_fraction = 0.01;
  ConfounderFamily confounder = ConfounderFamily::Exponential;

  double late_tie_fraction = 0.2;   // ties whose first communication falls after week 1
  double weekly_activity = 0.6;     // chance a tie carries traffic in a given week
  int profile_update_every = 4;     // weeks between behavioral profile rows

  int n_side_items = 10;
  double side_seed_fraction = 0.02;
  double side_adoption_prob = 0.15;  // per earlier-adopting tied neighbor and week
  double side_background = 0.002;

  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthResult {
  Dataset dataset;                 // same content as the written files
  std::vector<double> latent;      // ĥ per entity, index order
  std::vector<Week> adoption_week; // 0 = never
};

/// Simulates the network, profiles, side-item cascades, and the focal diffusion.
SynthResult generate(const SynthConfig& cfg);

/// Writes communications.csv, profiles.csv, profiles.schema.json, adoption.csv,
/// actions.csv, and truth.json into `dir`.
SynthResult generate_to(const SynthConfig& cfg, const std::string& dir);

}  // namespace adopt
