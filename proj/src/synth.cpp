#include "adopt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"

#include "adopt/powers.hpp"

namespace adopt {

GraphModel parse_graph_model(const std::string& s) {
  if (s == "small_world") return GraphModel::SmallWorld;
  if (s == "preferential_attachment") return GraphModel::PreferentialAttachment;
  throw ValidationError("unknown graph model '" + s + "' (expected small_world|preferential_attachment)");
}

ConfounderFamily parse_confounder_family(const std::string& s) {
  if (s == "exponential") return ConfounderFamily::Exponential;
  if (s == "lognormal") return ConfounderFamily::Lognormal;
  throw ValidationError("unknown confounder_family '" + s + "' (expected exponential|lognormal)");
}

const char* to_string(GraphModel g) {
  return g == GraphModel::SmallWorld ? "small_world" : "preferential_attachment";
}

const char* to_string(ConfounderFamily c) {
  return c == ConfounderFamily::Exponential ? "exponential" : "lognormal";
}

void SynthConfig::validate() const {
  if (n_entities < 4) throw ValidationError("n_entities must be at least 4");
  if (horizon < 1) throw ValidationError("horizon must be at least 1");
  if (mean_degree < 2 || mean_degree % 2 != 0 || mean_degree >= n_entities)
    throw ValidationError("mean_degree must be even, >= 2, and below n_entities");
  for (double w : {w_I, w_E, w_S, w_H, w_Z})
    if (!(w >= 0.0)) throw ValidationError("hazard weights must be non-negative");
  if (std::abs(w_I + w_E + w_S + w_H + w_Z - 1.0) > 1e-9) throw ValidationError("hazard weights must sum to 1");
  if (!(base_hazard > 0.0 && base_hazard < 1.0)) throw ValidationError("base_hazard must lie in (0, 1)");
  if (!(innovator_fraction > 0.0 && innovator_fraction < 1.0))
    throw ValidationError("innovator_fraction must lie in (0, 1)");
  for (double p : {rewire_prob, late_tie_fraction, weekly_activity, side_seed_fraction, side_adoption_prob,
                   side_background})
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("probabilities must lie in [0, 1]");
  if (profile_update_every < 1) throw ValidationError("profile_update_every must be >= 1");
  if (n_side_items < 0) throw ValidationError("n_side_items must be >= 0");
}

namespace {

using Rng = std::mt19937_64;

double normal(Rng& rng) {
  double u1 = unit_uniform(rng), u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
}

double exponential(Rng& rng) { return -std::log1p(-unit_uniform(rng)); }

std::size_t pick(Rng& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n)));
}

double round4(double x) { return std::round(x * 1e4) / 1e4; }

std::string fmt4(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

using Edge = std::pair<int, int>;

std::set<Edge> small_world(const SynthConfig& c, Rng& rng) {
  const int n = c.n_entities, half = c.mean_degree / 2;
  std::set<Edge> edges;
  auto key = [](int a, int b) { return Edge{std::min(a, b), std::max(a, b)}; };
  for (int i = 0; i < n; ++i)
    for (int j = 1; j <= half; ++j) edges.insert(key(i, (i + j) % n));
  std::vector<Edge> lattice(edges.begin(), edges.end());
  for (const Edge& e : lattice) {
    if (unit_uniform(rng) >= c.rewire_prob) continue;
    int a = e.first;
    for (int tries = 0; tries < 32; ++tries) {
      int b = static_cast<int>(pick(rng, n));
      if (b == a || edges.count(key(a, b))) continue;
      edges.erase(e);
      edges.insert(key(a, b));
      break;
    }
  }
  return edges;
}

std::set<Edge> preferential_attachment(const SynthConfig& c, Rng& rng) {
  const int n = c.n_entities, m = c.mean_degree / 2;
  std::set<Edge> edges;
  std::vector<int> ends;
  for (int i = 0; i <= m; ++i)
    for (int j = i + 1; j <= m; ++j) {
      edges.insert({i, j});
      ends.push_back(i);
      ends.push_back(j);
    }
  for (int v = m + 1; v < n; ++v) {
    std::set<int> targets;
    while (static_cast<int>(targets.size()) < m) targets.insert(ends[pick(rng, ends.size())]);
    for (int u : targets) {
      edges.insert({u, v});
      ends.push_back(u);
      ends.push_back(v);
    }
  }
  return edges;
}

struct CommRow {
  int src, dst;
  Week week;
  double intensity;
};

struct ProfileRow {
  int entity;
  Week week;
  std::vector<std::string> values;
};

struct Raw {
  AttributeSchema schema;
  std::vector<CommRow> comms;
  std::vector<ProfileRow> profiles;
  std::vector<ActionEvent> side;  // entity is the dense index
};

EntityId entity_id(int i) { return static_cast<EntityId>(i + 1); }

Dataset build(const SynthConfig& c, const Raw& raw, const std::vector<Week>* focal) {
  DatasetBuilder b(raw.schema, c.directed);
  for (const auto& p : raw.profiles) b.add_profile(entity_id(p.entity), p.week, p.values);
  for (const auto& r : raw.comms) b.add_communication(entity_id(r.src), entity_id(r.dst), r.week, r.intensity);
  if (focal) {
    for (int i = 0; i < c.n_entities; ++i)
      if ((*focal)[i] != 0) b.add_adoption(entity_id(i), 0, (*focal)[i]);
    for (const auto& e : raw.side) b.add_adoption(entity_id(static_cast<int>(e.entity)), e.item, e.week);
  }
  return std::move(b).build(c.horizon, ItemId{0});
}

Raw simulate_background(const SynthConfig& c, Rng& rng) {
  Raw raw;
  raw.schema.attributes = {{"gender", AttributeType::Nominal},
                           {"age", AttributeType::Integer},
                           {"voice", AttributeType::Real},
                           {"data", AttributeType::Real},
                           {"sms", AttributeType::Real}};
  const int n = c.n_entities;

  std::set<Edge> edges = c.graph == GraphModel::SmallWorld ? small_world(c, rng) : preferential_attachment(c, rng);
  std::vector<std::pair<int, int>> ties;
  for (const Edge& e : edges) {
    if (!c.directed) {
      ties.push_back(e);
    } else if (unit_uniform(rng) < 0.5) {
      ties.push_back(e);
      ties.push_back({e.second, e.first});
    } else if (unit_uniform(rng) < 0.5) {
      ties.push_back(e);
    } else {
      ties.push_back({e.second, e.first});
    }
  }
  for (const auto& [a, b] : ties) {
    double base = 10.0 * std::exp(0.75 * normal(rng));
    Week onset = 1;
    if (c.horizon > 1 && unit_uniform(rng) < c.late_tie_fraction)
      onset = 2 + static_cast<Week>(pick(rng, static_cast<std::size_t>(c.horizon - 1)));
    for (Week w = onset; w <= c.horizon; ++w) {
      if (w != onset && unit_uniform(rng) >= c.weekly_activity) continue;
      raw.comms.push_back({a, b, w, round4(base * (0.5 + unit_uniform(rng)))});
    }
  }

  for (int i = 0; i < n; ++i) {
    std::string gender = unit_uniform(rng) < 0.5 ? "F" : "M";
    std::string age = std::to_string(18 + static_cast<int>(pick(rng, 53)));
    double behavior[3];
    for (double& x : behavior) x = std::exp(normal(rng));
    for (Week w = 0; w <= c.horizon; w += c.profile_update_every) {
      if (w > 0)
        for (double& x : behavior) x *= std::exp(0.05 * normal(rng));
      raw.profiles.push_back({i, w, {gender, age, fmt4(behavior[0]), fmt4(behavior[1]), fmt4(behavior[2])}});
    }
  }
  return raw;
}

void simulate_side_items(const SynthConfig& c, const Dataset& net, Raw& raw, Rng& rng) {
  const int n = c.n_entities;
  for (int item = 1; item <= c.n_side_items; ++item) {
    std::vector<Week> week(n, 0);
    int seeds = std::max(1, static_cast<int>(std::lround(c.side_seed_fraction * n)));
    for (int s = 0; s < seeds; ++s) {
      int v = static_cast<int>(pick(rng, n));
      if (week[v] == 0) week[v] = 1 + static_cast<Week>(pick(rng, std::min(3, c.horizon)));
    }
    for (Week t = 2; t <= c.horizon; ++t) {
      NetworkSnapshot snap = net.snapshot(t - 1);
      for (int v = 0; v < n; ++v) {
        if (week[v] != 0) continue;
        int exposed = 0;
        for (const Neighbor& u : snap.in_neighbors(static_cast<Index>(v)))
          if (week[u.index] != 0 && week[u.index] < t) ++exposed;
        double p = 1.0 - std::pow(1.0 - c.side_adoption_prob, exposed) * (1.0 - c.side_background);
        if (unit_uniform(rng) < p) week[v] = t;
      }
    }
    for (int v = 0; v < n; ++v)
      if (week[v] != 0) raw.side.push_back({static_cast<Index>(v), static_cast<ItemId>(item), week[v]});
  }
}

// v / mean over the given values; 1 everywhere when the mean vanishes.
void normalize_to_unit_mean(std::vector<double>& v) {
  if (v.empty()) return;
  double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (!(mean > 0.0)) {
    std::fill(v.begin(), v.end(), 1.0);
    return;
  }
  for (double& x : v) x /= mean;
}

std::vector<Week> simulate_focal(const SynthConfig& c, const Dataset& net, const std::vector<double>& latent,
                                 Rng& rng) {
  const int n = c.n_entities;
  std::vector<Week> week(n, 0);
  int innovators = std::max(1, static_cast<int>(std::lround(c.innovator_fraction * n)));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int k = 0; k < innovators; ++k) {
    std::swap(order[k], order[k + pick(rng, static_cast<std::size_t>(n - k))]);
    week[order[k]] = 1;
  }

  const double tie_slots = static_cast<double>(n - 2) * (c.directed ? 2.0 : 1.0);
  for (Week t = 2; t <= c.horizon; ++t) {
    NetworkSnapshot snap = net.snapshot(t - 1);
    NormalizationBounds b;
    b.x_max = snap.max_strength();
    b.y_max = std::sqrt(2.0 * tie_slots);
    b.d_max = 1.0;
    std::vector<Index> adopters, targets;
    for (int i = 0; i < n; ++i) (week[i] != 0 ? adopters : targets).push_back(static_cast<Index>(i));
    if (targets.empty()) break;
    std::vector<double> I(targets.size()), E(targets.size()), S(targets.size()), H(targets.size()),
        Z(targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k) {
      TotalPowers p = total_powers(snap, targets[k], adopters, b, DistanceScheme::MixedMean);
      I[k] = p.influence;
      E[k] = p.equivalence;
      S[k] = p.similarity;
      H[k] = latent[targets[k]];
      if (c.w_Z > 0.0) Z[k] = connectedness(snap, adopter_neighbors(snap, targets[k], adopters));
    }
    for (auto* v : {&I, &E, &S, &H, &Z}) normalize_to_unit_mean(*v);
    for (std::size_t k = 0; k < targets.size(); ++k) {
      double score = c.w_I * I[k] + c.w_E * E[k] + c.w_S * S[k] + c.w_H * H[k] + c.w_Z * Z[k];
      double hazard = std::clamp(c.base_hazard * score, 0.0, 0.95);
      if (unit_uniform(rng) < hazard) week[targets[k]] = t;
    }
  }
  return week;
}

}  // namespace

SynthResult generate(const SynthConfig& c) {
  c.validate();
  Rng background_rng(derive_seed(c.seed, 1));
  Raw raw = simulate_background(c, background_rng);
  Dataset net = build(c, raw, nullptr);

  Rng side_rng(derive_seed(c.seed, 2));
  simulate_side_items(c, net, raw, side_rng);

  Rng latent_rng(derive_seed(c.seed, 3));
  std::vector<double> latent(c.n_entities);
  for (double& h : latent) {
    if (c.confounder == ConfounderFamily::Exponential) {
      h = exponential(latent_rng);
    } else {
      h = std::exp(normal(latent_rng) - 0.5);
    }
  }

  Rng focal_rng(derive_seed(c.seed, 4));
  std::vector<Week> focal = simulate_focal(c, net, latent, focal_rng);
  return SynthResult{build(c, raw, &focal), std::move(latent), std::move(focal)};
}

SynthResult generate_to(const SynthConfig& c, const std::string& dir) {
  c.validate();
  SynthResult result = generate(c);
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw ValidationError(std::string("cannot write ") + (fs::path(dir) / name).string());
    return out;
  };

  const Dataset& d = result.dataset;
  {
    auto out = open("communications.csv");
    out << "src_id,dst_id,week,intensity\n";
    for (const auto& s : d.series()) {
      double prev = 0.0;
      for (std::size_t k = 0; k < s.weeks.size(); ++k) {
        out << d.id(s.src) << ',' << d.id(s.dst) << ',' << s.weeks[k] << ',' << fmt4(s.cumulative[k] - prev)
            << '\n';
        prev = s.cumulative[k];
      }
    }
  }
  {
    auto out = open("profiles.csv");
    out << "entity_id,week";
    for (const auto& a : d.schema().attributes) out << ',' << a.name;
    out << '\n';
    for (Index i = 0; i < d.size(); ++i) {
      for (Week w = 0; w <= c.horizon; w += c.profile_update_every) {
        const auto& v = d.characteristics_at(i, w);
        out << d.id(i) << ',' << w;
        for (std::size_t a = 0; a < v.size(); ++a) {
          AttributeType type = d.schema().attributes[a].type;
          out << ',';
          if (type == AttributeType::Nominal) {
            out << d.nominal_label(a, static_cast<int>(v[a]));
          } else if (type == AttributeType::Integer) {
            out << static_cast<long long>(v[a]);
          } else {
            out << fmt4(v[a]);
          }
        }
        out << '\n';
      }
    }
  }
  d.schema().save_json((fs::path(dir) / "profiles.schema.json").string());
  {
    auto out = open("adoption.csv");
    out << "entity_id,item_id,week\n";
    for (Index i = 0; i < d.size(); ++i)
      if (d.adoption_week(i) != 0) out << d.id(i) << ",0," << d.adoption_week(i) << '\n';
  }
  {
    auto out = open("actions.csv");
    out << "entity_id,item_id,week\n";
    for (const auto& e : d.actions()) out << d.id(e.entity) << ',' << e.item << ',' << e.week << '\n';
  }
  {
    nlohmann::ordered_json truth;
    truth["config"] = {{"n_entities", c.n_entities},
                       {"graph", to_string(c.graph)},
                       {"mean_degree", c.mean_degree},
                       {"rewire_prob", c.rewire_prob},
                       {"directed", c.directed},
                       {"horizon", c.horizon},
                       {"w_I", c.w_I},
                       {"w_E", c.w_E},
                       {"w_S", c.w_S},
                       {"w_H", c.w_H},
                       {"w_Z", c.w_Z},
                       {"base_hazard", c.base_hazard},
                       {"innovator_fraction", c.innovator_fraction},
                       {"confounder_family", to_string(c.confounder)},
                       {"n_side_items", c.n_side_items},
                       {"seed", c.seed}};
    nlohmann::ordered_json entities = nlohmann::ordered_json::array();
    for (Index i = 0; i < d.size(); ++i)
      entities.push_back({{"entity_id", d.id(i)}, {"latent", result.latent[i]}, {"adoption_week", d.adoption_week(i)}});
    truth["entities"] = std::move(entities);
    auto out = open("truth.json");
    out << truth.dump(2) << '\n';
  }
  return result;
}

}  // namespace adopt
