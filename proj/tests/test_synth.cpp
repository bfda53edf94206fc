#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "adopt/synth.hpp"
#include "support.hpp"

using namespace adopt;
using namespace adopt::testing;

namespace {

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Adoption after week 1 against the latent trait and against the number of innovator neighbors.
std::pair<double, double> drivers(const SynthResult& r) {
  NetworkSnapshot s1 = r.dataset.snapshot(1);
  std::vector<double> adopted, latent, exposed;
  for (Index i = 0; i < r.dataset.size(); ++i) {
    if (r.adoption_week[i] == 1) continue;
    adopted.push_back(r.adoption_week[i] != 0 ? 1.0 : 0.0);
    latent.push_back(r.latent[i]);
    double k = 0.0;
    for (Index j = 0; j < r.dataset.size(); ++j)
      if (r.adoption_week[j] == 1 && s1.strength(j, i) > 0.0) k += 1.0;
    exposed.push_back(k);
  }
  return {correlation(adopted, latent), correlation(adopted, exposed)};
}

}  // namespace

TEST_CASE("written files ingest back to the same dataset") {
  SynthConfig c;
  c.n_entities = 150;
  c.horizon = 9;
  c.seed = 4;
  std::string dir = scratch_dir("synth_roundtrip").string();
  SynthResult r = generate_to(c, dir);
  IngestOptions opt;
  opt.horizon = c.horizon;
  opt.actions_path = dir + "/actions.csv";
  Dataset d = ingest_events(dir + "/communications.csv", dir + "/profiles.csv", dir + "/adoption.csv", opt);

  REQUIRE(d.size() == r.dataset.size());
  CHECK(d.horizon() == 9);
  CHECK(d.ids() == r.dataset.ids());
  CHECK(d.adoption_weeks() == r.dataset.adoption_weeks());
  CHECK(d.adoption_weeks() == r.adoption_week);
  CHECK(d.actions().size() == r.dataset.actions().size());
  REQUIRE(d.series().size() == r.dataset.series().size());
  for (std::size_t k = 0; k < d.series().size(); ++k) {
    const auto& a = d.series()[k];
    const auto& b = r.dataset.series()[k];
    CHECK(a.src == b.src);
    CHECK(a.dst == b.dst);
    CHECK(a.weeks == b.weeks);
    for (std::size_t w = 0; w < a.cumulative.size(); ++w)
      CHECK(a.cumulative[w] == doctest::Approx(b.cumulative[w]).epsilon(1e-12));
  }
  for (Index i = 0; i < d.size(); ++i)
    for (Week t : {0, 5, 9}) CHECK(d.characteristics_at(i, t) == r.dataset.characteristics_at(i, t));
}

TEST_CASE("a fixed seed reproduces every file byte for byte") {
  SynthConfig c;
  c.n_entities = 120;
  c.horizon = 6;
  c.seed = 12;
  std::string a = scratch_dir("synth_a").string(), b = scratch_dir("synth_b").string();
  generate_to(c, a);
  generate_to(c, b);
  for (const char* f : {"/communications.csv", "/profiles.csv", "/profiles.schema.json", "/adoption.csv",
                        "/actions.csv", "/truth.json"})
    CHECK(read_file(a + f) == read_file(b + f));
  c.seed = 13;
  generate_to(c, b);
  CHECK(read_file(a + "/adoption.csv") != read_file(b + "/adoption.csv"));
}

TEST_CASE("a one-week horizon holds only the innovators") {
  SynthConfig c;
  c.n_entities = 500;
  c.horizon = 1;
  SynthResult r = generate(c);
  int adopters = 0;
  for (Week w : r.adoption_week) {
    CHECK((w == 0 || w == 1));
    adopters += w == 1;
  }
  CHECK(adopters == 5);
}

TEST_CASE("default settings adopt about 0.4 percent of the remaining entities per week") {
  for (std::uint64_t seed : {1, 2}) {
    SynthConfig c;
    c.seed = seed;
    SynthResult r = generate(c);
    double rate = 0.0;
    for (Week t = 2; t <= c.horizon; ++t) {
      double at_risk = 0.0, fresh = 0.0;
      for (Week w : r.adoption_week) {
        at_risk += w == 0 || w >= t;
        fresh += w == t;
      }
      rate += fresh / at_risk;
    }
    rate /= c.horizon - 1;
    CHECK(rate > 0.0025);
    CHECK(rate < 0.0055);
  }
}

TEST_CASE("hazard weights decide what drives adoption") {
  SynthConfig latent_only;
  latent_only.n_entities = 3000;
  latent_only.w_I = latent_only.w_E = latent_only.w_S = 0.0;
  latent_only.w_H = 1.0;
  auto [h1, x1] = drivers(generate(latent_only));
  CHECK(h1 > 0.1);
  CHECK(std::abs(x1) < 0.08);

  SynthConfig influence_only = latent_only;
  influence_only.w_H = 0.0;
  influence_only.w_I = 1.0;
  auto [h2, x2] = drivers(generate(influence_only));
  CHECK(std::abs(h2) < 0.08);
  CHECK(x2 > 0.1);
}

TEST_CASE("configuration validation") {
  auto bad = [](auto edit) {
    SynthConfig c;
    edit(c);
    CHECK_THROWS_AS(c.validate(), ValidationError);
  };
  bad([](SynthConfig& c) { c.n_entities = 3; });
  bad([](SynthConfig& c) { c.horizon = 0; });
  bad([](SynthConfig& c) { c.mean_degree = 7; });
  bad([](SynthConfig& c) { c.w_H = 0.5; });
  bad([](SynthConfig& c) { c.w_I = -0.1, c.w_H = 0.8; });
  bad([](SynthConfig& c) { c.base_hazard = 0.0; });
  bad([](SynthConfig& c) { c.rewire_prob = 1.5; });
  CHECK_NOTHROW(SynthConfig{}.validate());
  CHECK_THROWS_AS(parse_graph_model("lattice"), ValidationError);
  CHECK(parse_confounder_family("lognormal") == ConfounderFamily::Lognormal);
}
