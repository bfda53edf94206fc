#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "adopt/evaluation.hpp"
#include "adopt/synth.hpp"
#include "support.hpp"

using namespace adopt;
using namespace adopt::testing;

namespace {

SynthConfig small_world(std::uint64_t seed) {
  SynthConfig c;
  c.n_entities = 300;
  c.horizon = 10;
  c.base_hazard = 0.03;
  c.innovator_fraction = 0.03;
  c.seed = seed;
  return c;
}

EvalConfig fast_config() {
  EvalConfig c;
  c.M = 2;
  c.N = 3;
  return c;
}

}  // namespace

TEST_CASE("AUC examples") {
  std::vector<double> s = {0.9, 0.4, 0.6, 0.1};
  CHECK(*auc(s, std::vector<int>{1, 0, 1, 0}) == 1.0);
  CHECK(*auc(s, std::vector<int>{0, 1, 0, 1}) == 0.0);
  CHECK(*auc(s, std::vector<int>{0, 0, 1, 0}) == doctest::Approx(2.0 / 3.0));
  CHECK(*auc(s, std::vector<int>{0, 0, 1, 1}) == doctest::Approx(0.25));
  CHECK(*auc(std::vector<double>{0.3, 0.3, 0.3}, std::vector<int>{1, 0, 0}) == 0.5);
  CHECK(*auc(std::vector<double>{0.2, 0.5, 0.5, 0.8}, std::vector<int>{0, 1, 0, 1}) == doctest::Approx(0.875));
  CHECK_FALSE(auc(s, std::vector<int>{1, 1, 1, 1}).has_value());
  CHECK_FALSE(auc(std::vector<double>{}, std::vector<int>{}).has_value());
}

TEST_CASE("AUC under transforms and relabeling") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(60), t(60);
    std::vector<int> y(60), flipped(60);
    for (int i = 0; i < 60; ++i) {
      s[i] = std::round(u(rng) * 20.0) / 20.0;  // coarse grid to force ties
      t[i] = std::exp(3.0 * s[i]) - 7.0;
      y[i] = u(rng) < 0.3 ? 1 : 0;
      flipped[i] = 1 - y[i];
    }
    y[0] = 1, y[1] = 0, flipped[0] = 0, flipped[1] = 1;
    double a = *auc(s, y);
    CHECK(*auc(t, y) == doctest::Approx(a).epsilon(1e-14));
    CHECK(*auc(s, flipped) == doctest::Approx(1.0 - a).epsilon(1e-12));
  }
}

TEST_CASE("signed-ranks test") {
  std::vector<double> a(10, 0.7);
  CHECK(wilcoxon_signed_ranks(a, a).p_value == 1.0);
  CHECK(wilcoxon_signed_ranks(a, a).n_nonzero == 0);

  std::vector<double> hi(50), lo(50);
  for (int i = 0; i < 50; ++i) hi[i] = 0.6 + 0.001 * i, lo[i] = 0.55 + 0.0005 * i;
  WilcoxonResult r = wilcoxon_signed_ranks(hi, lo);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value < 1e-3);

  // References from scipy.stats.wilcoxon(method="approx", correction=False).
  std::vector<double> x = {0.81, 0.77, 0.69, 0.92, 0.75, 0.70, 0.88, 0.66, 0.79, 0.73};
  std::vector<double> y = {0.74, 0.79, 0.60, 0.85, 0.75, 0.62, 0.80, 0.70, 0.72, 0.65};
  r = wilcoxon_signed_ranks(x, y);
  CHECK(r.statistic == 3.0);
  CHECK(r.n_nonzero == 9);
  CHECK(r.p_value == doctest::Approx(0.019989497603410948).epsilon(1e-6));

  std::vector<double> x2 = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::vector<double> y2 = {1.5, 1, 2, 5, 3, 4.5, 9, 6, 8, 8, 13, 10};
  r = wilcoxon_signed_ranks(x2, y2);
  CHECK(r.statistic == 23.5);
  CHECK(r.p_value == doctest::Approx(0.21589134283845213).epsilon(1e-6));
  CHECK(wilcoxon_signed_ranks(y2, x2).p_value == doctest::Approx(r.p_value).epsilon(1e-14));

  std::vector<double> five(5, 0.5);
  CHECK_THROWS_AS(wilcoxon_signed_ranks(five, five), ValidationError);
}

TEST_CASE("method and week parsing") {
  CHECK(parse_methods("lemnb,cm2") == std::vector<Method>{Method::Lemnb, Method::CM2});
  try {
    parse_methods("nb,bogus,cm1");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
  CHECK(parse_week_range("2..4") == std::pair<Week, Week>{2, 4});
  CHECK(parse_week_range("7") == std::pair<Week, Week>{7, 7});
  CHECK_THROWS_AS(parse_week_range("4..2"), ValidationError);
  CHECK_THROWS_AS(parse_week_range("0..3"), ValidationError);
  CHECK_THROWS_AS(parse_week_range("a..3"), ValidationError);
}

TEST_CASE("rolling evaluation on a single cell") {
  Dataset d = generate(small_world(3)).dataset;
  std::vector<Method> m = {Method::CM2};
  EvalReport r = run_rolling_eval(d, m, 4, 4, fast_config());
  REQUIRE(r.cells.size() == 1);
  CHECK(r.cells[0].week == 4);
  CHECK(r.cells[0].method == Method::CM2);
  CHECK(r.comparisons.empty());
  CHECK_THROWS_AS(run_rolling_eval(d, m, 4, d.horizon(), fast_config()), ValidationError);
}

TEST_CASE("order-equivalent methods tie in every week") {
  // CM2 and CM3 are both increasing in the number of adopting neighbors.
  Dataset d = generate(small_world(5)).dataset;
  std::vector<Method> m = {Method::CM2, Method::CM3};
  EvalReport r = run_rolling_eval(d, m, 1, 9, fast_config());
  CHECK(r.cells.size() == 18);
  for (Week T = 1; T <= 9; ++T) CHECK(r.auc_of(T, Method::CM2) == r.auc_of(T, Method::CM3));
  const Comparison& c = r.comparison(Method::CM2, Method::CM3);
  REQUIRE(c.result.has_value());
  CHECK(c.result->p_value == 1.0);
}

TEST_CASE("predictions do not see events after the prediction week") {
  Dataset d = generate(small_world(7)).dataset;
  std::vector<Method> all = {Method::Lemnb, Method::LemnbPlus, Method::CM1, Method::CM2, Method::CM3,
                             Method::IP,    Method::NB,        Method::LWNB, Method::KNN};
  for (Week T : {3, 6}) {
    auto full = predict_week(d, T, all, fast_config());
    auto cut = predict_week(d.truncated(T), T, all, fast_config());
    REQUIRE(full.size() == cut.size());
    for (std::size_t i = 0; i < full.size(); ++i) {
      CHECK(full[i].entity == cut[i].entity);
      CHECK(full[i].method == cut[i].method);
      CHECK(full[i].probability == cut[i].probability);
      CHECK(cut[i].label == 0);
    }
  }
}

TEST_CASE("report files") {
  Dataset d = generate(small_world(9)).dataset;
  std::vector<Method> m = {Method::CM2, Method::NB};
  std::string dir = scratch_dir("report");

  EvalReport few = run_rolling_eval(d, m, 2, 3, fast_config());
  few.write(dir);
  CHECK(read_file(dir + "/wilcoxon.csv") == "method_a,method_b,statistic,p_value\ncm2,nb,,\n");
  std::string report = read_file(dir + "/report.csv");
  CHECK(report.rfind("week,method,auc\n2,cm2,", 0) == 0);
  CHECK(std::count(report.begin(), report.end(), '\n') == 5);
  CHECK(read_file(dir + "/summary.csv").rfind("method,mean_auc,std_auc\ncm2,", 0) == 0);

  EvalReport again = run_rolling_eval(d, m, 2, 3, fast_config());
  again.write(dir + "/b");
  for (const char* f : {"/report.csv", "/summary.csv", "/wilcoxon.csv"})
    CHECK(read_file(dir + f) == read_file(dir + "/b" + f));
}
