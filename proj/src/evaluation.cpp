#include "adopt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "adopt/train_builder.hpp"

namespace adopt {

namespace {

struct MethodName {
  Method method;
  const char* name;
};

constexpr MethodName kMethodNames[] = {
    {Method::Lemnb, "lemnb"}, {Method::LemnbPlus, "lemnb+"}, {Method::CM1, "cm1"},
    {Method::CM2, "cm2"},     {Method::CM3, "cm3"},          {Method::IP, "ip"},
    {Method::NB, "nb"},       {Method::LWNB, "lwnb"},        {Method::KNN, "knn"},
};

// Stream tags for derive_seed.
enum : std::uint64_t { kTagEnsemble = 1, kTagFit = 2, kTagInfer = 3, kTagKnn = 4 };

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace

Method parse_method(const std::string& s) {
  for (const auto& m : kMethodNames)
    if (s == m.name) return m.method;
  throw ValidationError("unknown method '" + s + "' (expected lemnb|lemnb+|cm1|cm2|cm3|ip|nb|lwnb|knn)");
}

const char* to_string(Method m) {
  for (const auto& e : kMethodNames)
    if (e.method == m) return e.name;
  return "?";
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string token;
  while (std::getline(ss, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    Method m = parse_method(token);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw ValidationError("no methods given");
  return out;
}

std::pair<Week, Week> parse_week_range(const std::string& s) {
  auto parse = [&](const std::string& t) {
    try {
      std::size_t used = 0;
      int v = std::stoi(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("bad week range '" + s + "' (expected a..b)");
    }
  };
  auto dots = s.find("..");
  Week a, b;
  if (dots == std::string::npos) {
    a = b = parse(trim(s));
  } else {
    a = parse(trim(s.substr(0, dots)));
    b = parse(trim(s.substr(dots + 2)));
  }
  if (a < 1 || b < a) throw ValidationError("bad week range '" + s + "'");
  return {a, b};
}

// ---------------------------------------------------------------- metrics

std::optional<double> auc(std::span<const double> scores, std::span<const int> labels) {
  const std::size_t n = scores.size();
  if (labels.size() != n) throw std::invalid_argument("scores and labels differ in length");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0, positives = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    double mid_rank = 0.5 * static_cast<double>(i + j + 1);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) {
        rank_sum += mid_rank;
        positives += 1.0;
      }
    i = j;
  }
  double negatives = static_cast<double>(n) - positives;
  if (positives == 0.0 || negatives == 0.0) return std::nullopt;
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

WilcoxonResult wilcoxon_signed_ranks(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired samples differ in length");
  if (a.size() < 6) throw ValidationError("the signed-ranks test needs at least 6 pairs");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] - b[i] != 0.0) d.push_back(a[i] - b[i]);
  WilcoxonResult r;
  r.n_nonzero = d.size();
  if (d.empty()) return r;

  std::sort(d.begin(), d.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
  const double n = static_cast<double>(d.size());
  double w_plus = 0.0, w_minus = 0.0, tie_term = 0.0;
  for (std::size_t i = 0; i < d.size();) {
    std::size_t j = i;
    while (j < d.size() && std::abs(d[j]) == std::abs(d[i])) ++j;
    double rank = 0.5 * static_cast<double>(i + j + 1);
    double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k) (d[k] > 0 ? w_plus : w_minus) += rank;
    i = j;
  }
  r.statistic = std::min(w_plus, w_minus);
  double mean = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  if (var <= 0.0) return r;
  double z = (r.statistic - mean) / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
  return r;
}

// ---------------------------------------------------------------- prediction

std::vector<PredictionRow> predict_week(const Dataset& data, Week T, std::span<const Method> methods,
                                        const EvalConfig& cfg, Diagnostics* diag) {
  if (T < 1 || T > data.horizon()) throw ValidationError("prediction week T outside [1, horizon]");
  auto wants = [&](std::initializer_list<Method> ms) {
    for (Method m : ms)
      if (std::find(methods.begin(), methods.end(), m) != methods.end()) return true;
    return false;
  };
  const bool need_train = wants({Method::Lemnb, Method::LemnbPlus, Method::NB, Method::LWNB, Method::KNN});
  const bool need_z = wants({Method::LemnbPlus});

  NetworkSnapshot snap = data.snapshot(T);
  std::vector<Index> targets = snap.nonadopters();
  std::vector<int> labels(targets.size());
  for (std::size_t k = 0; k < targets.size(); ++k) labels[k] = data.adoption_week(targets[k]) == T + 1 ? 1 : 0;

  PowerOptions popt{cfg.scheme, need_z, cfg.threads};
  NormalizationBounds bounds;
  TrainingSet train_z, train;
  std::vector<TestPoint> tests;
  if (need_train) {
    bounds = observed_bounds(snap, cfg.scheme, cfg.threads);
    train_z = construct_train(data, T, popt, bounds);
    train = train_z;
    train.with_connectedness = false;
    tests = build_test_points(snap, popt, bounds);
  }

  std::vector<PredictionRow> rows;
  rows.reserve(targets.size() * methods.size());
  for (Method m : methods) {
    std::vector<double> prob(targets.size(), 0.0);
    switch (m) {
      case Method::CM1:
      case Method::CM2:
      case Method::CM3: {
        CascadeVariant v = m == Method::CM1 ? CascadeVariant::CM1
                           : m == Method::CM2 ? CascadeVariant::CM2
                                              : CascadeVariant::CM3;
        for (std::size_t k = 0; k < targets.size(); ++k) prob[k] = cascade_predict(snap, targets[k], v);
        break;
      }
      case Method::IP: {
        InfluenceProbTable table = learn_influence_probs(data, T);
        for (std::size_t k = 0; k < targets.size(); ++k) prob[k] = ip_predict(table, snap, targets[k]);
        break;
      }
      case Method::NB: {
        ParamVector theta = nb_fit(train, cfg.clamp);
        for (std::size_t k = 0; k < targets.size(); ++k) prob[k] = nb_posterior(theta, tests[k]);
        break;
      }
      case Method::LWNB:
        parallel_for(targets.size(), cfg.threads,
                     [&](std::size_t k) { prob[k] = lwnb_predict(train, tests[k], cfg.clamp); });
        break;
      case Method::KNN: {
        int kk = select_knn_k(train, cfg.knn_grid, cfg.knn_folds,
                              derive_seed(cfg.seed, static_cast<std::uint64_t>(T), kTagKnn));
        parallel_for(targets.size(), cfg.threads, [&](std::size_t k) { prob[k] = knn_predict(train, tests[k], kk); });
        break;
      }
      case Method::Lemnb:
      case Method::LemnbPlus: {
        const TrainingSet& tr = m == Method::LemnbPlus ? train_z : train;
        const std::uint64_t tag = static_cast<std::uint64_t>(m);
        BootstrapEnsemble ensemble(tr, cfg.M, derive_seed(cfg.seed, static_cast<std::uint64_t>(T), kTagEnsemble, tag));
        std::vector<Diagnostics> local(targets.size());
        parallel_for(targets.size(), cfg.threads, [&](std::size_t k) {
          const EntityId id = data.id(targets[k]);
          const auto week = static_cast<std::uint64_t>(T);
          FitResult fit = ensemble.fit(tests[k], cfg.N, derive_seed(cfg.seed, week, kTagFit, id * 16 + tag),
                                       cfg.clamp, &local[k]);
          std::mt19937_64 rng(derive_seed(cfg.seed, week, kTagInfer, id * 16 + tag));
          prob[k] = infer_probability(fit.theta, tests[k], cfg.inference, rng);
        });
        if (diag)
          for (const auto& d : local) diag->merge(d);
        break;
      }
    }
    for (std::size_t k = 0; k < targets.size(); ++k)
      rows.push_back({data.id(targets[k]), T + 1, m, prob[k], labels[k]});
  }
  return rows;
}

// ---------------------------------------------------------------- report

std::optional<double> EvalReport::auc_of(Week T, Method m) const {
  for (const auto& c : cells)
    if (c.week == T && c.method == m) return c.auc;
  return std::nullopt;
}

const MethodSummary& EvalReport::summary_of(Method m) const {
  for (const auto& s : summary)
    if (s.method == m) return s;
  throw std::out_of_range(std::string("no summary for ") + to_string(m));
}

const Comparison& EvalReport::comparison(Method a, Method b) const {
  for (const auto& c : comparisons)
    if (c.a == a && c.b == b) return c;
  throw std::out_of_range(std::string("no comparison ") + to_string(a) + " vs " + to_string(b));
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

void EvalReport::write(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw ValidationError(std::string("cannot write ") + name + " in " + dir);
    return out;
  };
  {
    auto out = open("report.csv");
    out << "week,method,auc\n";
    for (const auto& c : cells)
      out << c.week << ',' << to_string(c.method) << ',' << (c.auc ? format_double(*c.auc) : "") << '\n';
  }
  {
    auto out = open("summary.csv");
    out << "method,mean_auc,std_auc\n";
    for (const auto& s : summary)
      out << to_string(s.method) << ',' << (s.weeks ? format_double(s.mean_auc) : "") << ','
          << (s.weeks > 1 ? format_double(s.std_auc) : "") << '\n';
  }
  {
    auto out = open("wilcoxon.csv");
    out << "method_a,method_b,statistic,p_value\n";
    for (const auto& c : comparisons) {
      out << to_string(c.a) << ',' << to_string(c.b) << ',';
      if (c.result) {
        out << format_double(c.result->statistic) << ',' << format_double(c.result->p_value);
      } else {
        out << ',';
      }
      out << '\n';
    }
  }
}

EvalReport run_rolling_eval(const Dataset& data, std::span<const Method> methods, Week first, Week last,
                            const EvalConfig& cfg, bool keep_predictions) {
  if (first < 1 || last < first || last > data.horizon() - 1)
    throw ValidationError("week range must lie within [1, horizon - 1]");
  EvalReport report;
  for (Week T = first; T <= last; ++T) {
    std::vector<PredictionRow> rows = predict_week(data, T, methods, cfg, &report.diagnostics);
    for (Method m : methods) {
      std::vector<double> scores;
      std::vector<int> labels;
      for (const auto& r : rows)
        if (r.method == m) {
          scores.push_back(r.probability);
          labels.push_back(r.label);
        }
      report.cells.push_back({T, m, auc(scores, labels)});
    }
    if (keep_predictions) report.predictions.insert(report.predictions.end(), rows.begin(), rows.end());
  }

  for (Method m : methods) {
    MethodSummary s{m};
    std::vector<double> v;
    for (const auto& c : report.cells)
      if (c.method == m && c.auc) v.push_back(*c.auc);
    s.weeks = v.size();
    if (!v.empty()) {
      s.mean_auc = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - s.mean_auc) * (x - s.mean_auc);
      s.std_auc = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    }
    report.summary.push_back(s);
  }

  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = i + 1; j < methods.size(); ++j) {
      Comparison c{methods[i], methods[j], std::nullopt};
      std::vector<double> a, b;
      for (Week T = first; T <= last; ++T) {
        auto x = report.auc_of(T, methods[i]);
        auto y = report.auc_of(T, methods[j]);
        if (x && y) {
          a.push_back(*x);
          b.push_back(*y);
        }
      }
      if (a.size() >= 6) c.result = wilcoxon_signed_ranks(a, b);
      report.comparisons.push_back(c);
    }
  }
  return report;
}

}  // namespace adopt
