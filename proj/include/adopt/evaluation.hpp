#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adopt/baselines.hpp"
#include "adopt/inference.hpp"
#include "adopt/lemnb.hpp"
#include "adopt/network.hpp"
#include "adopt/powers.hpp"

namespace adopt {

enum class Method { Lemnb, LemnbPlus, CM1, CM2, CM3, IP, NB, LWNB, KNN };

Method parse_method(const std::string& s);
const char* to_string(Method m);
/// Comma-separated method names; throws ValidationError naming the first bad token.
std::vector<Method> parse_methods(const std::string& list);

/// Mann-Whitney AUC with tied scores counted as half; nullopt unless both labels occur.
std::optional<double> auc(std::span<const double> scores, std::span<const int> labels);

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double p_value = 1.0;    // two-sided, normal approximation
  std::size_t n_nonzero = 0;
};

/// Zero differences are dropped and tied magnitudes get average ranks. Requires at
/// least 6 pairs; all-zero differences give p = 1.
WilcoxonResult wilcoxon_signed_ranks(std::span<const double> a, std::span<const double> b);

struct PredictionRow {
  EntityId entity = 0;
  Week week = 0;  // the predicted week, T + 1
  Method method = Method::Lemnb;
  double probability = 0.0;
  int label = 0;  // adopted exactly in week T + 1
};

struct EvalConfig {
  DistanceScheme scheme = DistanceScheme::MixedMean;
  int M = 5;
  int N = 20;
  RateClamp clamp;
  InferenceConfig inference;
  std::vector<int> knn_grid = kDefaultKnnGrid;
  int knn_folds = 10;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// Predictions at week T for every nonadopter at T, grouped by method then entity.
/// Uses only events up to T apart from the labels.
std::vector<PredictionRow> predict_week(const Dataset& data, Week T, std::span<const Method> methods,
                                        const EvalConfig& cfg, Diagnostics* diag = nullptr);

struct WeekAuc {
  Week week = 0;  // T
  Method method = Method::Lemnb;
  std::optional<double> auc;
};

struct MethodSummary {
  Method method = Method::Lemnb;
  double mean_auc = 0.0;
  double std_auc = 0.0;
  std::size_t weeks = 0;
};

struct Comparison {
  Method a = Method::Lemnb;
  Method b = Method::Lemnb;
  std::optional<WilcoxonResult> result;  // nullopt with fewer than 6 paired weeks
};

struct EvalReport {
  std::vector<WeekAuc> cells;
  std::vector<MethodSummary> summary;
  std::vector<Comparison> comparisons;
  std::vector<PredictionRow> predictions;  // filled when requested
  Diagnostics diagnostics;

  std::optional<double> auc_of(Week T, Method m) const;
  const MethodSummary& summary_of(Method m) const;
  const Comparison& comparison(Method a, Method b) const;

  /// report.csv, summary.csv, wilcoxon.csv.
  void write(const std::string& dir) const;
};

/// Trains at each T in [first, last], predicts T + 1, and scores. Weeks without both
/// adopters and nonadopters at T + 1 get a missing AUC.
EvalReport run_rolling_eval(const Dataset& data, std::span<const Method> methods, Week first, Week last,
                            const EvalConfig& cfg, bool keep_predictions = false);

/// `a..b` or a single week.
std::pair<Week, Week> parse_week_range(const std::string& s);

}  // namespace adopt
