// Command-line front end: synth, train-dump, predict, evaluate.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "adopt/evaluation.hpp"
#include "adopt/synth.hpp"
#include "adopt/train_builder.hpp"

namespace fs = std::filesystem;
using namespace adopt;

namespace {

struct DataArgs {
  std::string data_dir;
  std::string communications, profiles, adoption, actions, schema;
  bool directed = false;
  std::optional<int> horizon;
  std::optional<std::uint64_t> item;

  void attach(CLI::App* app) {
    app->add_option("--data", data_dir, "Directory holding communications.csv, profiles.csv, adoption.csv[, actions.csv]");
    app->add_option("--communications", communications, "Communications CSV (src_id,dst_id,week,intensity)");
    app->add_option("--profiles", profiles, "Profiles CSV (entity_id,week,attr...)");
    app->add_option("--adoption", adoption, "Adoption CSV (entity_id,item_id,week)");
    app->add_option("--actions", actions, "Extra multi-item action log for the ip method");
    app->add_option("--schema", schema, "Attribute schema JSON (default: <profiles stem>.schema.json)");
    app->add_option("--directed", directed, "Interpret ties as directional");
    app->add_option("--horizon", horizon, "Last observed week (default: largest week in the files)");
    app->add_option("--item", item, "Focal item id when the adoption file holds several items");
  }

  Dataset load() const {
    auto pick = [&](const std::string& explicit_path, const char* name) {
      if (!explicit_path.empty()) return explicit_path;
      if (data_dir.empty()) throw ValidationError(std::string("missing --") + name + " (or --data)");
      return (fs::path(data_dir) / (std::string(name) + ".csv")).string();
    };
    IngestOptions opt;
    opt.directed = directed;
    opt.horizon = horizon;
    if (item) opt.item = *item;
    opt.schema_path = schema;
    opt.actions_path = actions;
    if (opt.actions_path.empty() && !data_dir.empty() && fs::exists(fs::path(data_dir) / "actions.csv"))
      opt.actions_path = (fs::path(data_dir) / "actions.csv").string();
    return ingest_events(pick(communications, "communications"), pick(profiles, "profiles"),
                         pick(adoption, "adoption"), opt);
  }
};

struct ModelArgs {
  std::string distance_scheme = "mixed_mean";
  bool with_connectedness = false;
  int M = 5, N = 20;
  std::uint64_t seed = 1;
  std::string rate_clamp = "1e-8,1e8";
  double sigma = 1e-4;
  std::size_t min_samples = 100, max_samples = 100000;
  std::string sampler = "rqmc";
  unsigned threads = 0;

  void attach(CLI::App* app) {
    app->add_option("--distance_scheme,--distance-scheme", distance_scheme, "mixed_mean | euclidean");
    app->add_option("--with_connectedness,--with-connectedness", with_connectedness,
                    "Add the adopter-neighbor connectedness factor to training records");
    app->add_option("--M", M, "Bootstrap samples per fit");
    app->add_option("--N", N, "Trials per initialization case");
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--rate_clamp,--rate-clamp", rate_clamp, "Rate floor and ceiling, 'lo,hi'");
    app->add_option("--sigma", sigma, "Relative-change convergence threshold for inference");
    app->add_option("--min_samples,--min-samples", min_samples, "Minimum hidden-power draws");
    app->add_option("--max_samples,--max-samples", max_samples, "Maximum hidden-power draws");
    app->add_option("--sampler", sampler, "rqmc | iid");
    app->add_option("--threads", threads, "Worker threads (0 = all cores)");
  }

  EvalConfig config() const {
    EvalConfig c;
    c.scheme = parse_distance_scheme(distance_scheme);
    if (M < 2) throw ValidationError("M must be at least 2");
    if (N < 1) throw ValidationError("N must be at least 1");
    c.M = M;
    c.N = N;
    c.seed = seed;
    auto comma = rate_clamp.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument(rate_clamp);
      c.clamp.lo = std::stod(rate_clamp.substr(0, comma));
      c.clamp.hi = std::stod(rate_clamp.substr(comma + 1));
    } catch (const std::exception&) {
      throw ValidationError("rate_clamp must be 'lo,hi'");
    }
    if (!(c.clamp.lo > 0.0 && c.clamp.hi > c.clamp.lo)) throw ValidationError("rate_clamp needs 0 < lo < hi");
    c.inference.sigma = sigma;
    c.inference.min_samples = min_samples;
    c.inference.max_samples = max_samples;
    c.inference.sampler = parse_hidden_sampler(sampler);
    c.inference.validate();
    c.threads = resolve_threads(threads);
    return c;
  }
};

void print_diagnostics(const Diagnostics& d) {
  if (d.updates == 0) return;
  std::cerr << "em updates: " << d.updates << ", hidden-rate holds: " << d.hidden_holds
            << ", empty-class holds: " << d.empty_class_holds << ", nonpositive weights: " << d.nonpositive_weights
            << '\n';
}

std::vector<EntityId> parse_ids(const std::string& list) {
  std::vector<EntityId> out;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stoull(tok));
    } catch (const std::exception&) {
      throw ValidationError("bad entity id '" + tok + "'");
    }
  }
  return out;
}

// Entries of a key = value file become flags right after the subcommand name, ahead of
// the explicit flags, which therefore win. Sections other than the subcommand's are skipped.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path);
  std::vector<std::string> flags;
  std::string line, section;
  for (int number = 1; std::getline(in, line); ++number) {
    char quote = 0;
    for (std::size_t k = 0; k < line.size(); ++k) {
      if (quote == 0 && line[k] == '#') {
        line.resize(k);
        break;
      }
      if (line[k] == '"' || line[k] == '\'') quote = quote == line[k] ? 0 : (quote == 0 ? line[k] : quote);
    }
    std::string t = CLI::detail::trim_copy(line);
    if (t.empty()) continue;
    if (t.front() == '[' && t.back() == ']') {
      section = CLI::detail::trim_copy(t.substr(1, t.size() - 2));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path + ":" + std::to_string(number) + ": expected key = value");
    std::string key = CLI::detail::trim_copy(t.substr(0, eq));
    std::string value = CLI::detail::trim_copy(t.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front())
      value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ValidationError(path + ":" + std::to_string(number) + ": empty key");
    if (!section.empty() && section != args[1]) continue;
    flags.push_back("--" + key);
    flags.push_back(value);
  }
  args.insert(args.begin() + 2, flags.begin(), flags.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adoption-probability prediction with locally weighted EM Naive Bayes"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic diffusion dataset");
  synth->add_option("--config", config_path, "key = value file; flags override it");
  SynthConfig sc;
  std::string graph = "small_world", family = "exponential", synth_out;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--n_entities,--n-entities", sc.n_entities);
  synth->add_option("--graph", graph, "small_world | preferential_attachment");
  synth->add_option("--mean_degree,--mean-degree", sc.mean_degree);
  synth->add_option("--rewire_prob", sc.rewire_prob);
  synth->add_option("--directed", sc.directed);
  synth->add_option("--horizon", sc.horizon);
  synth->add_option("--w_I", sc.w_I);
  synth->add_option("--w_E", sc.w_E);
  synth->add_option("--w_S", sc.w_S);
  synth->add_option("--w_H", sc.w_H);
  synth->add_option("--w_Z", sc.w_Z);
  synth->add_option("--base_hazard,--base-hazard", sc.base_hazard);
  synth->add_option("--innovator_fraction", sc.innovator_fraction);
  synth->add_option("--confounder_family", family, "exponential | lognormal");
  synth->add_option("--n_side_items", sc.n_side_items);
  synth->add_option("--seed", sc.seed);

  // train-dump
  auto* dump = app.add_subcommand("train-dump", "Write the training records built at week T");
  dump->add_option("--config", config_path, "key = value file; flags override it");
  DataArgs dump_data;
  ModelArgs dump_model;
  int dump_week = 0;
  std::string dump_out;
  dump_data.attach(dump);
  dump_model.attach(dump);
  dump->add_option("--week,-T", dump_week, "Current week T")->required();
  dump->add_option("--out,--dump-train", dump_out, "Output CSV")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "Predict week T+1 adoption probabilities");
  predict->add_option("--config", config_path, "key = value file; flags override it");
  DataArgs pred_data;
  ModelArgs pred_model;
  int pred_week = 0;
  std::string pred_methods = "lemnb", pred_entities, pred_out = "predictions.csv";
  pred_data.attach(predict);
  pred_model.attach(predict);
  predict->add_option("--week,-T", pred_week, "Current week T")->required();
  predict->add_option("--methods,--method", pred_methods, "Comma-separated methods");
  predict->add_option("--entities", pred_entities, "Comma-separated entity ids (default: all nonadopters)");
  predict->add_option("--out", pred_out, "Output CSV");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Rolling evaluation over a range of weeks");
  evaluate->add_option("--config", config_path, "key = value file; flags override it");
  DataArgs eval_data;
  ModelArgs eval_model;
  std::string eval_methods = "lemnb,nb,cm2", eval_weeks, eval_out = ".";
  eval_data.attach(evaluate);
  eval_model.attach(evaluate);
  evaluate->add_option("--methods,--method", eval_methods, "Comma-separated methods");
  evaluate->add_option("--weeks", eval_weeks, "Range of T, e.g. 2..29 (default: 2..horizon-1)");
  evaluate->add_option("--out", eval_out, "Output directory for report.csv, summary.csv, wilcoxon.csv");

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (synth->parsed()) {
      sc.graph = parse_graph_model(graph);
      sc.confounder = parse_confounder_family(family);
      SynthResult r = generate_to(sc, synth_out);
      int adopters = 0;
      for (Week w : r.adoption_week) adopters += w != 0;
      std::cerr << "wrote " << synth_out << ": " << r.dataset.size() << " entities, " << adopters
                << " adopters over " << sc.horizon << " weeks\n";
    } else if (dump->parsed()) {
      EvalConfig cfg = dump_model.config();
      Dataset data = dump_data.load();
      PowerOptions opt{cfg.scheme, dump_model.with_connectedness, cfg.threads};
      write_train_csv(construct_train(data, dump_week, opt), dump_out);
    } else if (predict->parsed()) {
      EvalConfig cfg = pred_model.config();
      std::vector<Method> methods = parse_methods(pred_methods);
      Dataset data = pred_data.load();
      Diagnostics diag;
      std::vector<PredictionRow> rows = predict_week(data, pred_week, methods, cfg, &diag);
      std::vector<EntityId> wanted = parse_ids(pred_entities);
      for (EntityId id : wanted) {
        auto idx = data.index_of(id);
        if (!idx) throw ValidationError("unknown entity " + std::to_string(id));
        Week w = data.adoption_week(*idx);
        if (w != 0 && w <= pred_week)
          throw ValidationError("entity " + std::to_string(id) + " already adopted by week " +
                                std::to_string(pred_week));
      }
      std::ofstream out(pred_out);
      if (!out) throw ValidationError("cannot write " + pred_out);
      out.precision(10);
      out << "entity,week,method,probability\n";
      for (const auto& r : rows) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), r.entity) == wanted.end()) continue;
        out << r.entity << ',' << r.week << ',' << to_string(r.method) << ',' << r.probability << '\n';
      }
      print_diagnostics(diag);
    } else if (evaluate->parsed()) {
      EvalConfig cfg = eval_model.config();
      std::vector<Method> methods = parse_methods(eval_methods);
      Dataset data = eval_data.load();
      Week first = 2, last = data.horizon() - 1;
      if (!eval_weeks.empty()) std::tie(first, last) = parse_week_range(eval_weeks);
      if (last > data.horizon() - 1)
        throw ValidationError("week range ends at " + std::to_string(last) + " but the horizon is " +
                              std::to_string(data.horizon()) + "; the last usable T is horizon - 1");
      EvalReport report = run_rolling_eval(data, methods, first, last, cfg);
      report.write(eval_out);
      for (const auto& s : report.summary)
        std::cerr << to_string(s.method) << ": mean AUC " << s.mean_auc << " over " << s.weeks << " weeks\n";
      print_diagnostics(report.diagnostics);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
