// Command line front end: generate cohorts, fit and apply models, and run
// the full two-model study pipeline.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stemboost/boosting.hpp"
#include "stemboost/cohort.hpp"
#include "stemboost/evaluation.hpp"
#include "stemboost/interpret.hpp"
#include "stemboost/schema.hpp"
#include "stemboost/study.hpp"
#include "stemboost/synth.hpp"
#include "stemboost/tuning.hpp"

namespace {

using namespace stemboost;
using nlohmann::json;

struct GlobalOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = ".";
  int threads = 0;
  bool strict = false;

  std::string config_text() const {
    if (config_path.empty())
      fail(Errc::invalid_config, "this subcommand needs --config");
    return read_text_file(config_path);
  }
};

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::io_failure, "cannot create output directory " + dir);
}

void write_output(const std::string& dir, const std::string& name,
                  const std::string& content) {
  write_text_file(dir + "/" + name, content);
  std::printf("wrote %s/%s\n", dir.c_str(), name.c_str());
}

Cohort load_study_csv(const std::string& path) {
  if (path.empty()) fail(Errc::invalid_config, "missing --data");
  return load_csv(path, study_schema());
}

GbmModel load_model_file(const std::string& path) {
  if (path.empty()) fail(Errc::invalid_config, "missing --model");
  return load_model(path);
}

int run_synth(const GlobalOptions& global) {
  SynthConfig config;
  if (!global.config_path.empty())
    config = synth_config_from_json(global.config_text());
  if (global.seed_given) config.seed = global.seed;
  ensure_out_dir(global.out_dir);
  const SynthCohort cohort = generate_cohort(config);
  write_output(global.out_dir, "cohort.csv", to_csv(cohort.rows));
  write_output(global.out_dir, "truth.csv", truth_to_csv(cohort));
  write_output(global.out_dir, "synth_config.json",
               synth_config_to_json(config));
  return 0;
}

// {"input_csv": ..., "target": ..., "loss": "bernoulli" | "squared_error",
//  "hyperparameters": {n_trees, shrinkage, max_depth, min_node,
//  bag_fraction, seed}}
int run_train(const GlobalOptions& global) {
  json doc;
  try {
    doc = json::parse(global.config_text());
  } catch (const json::exception& e) {
    fail(Errc::invalid_config, std::string("train config: ") + e.what());
  }
  const std::string input = doc.value("input_csv", std::string());
  if (input.empty())
    fail(Errc::invalid_config, "train config: input_csv is required");
  const std::string target = doc.value("target", std::string("enrolled"));
  const std::string loss_name = doc.value("loss", std::string("bernoulli"));
  LossSpec loss;
  if (loss_name == "bernoulli")
    loss.kind = LossKind::bernoulli;
  else if (loss_name == "squared_error")
    loss.kind = LossKind::squared_error;
  else
    fail(Errc::invalid_config, "train config: unknown loss " + loss_name);

  HyperParams params;
  if (doc.contains("hyperparameters")) {
    const json& h = doc["hyperparameters"];
    params.n_trees = h.value("n_trees", params.n_trees);
    params.shrinkage = h.value("shrinkage", params.shrinkage);
    params.max_depth = h.value("max_depth", params.max_depth);
    params.min_node = h.value("min_node", params.min_node);
    params.bag_fraction = h.value("bag_fraction", params.bag_fraction);
    params.seed = h.value("seed", params.seed);
  }
  if (global.seed_given) params.seed = global.seed;

  const Cohort data = load_csv(input, study_schema());
  const GbmModel model = fit_gbm(data, target, params, loss);
  ensure_out_dir(global.out_dir);
  write_output(global.out_dir, "model.json", model_to_json(model));
  std::printf("trees %d, final training deviance %s\n", params.n_trees,
              format_double(model.train_trace.back()).c_str());
  return 0;
}

int run_evaluate(const GlobalOptions& global, const std::string& model_path,
                 const std::string& data_path, const std::string& target) {
  const GbmModel model = load_model_file(model_path);
  const Cohort data = load_study_csv(data_path);
  std::uint64_t unseen = 0;
  const auto scores =
      predict(model, data, -1, Output::probability, global.strict, &unseen);
  const RocCurve roc = roc_curve(target_as_real(data, target), scores);
  ensure_out_dir(global.out_dir);
  write_output(global.out_dir, "roc.csv", roc_to_csv(roc));
  write_output(global.out_dir, "roc.svg", roc_to_svg(roc, target + " ROC"));
  std::printf("auc %s over %lld rows", format_double(roc.auc).c_str(),
              static_cast<long long>(data.n_rows()));
  if (unseen > 0)
    std::printf(" (%llu unseen categorical cells routed right)",
                static_cast<unsigned long long>(unseen));
  std::printf("\n");
  return 0;
}

int run_influence(const GlobalOptions& global, const std::string& model_path) {
  const GbmModel model = load_model_file(model_path);
  const InfluenceTable table = relative_influence(model, study_schema());
  ensure_out_dir(global.out_dir);
  write_output(global.out_dir, "influence.csv", influence_to_csv(table));
  write_output(global.out_dir, "influence.svg",
               influence_to_svg(table, "relative influence"));
  for (std::size_t f = 0; f < table.feature_names.size(); ++f)
    std::printf("%-16s %6.2f%%\n", table.feature_names[f].c_str(),
                100.0 * table.influence[f]);
  return 0;
}

int run_ale(const GlobalOptions& global, const std::string& model_path,
            const std::string& data_path, const std::string& feature,
            int intervals) {
  const GbmModel model = load_model_file(model_path);
  const Cohort data = load_study_csv(data_path);
  const AleCurve curve = ale_1d(model, data, feature, intervals);
  ensure_out_dir(global.out_dir);
  write_output(global.out_dir, "ale_" + feature + ".csv", ale_to_csv(curve));
  write_output(global.out_dir, "ale_" + feature + ".svg",
               ale_to_svg(curve, feature + " effect"));
  std::printf("%zu intervals after merging\n", curve.interval_counts.size());
  return 0;
}

int run_pdp(const GlobalOptions& global, const std::string& model_path,
            const std::string& data_path, std::vector<std::string> pair,
            const std::vector<std::string>& facets, std::vector<int> grid,
            bool no_hull, bool raw) {
  const GbmModel model = load_model_file(model_path);
  const Cohort data = load_study_csv(data_path);
  if (pair.size() != 2)
    fail(Errc::invalid_config, "pdp: --pair needs exactly 2 features");
  if (grid.size() != 2)
    fail(Errc::invalid_config, "pdp: --grid needs exactly 2 sizes");
  const auto surfaces = pdp_faceted(
      model, data, {pair[0], pair[1]}, facets, {grid[0], grid[1]}, !no_hull,
      raw ? Output::raw : Output::probability);
  ensure_out_dir(global.out_dir);
  write_output(global.out_dir, "pdp.csv",
               pdp_to_csv(surfaces, facets, {pair[0], pair[1]}));
  write_output(global.out_dir, "pdp.svg",
               pdp_to_svg(surfaces, facets, {pair[0], pair[1]},
                          "joint effect of " + pair[0] + " and " + pair[1]));
  std::printf("%zu facet surfaces\n", surfaces.size());
  return 0;
}

int run_study_command(const GlobalOptions& global) {
  StudyConfig config;
  if (!global.config_path.empty())
    config = study_config_from_json(global.config_text());
  if (global.seed_given) config.seed = global.seed;
  if (global.out_dir != ".") config.out_dir = global.out_dir;
  const StudyReport report = run_study(config);
  const Manifest manifest = emit_outputs(report, config.out_dir);
  std::printf("analysis rows %lld (dropped %lld of %lld for zero scores)\n",
              static_cast<long long>(report.n_analysis),
              static_cast<long long>(report.n_excluded),
              static_cast<long long>(report.n_input));
  for (const ModelReport& mr : report.models)
    std::printf("%-10s rows %zu, B %d, depth %d, shrinkage %s, test auc %s\n",
                mr.name.c_str(), mr.population.size(), mr.chosen.n_trees,
                mr.chosen.max_depth,
                format_double(mr.chosen.shrinkage).c_str(),
                format_double(mr.roc.auc).c_str());
  std::printf("%zu files in %s (manifest.json lists hashes)\n",
              manifest.entries.size(), config.out_dir.c_str());
  return 0;
}

int run_inspect(const std::string& model_path) {
  const GbmModel model = load_model_file(model_path);
  std::printf("loss           %s\n", model.loss.kind == LossKind::bernoulli
                                         ? "bernoulli"
                                         : "squared_error");
  std::printf("trees          %zu\n", model.trees.size());
  std::printf("shrinkage      %s\n", format_double(model.shrinkage).c_str());
  std::printf("initial score  %s\n", format_double(model.f0).c_str());
  std::printf("schema         %s\n", hex64(model.schema_fingerprint).c_str());
  std::size_t nodes = 0;
  int depth_max = 0;
  for (const RegressionTree& tree : model.trees) {
    nodes += tree.nodes().size();
    depth_max = std::max(depth_max, tree.depth());
  }
  std::printf("nodes          %zu (max depth %d)\n", nodes, depth_max);
  if (!model.train_trace.empty())
    std::printf("train deviance %s -> %s\n",
                format_double(model.train_trace.front()).c_str(),
                format_double(model.train_trace.back()).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradient boosting toolkit for the enrollment study"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "JSON config file")
      ->expected(1);
  auto* seed_opt =
      app.add_option("--seed", global.seed, "override the config seed");
  app.add_option("--out-dir", global.out_dir, "output directory");
  app.add_option("--threads", global.threads, "worker threads (0 = default)");
  app.add_flag("--strict", global.strict,
               "fail on unseen categorical levels instead of routing right");
  app.fallthrough();

  auto* synth_cmd =
      app.add_subcommand("synth", "generate a cohort with known truth");
  auto* train_cmd = app.add_subcommand("train", "fit a model per --config");
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "score a model and write its ROC");
  auto* influence_cmd =
      app.add_subcommand("influence", "relative influence of a model");
  auto* ale_cmd =
      app.add_subcommand("ale", "accumulated local effects of one feature");
  auto* pdp_cmd =
      app.add_subcommand("pdp", "faceted partial dependence surface");
  auto* study_cmd =
      app.add_subcommand("study", "full two-model pipeline with artifacts");
  auto* inspect_cmd =
      app.add_subcommand("inspect", "summarize a model artifact");

  std::string model_path, data_path, target = "enrolled";
  std::string ale_feature = "math_score";
  int ale_intervals = 40;
  std::vector<std::string> pdp_pair = {"italian_score", "math_score"};
  std::vector<std::string> pdp_facets;
  std::vector<int> pdp_grid = {20, 20};
  bool pdp_no_hull = false, pdp_raw = false;

  for (CLI::App* cmd :
       {evaluate_cmd, influence_cmd, ale_cmd, pdp_cmd, inspect_cmd})
    cmd->add_option("--model", model_path, "model artifact path");
  for (CLI::App* cmd : {evaluate_cmd, ale_cmd, pdp_cmd})
    cmd->add_option("--data", data_path, "cohort CSV path");
  evaluate_cmd->add_option("--target", target, "target column");
  ale_cmd->add_option("--feature", ale_feature, "numeric feature");
  ale_cmd->add_option("--intervals", ale_intervals, "quantile intervals");
  pdp_cmd->add_option("--pair", pdp_pair, "two numeric features")
      ->expected(2);
  pdp_cmd->add_option("--facet", pdp_facets, "categorical facet (repeat)");
  pdp_cmd->add_option("--grid", pdp_grid, "grid sizes, a b")->expected(2);
  pdp_cmd->add_flag("--no-hull", pdp_no_hull, "skip convex hull masking");
  pdp_cmd->add_flag("--raw", pdp_raw, "raw score scale instead of "
                                      "probability");

  try {
    app.parse(argc, argv);
    global.seed_given = seed_opt->count() > 0;
    if (global.threads > 0) set_threads(global.threads);

    if (synth_cmd->parsed()) return run_synth(global);
    if (train_cmd->parsed()) return run_train(global);
    if (evaluate_cmd->parsed())
      return run_evaluate(global, model_path, data_path, target);
    if (influence_cmd->parsed()) return run_influence(global, model_path);
    if (ale_cmd->parsed())
      return run_ale(global, model_path, data_path, ale_feature,
                     ale_intervals);
    if (pdp_cmd->parsed())
      return run_pdp(global, model_path, data_path, pdp_pair, pdp_facets,
                     pdp_grid, pdp_no_hull, pdp_raw);
    if (study_cmd->parsed()) return run_study_command(global);
    if (inspect_cmd->parsed()) return run_inspect(model_path);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const stemboost::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  }
}
