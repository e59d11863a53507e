#include "stemboost/boosting.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace stemboost {

namespace {

using nlohmann::json;

void validate_params(const HyperParams& hp) {
  if (hp.n_trees < 1) fail(Errc::invalid_config, "gbm: n_trees must be >= 1");
  if (!(hp.shrinkage > 0.0) || hp.shrinkage > 1.0)
    fail(Errc::invalid_config, "gbm: shrinkage must be in (0, 1]");
  if (!(hp.bag_fraction > 0.0) || hp.bag_fraction > 1.0)
    fail(Errc::invalid_config, "gbm: bag_fraction must be in (0, 1]");
}

void check_schema(const GbmModel& model, const Cohort& rows,
                  const char* where) {
  if (rows.schema().fingerprint() != model.schema_fingerprint)
    fail(Errc::schema_mismatch,
         std::string(where) + ": cohort schema does not match the model");
}

// adds shrinkage * tree(x) to every score, chunked over rows
void apply_tree(const RegressionTree& tree, const Cohort& rows,
                double shrinkage, std::vector<double>& scores) {
  parallel_chunks(rows.n_rows(), kRowChunk,
                  [&](std::int64_t, std::int64_t begin, std::int64_t end) {
                    std::uint64_t unseen = 0;
                    for (std::int64_t i = begin; i < end; ++i)
                      scores[static_cast<std::size_t>(i)] +=
                          shrinkage *
                          tree.predict_cohort_row(rows, i, false, unseen);
                  });
}

std::uint64_t parse_hex64(const std::string& text, const std::string& origin) {
  std::uint64_t v = 0;
  const auto res =
      std::from_chars(text.data(), text.data() + text.size(), v, 16);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    fail(Errc::io_failure, origin + ": malformed hex field '" + text + "'");
  return v;
}

}  // namespace

double initial_score(const std::vector<double>& targets, LossSpec loss) {
  if (targets.empty())
    fail(Errc::insufficient_rows, "initial_score: empty target array");
  double mean = 0.0;
  for (double v : targets) mean += v;
  mean /= static_cast<double>(targets.size());
  if (loss.kind == LossKind::squared_error) return mean;
  const double p = clamp_prob(mean);
  return std::log(p / (1.0 - p));
}

std::vector<double> negative_gradient(LossSpec loss,
                                      const std::vector<double>& y,
                                      const std::vector<double>& f) {
  if (y.size() != f.size())
    fail(Errc::invalid_config, "negative_gradient: length mismatch");
  std::vector<double> r(y.size());
  if (loss.kind == LossKind::bernoulli) {
    for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] - sigmoid(f[i]);
  } else {
    for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] - f[i];
  }
  return r;
}

double mean_deviance(LossSpec loss, const std::vector<double>& y,
                     const std::vector<double>& f) {
  if (y.size() != f.size())
    fail(Errc::invalid_config, "mean_deviance: length mismatch");
  if (y.empty()) fail(Errc::insufficient_rows, "mean_deviance: empty arrays");
  double acc = 0.0;
  if (loss.kind == LossKind::bernoulli) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double p = clamp_prob(sigmoid(f[i]));
      acc += y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
    }
    return -2.0 * acc / static_cast<double>(y.size());
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - f[i];
    acc += d * d;
  }
  return acc / static_cast<double>(y.size());
}

std::vector<double> target_as_real(const Cohort& cohort,
                                   const std::string& target) {
  const int t = cohort.schema().target_index(target);
  if (t < 0)
    fail(Errc::missing_column, "target_as_real: no target '" + target + "'");
  const auto& col = cohort.target(t);
  std::vector<double> y(col.size());
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (col[i] == kTargetNA)
      fail(Errc::invalid_target, "target '" + target + "' has NA at row " +
                                     std::to_string(i + 1));
    y[i] = static_cast<double>(col[i]);
  }
  return y;
}

GbmModel fit_gbm(const Cohort& train, const std::string& target,
                 const HyperParams& params, LossSpec loss) {
  return fit_gbm(train, target_as_real(train, target), params, loss);
}

GbmModel fit_gbm(const Cohort& train, const std::vector<double>& y,
                 const HyperParams& params, LossSpec loss) {
  validate_params(params);
  const std::int64_t n = train.n_rows();
  if (y.size() != static_cast<std::size_t>(n))
    fail(Errc::invalid_config, "fit_gbm: target length mismatch");
  if (n < 2 * static_cast<std::int64_t>(params.min_node))
    fail(Errc::too_few_rows, "fit_gbm: need at least 2*min_node rows");
  if (loss.kind == LossKind::bernoulli) {
    for (double v : y)
      if (v != 0.0 && v != 1.0)
        fail(Errc::invalid_target, "fit_gbm: bernoulli targets must be 0/1");
  } else {
    for (double v : y)
      if (!std::isfinite(v))
        fail(Errc::invalid_target, "fit_gbm: non-finite target");
  }

  GbmModel model;
  model.f0 = initial_score(y, loss);
  model.shrinkage = params.shrinkage;
  model.loss = loss;
  model.schema_fingerprint = train.schema().fingerprint();
  model.trees.reserve(static_cast<std::size_t>(params.n_trees));
  model.train_trace.reserve(static_cast<std::size_t>(params.n_trees));

  const TreeFitWorkspace ws(train);
  TreeFitParams tp;
  tp.max_depth = params.max_depth;
  tp.min_node = params.min_node;

  std::vector<double> scores(static_cast<std::size_t>(n), model.f0);
  std::vector<double> residual(static_cast<std::size_t>(n));
  std::vector<double> hessian(static_cast<std::size_t>(n));
  auto n_bag = static_cast<std::int64_t>(
      std::ceil(params.bag_fraction * static_cast<double>(n)));
  n_bag = std::min(n_bag, n);

  std::vector<std::uint32_t> all_rows;
  if (n_bag == n) {
    all_rows.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
      all_rows[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(i);
  }

  for (int b = 0; b < params.n_trees; ++b) {
    parallel_chunks(n, kRowChunk,
                    [&](std::int64_t, std::int64_t begin, std::int64_t end) {
                      for (std::int64_t i = begin; i < end; ++i) {
                        const auto s = static_cast<std::size_t>(i);
                        if (loss.kind == LossKind::bernoulli) {
                          const double p = sigmoid(scores[s]);
                          residual[s] = y[s] - p;
                          hessian[s] = p * (1.0 - p);
                        } else {
                          residual[s] = y[s] - scores[s];
                          hessian[s] = 1.0;
                        }
                      }
                    });
    std::vector<std::uint32_t> bag;
    if (n_bag == n) {
      bag = all_rows;
    } else {
      Rng rng(derive_seed(params.seed, SeedStream::bagging,
                          static_cast<std::uint64_t>(b)));
      bag = rng.sample_without_replacement(static_cast<std::uint32_t>(n),
                                           static_cast<std::uint32_t>(n_bag));
    }
    model.trees.push_back(fit_regression_tree(ws, bag, residual, hessian, tp));
    apply_tree(model.trees.back(), train, params.shrinkage, scores);
    model.train_trace.push_back(mean_deviance(loss, y, scores));
  }
  return model;
}

std::vector<double> predict(const GbmModel& model, const Cohort& rows,
                            int n_trees, Output output, bool strict,
                            std::uint64_t* unseen_levels) {
  check_schema(model, rows, "predict");
  const int total = static_cast<int>(model.trees.size());
  const int use = n_trees < 0 ? total : n_trees;
  if (use > total)
    fail(Errc::invalid_config, "predict: n_trees exceeds the ensemble size");
  const std::int64_t n = rows.n_rows();
  std::vector<double> out(static_cast<std::size_t>(n));
  const std::int64_t n_chunks = (n + kRowChunk - 1) / kRowChunk;
  std::vector<std::uint64_t> unseen(
      static_cast<std::size_t>(std::max<std::int64_t>(n_chunks, 1)), 0);
  parallel_chunks(
      n, kRowChunk, [&](std::int64_t c, std::int64_t begin, std::int64_t end) {
        std::uint64_t local = 0;
        for (std::int64_t i = begin; i < end; ++i) {
          double acc = model.f0;
          for (int t = 0; t < use; ++t)
            acc += model.shrinkage *
                   model.trees[static_cast<std::size_t>(t)].predict_cohort_row(
                       rows, i, strict, local);
          out[static_cast<std::size_t>(i)] =
              output == Output::probability ? sigmoid(acc) : acc;
        }
        unseen[static_cast<std::size_t>(c)] = local;
      });
  if (unseen_levels) {
    std::uint64_t total_unseen = 0;
    for (std::uint64_t u : unseen) total_unseen += u;
    *unseen_levels = total_unseen;
  }
  return out;
}

std::vector<double> staged_mean_deviance(const GbmModel& model,
                                         const Cohort& rows,
                                         const std::vector<double>& y) {
  check_schema(model, rows, "staged_mean_deviance");
  if (y.size() != static_cast<std::size_t>(rows.n_rows()))
    fail(Errc::invalid_config, "staged_mean_deviance: target length mismatch");
  std::vector<double> scores(y.size(), model.f0);
  std::vector<double> trace;
  trace.reserve(model.trees.size());
  for (const RegressionTree& tree : model.trees) {
    apply_tree(tree, rows, model.shrinkage, scores);
    trace.push_back(mean_deviance(model.loss, y, scores));
  }
  return trace;
}

std::string model_to_json(const GbmModel& model) {
  json j;
  j["format"] = "stemboost-model";
  j["version"] = 1;
  j["loss"] = model.loss.kind == LossKind::bernoulli ? "bernoulli"
                                                     : "squared_error";
  j["shrinkage"] = model.shrinkage;
  j["f0"] = model.f0;
  j["schema_fingerprint"] = hex64(model.schema_fingerprint);
  j["train_trace"] = model.train_trace;
  json trees = json::array();
  for (const RegressionTree& tree : model.trees) {
    json nodes = json::array();
    for (const TreeNode& nd : tree.nodes()) {
      json jn;
      jn["value"] = nd.value;
      if (nd.feature >= 0) {
        jn["feature"] = nd.feature;
        jn["left"] = nd.left;
        jn["right"] = nd.right;
        jn["improvement"] = nd.improvement;
        if (nd.categorical) {
          jn["left_levels"] = hex64(nd.left_mask);
          jn["seen_levels"] = hex64(nd.seen_mask);
        } else {
          jn["threshold"] = nd.threshold;
        }
      }
      nodes.push_back(std::move(jn));
    }
    trees.push_back(json{{"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees);
  return j.dump() + "\n";
}

GbmModel model_from_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::io_failure, origin + ": not valid JSON (" + e.what() + ")");
  }
  try {
    if (j.at("format").get<std::string>() != "stemboost-model" ||
        j.at("version").get<int>() != 1)
      fail(Errc::io_failure, origin + ": not a stemboost-model v1 artifact");
    GbmModel model;
    const auto loss = j.at("loss").get<std::string>();
    if (loss == "bernoulli") {
      model.loss.kind = LossKind::bernoulli;
    } else if (loss == "squared_error") {
      model.loss.kind = LossKind::squared_error;
    } else {
      fail(Errc::io_failure, origin + ": unknown loss '" + loss + "'");
    }
    model.shrinkage = j.at("shrinkage").get<double>();
    model.f0 = j.at("f0").get<double>();
    model.schema_fingerprint =
        parse_hex64(j.at("schema_fingerprint").get<std::string>(), origin);
    model.train_trace = j.at("train_trace").get<std::vector<double>>();
    for (const json& jt : j.at("trees")) {
      std::vector<TreeNode> nodes;
      for (const json& jn : jt.at("nodes")) {
        TreeNode nd;
        nd.value = jn.at("value").get<double>();
        if (jn.contains("feature")) {
          nd.feature = jn.at("feature").get<int>();
          nd.left = jn.at("left").get<int>();
          nd.right = jn.at("right").get<int>();
          nd.improvement = jn.at("improvement").get<double>();
          if (jn.contains("left_levels")) {
            nd.categorical = true;
            nd.left_mask =
                parse_hex64(jn.at("left_levels").get<std::string>(), origin);
            nd.seen_mask =
                parse_hex64(jn.at("seen_levels").get<std::string>(), origin);
          } else {
            nd.threshold = jn.at("threshold").get<double>();
          }
        }
        nodes.push_back(nd);
      }
      model.trees.emplace_back(std::move(nodes));
    }
    if (model.train_trace.size() != model.trees.size())
      fail(Errc::io_failure, origin + ": trace/tree count mismatch");
    return model;
  } catch (const json::exception& e) {
    fail(Errc::io_failure, origin + ": malformed model artifact (" +
                               std::string(e.what()) + ")");
  }
}

void save_model(const GbmModel& model, const std::string& path) {
  write_text_file(path, model_to_json(model));
}

GbmModel load_model(const std::string& path) {
  return model_from_json(read_text_file(path), path);
}

}  // namespace stemboost
