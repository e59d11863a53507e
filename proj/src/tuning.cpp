#include "stemboost/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace stemboost {

namespace {

void validate_grid(const HyperGrid& grid) {
  if (grid.shrinkage.empty() || grid.max_depth.empty() ||
      grid.bag_fraction.empty() || grid.min_node.empty())
    fail(Errc::invalid_config, "cv: every grid dimension needs >= 1 value");
  if (grid.n_trees < 1)
    fail(Errc::invalid_config, "cv: n_trees must be >= 1");
  for (double s : grid.shrinkage)
    if (!(s > 0.0) || s > 1.0)
      fail(Errc::invalid_config, "cv: shrinkage values must be in (0, 1]");
  for (double b : grid.bag_fraction)
    if (!(b > 0.0) || b > 1.0)
      fail(Errc::invalid_config, "cv: bag_fraction values must be in (0, 1]");
  for (int d : grid.max_depth)
    if (d < 1 || d > 8)
      fail(Errc::invalid_config, "cv: max_depth values must be in [1, 8]");
  for (int m : grid.min_node)
    if (m < 1) fail(Errc::invalid_config, "cv: min_node values must be >= 1");
}

std::vector<HyperParams> enumerate_grid(const HyperGrid& grid) {
  std::vector<HyperParams> configs;
  for (double s : grid.shrinkage)
    for (int d : grid.max_depth)
      for (double b : grid.bag_fraction)
        for (int m : grid.min_node) {
          HyperParams hp;
          hp.n_trees = grid.n_trees;
          hp.shrinkage = s;
          hp.max_depth = d;
          hp.bag_fraction = b;
          hp.min_node = m;
          configs.push_back(hp);
        }
  return configs;
}

// selection order: deviance, trees, shrinkage, depth, bag_fraction, min_node
bool better(double dev_a, int iter_a, const HyperParams& a, double dev_b,
            int iter_b, const HyperParams& b) {
  if (dev_a != dev_b) return dev_a < dev_b;
  if (iter_a != iter_b) return iter_a < iter_b;
  if (a.shrinkage != b.shrinkage) return a.shrinkage < b.shrinkage;
  if (a.max_depth != b.max_depth) return a.max_depth < b.max_depth;
  if (a.bag_fraction != b.bag_fraction) return a.bag_fraction < b.bag_fraction;
  return a.min_node < b.min_node;
}

}  // namespace

HyperParams CvResult::best_params() const {
  if (best_config < 0)
    fail(Errc::invalid_config, "cv: no config finished successfully");
  HyperParams hp = configs[static_cast<std::size_t>(best_config)].params;
  hp.n_trees = best_iteration;
  return hp;
}

std::vector<std::int32_t> assign_folds(std::int64_t n, int k,
                                       std::uint64_t seed,
                                       const std::vector<std::int8_t>* strata) {
  if (k < 2) fail(Errc::invalid_config, "assign_folds: k must be >= 2");
  if (static_cast<std::int64_t>(k) > n)
    fail(Errc::k_too_large, "assign_folds: k exceeds the row count");
  if (strata && strata->size() != static_cast<std::size_t>(n))
    fail(Errc::invalid_config, "assign_folds: strata length mismatch");

  Rng rng(seed);
  const auto perm = rng.permutation(static_cast<std::uint32_t>(n));
  std::vector<std::int32_t> fold(static_cast<std::size_t>(n), -1);
  if (!strata) {
    for (std::size_t i = 0; i < perm.size(); ++i)
      fold[perm[i]] = static_cast<std::int32_t>(i % static_cast<std::size_t>(k));
    return fold;
  }

  std::vector<std::int8_t> classes(strata->begin(), strata->end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::size_t cursor = 0;
  for (std::int8_t cls : classes)
    for (std::uint32_t row : perm) {
      if ((*strata)[row] != cls) continue;
      fold[row] = static_cast<std::int32_t>(cursor % static_cast<std::size_t>(k));
      ++cursor;
    }
  return fold;
}

CvResult cross_validate(const Cohort& train, const std::string& target,
                        const HyperGrid& grid, int k, std::uint64_t seed) {
  validate_grid(grid);
  const std::int64_t n = train.n_rows();
  const int t_idx = train.schema().target_index(target);
  if (t_idx < 0)
    fail(Errc::missing_column, "cv: no target '" + target + "'");
  const std::vector<std::int8_t>& strata = train.target(t_idx);

  CvResult result;
  result.fold_assignment =
      assign_folds(n, k, derive_seed(seed, SeedStream::folds), &strata);

  std::vector<std::vector<std::uint32_t>> fold_train(
      static_cast<std::size_t>(k)),
      fold_valid(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < n; ++i) {
    const auto f =
        static_cast<std::size_t>(result.fold_assignment[static_cast<std::size_t>(i)]);
    for (std::size_t g = 0; g < static_cast<std::size_t>(k); ++g)
      (g == f ? fold_valid[g] : fold_train[g])
          .push_back(static_cast<std::uint32_t>(i));
  }
  std::vector<Cohort> train_views, valid_views;
  std::vector<std::vector<double>> valid_targets;
  train_views.reserve(static_cast<std::size_t>(k));
  valid_views.reserve(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    train_views.push_back(train.select(fold_train[static_cast<std::size_t>(f)]));
    valid_views.push_back(train.select(fold_valid[static_cast<std::size_t>(f)]));
    valid_targets.push_back(target_as_real(valid_views.back(), target));
  }

  const auto configs = enumerate_grid(grid);
  result.best_deviance = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < configs.size(); ++c) {
    CvConfigTrace trace;
    trace.params = configs[c];
    std::vector<double> sum(static_cast<std::size_t>(grid.n_trees), 0.0);
    try {
      for (int f = 0; f < k; ++f) {
        HyperParams hp = configs[c];
        hp.seed = derive_seed(seed, SeedStream::cv_fit,
                              c * static_cast<std::size_t>(k) +
                                  static_cast<std::size_t>(f));
        const GbmModel model =
            fit_gbm(train_views[static_cast<std::size_t>(f)], target, hp,
                    LossSpec{LossKind::bernoulli});
        const auto staged = staged_mean_deviance(
            model, valid_views[static_cast<std::size_t>(f)],
            valid_targets[static_cast<std::size_t>(f)]);
        for (std::size_t b = 0; b < staged.size(); ++b) sum[b] += staged[b];
      }
      trace.mean_valid_deviance.resize(sum.size());
      for (std::size_t b = 0; b < sum.size(); ++b)
        trace.mean_valid_deviance[b] = sum[b] / static_cast<double>(k);
    } catch (const Error& e) {
      trace.mean_valid_deviance.clear();
      trace.failure = e.what();
    }
    result.configs.push_back(std::move(trace));
  }

  for (std::size_t c = 0; c < result.configs.size(); ++c) {
    const CvConfigTrace& trace = result.configs[c];
    for (std::size_t b = 0; b < trace.mean_valid_deviance.size(); ++b) {
      const double dev = trace.mean_valid_deviance[b];
      const int iter = static_cast<int>(b) + 1;
      if (result.best_config < 0 ||
          better(dev, iter, trace.params, result.best_deviance,
                 result.best_iteration,
                 result.configs[static_cast<std::size_t>(result.best_config)]
                     .params)) {
        result.best_config = static_cast<int>(c);
        result.best_iteration = iter;
        result.best_deviance = dev;
      }
    }
  }
  if (result.best_config < 0)
    fail(Errc::insufficient_rows,
         "cv: every config failed; first diagnostic: " +
             (result.configs.empty() ? std::string("empty grid")
                                     : result.configs.front().failure));
  return result;
}

std::string cv_trace_to_csv(const CvResult& result) {
  std::string out = "config_id,iteration,mean_valid_deviance\n";
  for (std::size_t c = 0; c < result.configs.size(); ++c) {
    const auto& trace = result.configs[c].mean_valid_deviance;
    for (std::size_t b = 0; b < trace.size(); ++b) {
      out += std::to_string(c);
      out += ',';
      out += std::to_string(b + 1);
      out += ',';
      out += format_double(trace[b]);
      out += '\n';
    }
  }
  return out;
}

std::string cv_best_to_json(const CvResult& result) {
  nlohmann::json j;
  j["best_config_id"] = result.best_config;
  j["best_iteration"] = result.best_iteration;
  j["best_mean_valid_deviance"] = result.best_deviance;
  const HyperParams hp = result.best_params();
  j["params"] = {{"shrinkage", hp.shrinkage},
                 {"max_depth", hp.max_depth},
                 {"min_node", hp.min_node},
                 {"bag_fraction", hp.bag_fraction},
                 {"n_trees", hp.n_trees}};
  nlohmann::json failures = nlohmann::json::array();
  for (std::size_t c = 0; c < result.configs.size(); ++c)
    if (!result.configs[c].failure.empty())
      failures.push_back(
          {{"config_id", c}, {"error", result.configs[c].failure}});
  j["failed_configs"] = std::move(failures);
  return j.dump(2) + "\n";
}

}  // namespace stemboost
