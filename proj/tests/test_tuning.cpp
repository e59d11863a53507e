#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "stemboost/tuning.hpp"

using namespace stemboost;
using testutil::random_cohort;

namespace {

std::vector<std::int64_t> fold_sizes(const std::vector<std::int32_t>& fold,
                                     int k) {
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(k), 0);
  for (auto f : fold) {
    REQUIRE(f >= 0);
    REQUIRE(f < k);
    ++sizes[static_cast<std::size_t>(f)];
  }
  return sizes;
}

void check_balanced(const std::vector<std::int64_t>& sizes) {
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  CHECK(*hi - *lo <= 1);
}

}  // namespace

TEST_CASE("folds: round robin balance") {
  const auto fold = assign_folds(23, 5, 7);
  REQUIRE(fold.size() == 23);
  check_balanced(fold_sizes(fold, 5));

  CHECK(assign_folds(23, 5, 7) == fold);
  CHECK(assign_folds(23, 5, 8) != fold);

  CHECK_THROWS_AS(assign_folds(10, 1, 0), Error);
  try {
    assign_folds(10, 11, 0);
    FAIL("k > n accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::k_too_large);
  }
}

TEST_CASE("folds: stratified balance holds globally and per class") {
  std::vector<std::int8_t> strata(23, 0);
  for (std::size_t i = 0; i < 6; ++i) strata[i * 3] = 1;  // 6 of 23 positive

  const auto fold = assign_folds(23, 5, 11, &strata);
  check_balanced(fold_sizes(fold, 5));

  for (std::int8_t cls : {0, 1}) {
    std::vector<std::int64_t> sizes(5, 0);
    for (std::size_t i = 0; i < strata.size(); ++i)
      if (strata[i] == cls) ++sizes[static_cast<std::size_t>(fold[i])];
    check_balanced(sizes);
  }

  std::vector<std::int8_t> wrong(10, 0);
  CHECK_THROWS_AS(assign_folds(23, 5, 11, &wrong), Error);
}

TEST_CASE("cv: grid search wiring and reproducibility") {
  Rng rng(21);
  const Cohort data = random_cohort(rng, 60, 2, {3});
  HyperGrid grid;
  grid.shrinkage = {0.1, 0.3};
  grid.max_depth = {2};
  grid.n_trees = 15;
  grid.bag_fraction = {1.0};
  grid.min_node = {5};
  const int k = 3;
  const std::uint64_t seed = 17;

  const auto result = cross_validate(data, "y", grid, k, seed);
  REQUIRE(result.configs.size() == 2);
  for (const auto& trace : result.configs) {
    CHECK(trace.failure.empty());
    CHECK(trace.mean_valid_deviance.size() == 15);
  }

  // folds are stratified by the target
  const auto& y = data.target(0);
  for (std::int8_t cls : {0, 1}) {
    std::vector<std::int64_t> sizes(k, 0);
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == cls)
        ++sizes[static_cast<std::size_t>(result.fold_assignment[i])];
    check_balanced(sizes);
  }

  // the winner is the global minimum, at its first attaining iteration
  double min_dev = std::numeric_limits<double>::infinity();
  for (const auto& trace : result.configs)
    for (double d : trace.mean_valid_deviance) min_dev = std::min(min_dev, d);
  CHECK(result.best_deviance == min_dev);
  const auto& best_trace =
      result.configs[static_cast<std::size_t>(result.best_config)]
          .mean_valid_deviance;
  CHECK(best_trace[static_cast<std::size_t>(result.best_iteration - 1)] ==
        min_dev);
  for (int b = 0; b < result.best_iteration - 1; ++b)
    CHECK(best_trace[static_cast<std::size_t>(b)] > min_dev);

  const auto hp = result.best_params();
  CHECK(hp.n_trees == result.best_iteration);
  CHECK(hp.shrinkage ==
        result.configs[static_cast<std::size_t>(result.best_config)]
            .params.shrinkage);
  CHECK(hp.seed == 0);

  const auto again = cross_validate(data, "y", grid, k, seed);
  CHECK(again.best_config == result.best_config);
  CHECK(again.best_iteration == result.best_iteration);
  CHECK(again.best_deviance == result.best_deviance);
  CHECK(again.fold_assignment == result.fold_assignment);

  const auto other = cross_validate(data, "y", grid, k, seed + 1);
  CHECK(other.fold_assignment != result.fold_assignment);
}

TEST_CASE("cv: per-config trace is the mean of per-fold staged deviance") {
  Rng rng(31);
  const Cohort data = random_cohort(rng, 60, 1, {3});
  HyperGrid grid;
  grid.shrinkage = {0.2};
  grid.max_depth = {2};
  grid.n_trees = 10;
  grid.bag_fraction = {1.0};
  grid.min_node = {4};
  const int k = 3;
  const std::uint64_t seed = 5;

  const auto result = cross_validate(data, "y", grid, k, seed);
  REQUIRE(result.configs.size() == 1);

  std::vector<double> sum(10, 0.0);
  for (int f = 0; f < k; ++f) {
    std::vector<std::uint32_t> tr, va;
    for (std::size_t i = 0; i < result.fold_assignment.size(); ++i)
      (result.fold_assignment[i] == f ? va : tr)
          .push_back(static_cast<std::uint32_t>(i));
    HyperParams hp;
    hp.n_trees = 10;
    hp.shrinkage = 0.2;
    hp.max_depth = 2;
    hp.bag_fraction = 1.0;
    hp.min_node = 4;
    hp.seed = derive_seed(seed, SeedStream::cv_fit,
                          static_cast<std::uint64_t>(f));
    const Cohort train_view = data.select(tr);
    const Cohort valid_view = data.select(va);
    const auto model =
        fit_gbm(train_view, "y", hp, LossSpec{LossKind::bernoulli});
    const auto staged = staged_mean_deviance(model, valid_view,
                                             target_as_real(valid_view, "y"));
    for (std::size_t b = 0; b < staged.size(); ++b) sum[b] += staged[b];
  }
  for (std::size_t b = 0; b < 10; ++b)
    CHECK(result.configs[0].mean_valid_deviance[b] ==
          sum[b] / static_cast<double>(k));
}

TEST_CASE("cv: failing configs are recorded and skipped") {
  Rng rng(41);
  const Cohort data = random_cohort(rng, 60, 1, {3});
  HyperGrid grid;
  grid.shrinkage = {0.1};
  grid.max_depth = {2};
  grid.n_trees = 8;
  grid.bag_fraction = {1.0};
  grid.min_node = {5, 40};  // 40 needs 80 training rows per fold, folds have 40

  const auto result = cross_validate(data, "y", grid, 3, 9);
  REQUIRE(result.configs.size() == 2);
  CHECK(result.configs[0].failure.empty());
  CHECK_FALSE(result.configs[1].failure.empty());
  CHECK(result.configs[1].mean_valid_deviance.empty());
  CHECK(result.best_config == 0);

  const auto json_text = cv_best_to_json(result);
  CHECK(json_text.find("failed_configs") != std::string::npos);
  CHECK(json_text.find("config_id") != std::string::npos);

  grid.min_node = {40};
  CHECK_THROWS_AS(cross_validate(data, "y", grid, 3, 9), Error);
}

TEST_CASE("cv: duplicate configs tie toward the first") {
  Rng rng(51);
  const Cohort data = random_cohort(rng, 40, 1);
  HyperGrid grid;
  grid.shrinkage = {0.1, 0.1};  // identical twins; bag 1.0 makes fits equal
  grid.max_depth = {2};
  grid.n_trees = 6;
  grid.bag_fraction = {1.0};
  grid.min_node = {4};

  const auto result = cross_validate(data, "y", grid, 2, 3);
  REQUIRE(result.configs.size() == 2);
  for (std::size_t b = 0; b < 6; ++b)
    CHECK(result.configs[0].mean_valid_deviance[b] ==
          result.configs[1].mean_valid_deviance[b]);
  CHECK(result.best_config == 0);
}

TEST_CASE("cv: trace csv shape") {
  Rng rng(61);
  const Cohort data = random_cohort(rng, 30, 1);
  HyperGrid grid;
  grid.shrinkage = {0.1};
  grid.max_depth = {2};
  grid.n_trees = 4;
  grid.bag_fraction = {1.0};
  grid.min_node = {3};

  const auto result = cross_validate(data, "y", grid, 2, 1);
  const auto csv = cv_trace_to_csv(result);
  CHECK(csv.rfind("config_id,iteration,mean_valid_deviance\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv.find("0,1,") != std::string::npos);
  CHECK(csv.find("0,4,") != std::string::npos);
}

TEST_CASE("cv: argument validation") {
  Rng rng(71);
  const Cohort data = random_cohort(rng, 10, 1);
  HyperGrid grid;
  grid.n_trees = 2;
  grid.min_node = {1};

  CHECK_THROWS_AS(cross_validate(data, "nope", grid, 2, 0), Error);
  try {
    cross_validate(data, "y", grid, 11, 0);
    FAIL("k > n accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::k_too_large);
  }

  HyperGrid bad = grid;
  bad.shrinkage = {};
  CHECK_THROWS_AS(cross_validate(data, "y", bad, 2, 0), Error);
  bad = grid;
  bad.n_trees = 0;
  CHECK_THROWS_AS(cross_validate(data, "y", bad, 2, 0), Error);
  bad = grid;
  bad.max_depth = {0};
  CHECK_THROWS_AS(cross_validate(data, "y", bad, 2, 0), Error);
  bad = grid;
  bad.bag_fraction = {1.5};
  CHECK_THROWS_AS(cross_validate(data, "y", bad, 2, 0), Error);
}
