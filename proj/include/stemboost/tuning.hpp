#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stemboost/boosting.hpp"

namespace stemboost {

struct HyperGrid {
  std::vector<double> shrinkage = {0.01, 0.1};
  std::vector<int> max_depth = {2, 3, 4};
  int n_trees = 2000;  // single maximum B; the best iteration is chosen inside
  std::vector<double> bag_fraction = {0.5, 1.0};
  std::vector<int> min_node = {10};
};

struct CvConfigTrace {
  HyperParams params;  // per-fit seeds are derived, the seed field here is 0
  std::vector<double> mean_valid_deviance;  // iterations 1..B; empty on failure
  std::string failure;  // diagnostic when a fold aborted this config
};

struct CvResult {
  std::vector<CvConfigTrace> configs;
  std::vector<std::int32_t> fold_assignment;  // row -> fold id
  int best_config = -1;
  int best_iteration = 0;  // tree count, 1-based
  double best_deviance = 0.0;

  // chosen config with n_trees cut to best_iteration; seed left 0
  HyperParams best_params() const;
};

// Round-robin over a seeded permutation; with strata, one cursor continues
// across the classes so fold sizes stay within 1 both globally and per class.
std::vector<std::int32_t> assign_folds(
    std::int64_t n, int k, std::uint64_t seed,
    const std::vector<std::int8_t>* strata = nullptr);

// Grid search with staged validation deviance, folds stratified by the
// target. Ties break toward fewer trees, then lower shrinkage, then lower
// depth (then bag_fraction, min_node), so the result does not depend on grid
// enumeration order.
CvResult cross_validate(const Cohort& train, const std::string& target,
                        const HyperGrid& grid, int k, std::uint64_t seed);

std::string cv_trace_to_csv(const CvResult& result);
std::string cv_best_to_json(const CvResult& result);

}  // namespace stemboost
