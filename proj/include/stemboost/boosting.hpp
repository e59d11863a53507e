#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stemboost/tree.hpp"

namespace stemboost {

enum class LossKind { bernoulli, squared_error };

struct LossSpec {
  LossKind kind = LossKind::bernoulli;
};

struct HyperParams {
  int n_trees = 100;
  double shrinkage = 0.1;
  int max_depth = 3;
  int min_node = 10;
  double bag_fraction = 1.0;  // per-iteration row subsample, no replacement
  std::uint64_t seed = 0;
};

// Additive ensemble: raw score of a row after b trees is
// f0 + shrinkage * sum of the first b tree outputs.
struct GbmModel {
  double f0 = 0.0;
  std::vector<RegressionTree> trees;
  double shrinkage = 0.1;
  LossSpec loss;
  std::uint64_t schema_fingerprint = 0;
  std::vector<double> train_trace;  // full-data mean deviance per iteration
};

enum class Output { raw, probability };

double initial_score(const std::vector<double>& targets, LossSpec loss);

std::vector<double> negative_gradient(LossSpec loss,
                                      const std::vector<double>& y,
                                      const std::vector<double>& f);

double mean_deviance(LossSpec loss, const std::vector<double>& y,
                     const std::vector<double>& f);

// Target column as reals; rejects NA cells.
std::vector<double> target_as_real(const Cohort& cohort,
                                   const std::string& target);

GbmModel fit_gbm(const Cohort& train, const std::string& target,
                 const HyperParams& params, LossSpec loss);

// Oracle-test form: arbitrary finite real targets (squared_error), or
// a {0,1}-valued array (bernoulli).
GbmModel fit_gbm(const Cohort& train, const std::vector<double>& y,
                 const HyperParams& params, LossSpec loss);

// n_trees = -1 uses the whole ensemble. Scores accumulate tree by tree, so
// staged predictions telescope exactly.
std::vector<double> predict(const GbmModel& model, const Cohort& rows,
                            int n_trees = -1,
                            Output output = Output::probability,
                            bool strict = false,
                            std::uint64_t* unseen_levels = nullptr);

// Mean deviance against y after each iteration 1..B; the staged evaluation
// behind cross-validation.
std::vector<double> staged_mean_deviance(const GbmModel& model,
                                         const Cohort& rows,
                                         const std::vector<double>& y);

// Versioned JSON artifact; reload reproduces predictions bit-exactly.
std::string model_to_json(const GbmModel& model);
GbmModel model_from_json(const std::string& text, const std::string& origin);
void save_model(const GbmModel& model, const std::string& path);
GbmModel load_model(const std::string& path);

}  // namespace stemboost
