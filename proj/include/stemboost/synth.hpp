#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stemboost/cohort.hpp"
#include "stemboost/common.hpp"

namespace stemboost {

// Generator settings for a synthetic cohort. Categorical marginals follow
// the study schema's level order; scores are bivariate normal around 200
// with curriculum-dependent shifts; outcomes come from two known logistic
// models so every generated label has an exact reference probability.
//
// The default coefficient vectors are synthetic: they are tuned so the
// qualitative orderings seen in the reference population hold (math lifts
// STEM entry, italian lifts enrollment, applied and scientific curricula
// dominate the humanistic track for STEM), not to match any real fit.
struct SynthConfig {
  std::int64_t n = 10000;
  std::uint64_t seed = 1;

  // per-level target proportions, study schema level order
  std::vector<double> gender = {0.4974, 0.5026};               // F, M
  std::vector<double> macroregion = {0.3660, 0.2101, 0.4239};  // N, C, SI
  std::vector<double> hs_type = {0.9252, 0.0748};              // Public, Private
  // the published rounded shares total 1.0001; the largest category absorbs
  // the rounding so the vector closes to 1
  std::vector<double> curriculum = {0.2043, 0.5856, 0.2101};   // H, TS, AS

  // score model: mean 200 plus a per-curriculum shift, shared sd, correlation
  double score_sd = 40.0;
  double score_rho = 0.5;
  std::vector<double> math_shift = {0.0, 10.0, 15.0};
  std::vector<double> italian_shift = {10.0, 0.0, 0.0};

  // ses is standard normal around a macroregion-dependent mean
  std::vector<double> ses_shift = {0.2, 0.05, -0.2};

  // logistic coefficients over design_encoding() order
  std::vector<double> beta_enroll = {1.1,  -0.15, -0.1, -0.25, -0.5,
                                     -0.1, -0.2,  0.25, 0.7,   0.9};
  std::vector<double> beta_stem = {-0.5, 0.5, -0.05, -0.1, -0.1,
                                   0.7,  1.3, -0.15, 1.0,  -0.25};

  // share of rows that get one score overwritten with 0
  double zero_score_fraction = 0.0;

  void validate() const;
};

// Coefficient order for the truth models: intercept, one-of-K indicators
// with reference levels F / North / Public / Humanistic, then ses and the
// scores standardized as (x - 200) / 40.
const std::vector<std::string>& design_encoding();

SynthConfig synth_config_from_json(const std::string& text);
std::string synth_config_to_json(const SynthConfig& config);

enum class TruthOutcome { enroll, stem };

// Generated rows plus the probabilities each outcome was drawn from.
// Zero-score injection happens after the draw, so rows it touched keep the
// probabilities of their original scores here.
struct SynthCohort {
  Cohort rows;
  std::vector<double> p_enroll;
  std::vector<double> p_stem;
};

SynthCohort generate_cohort(const SynthConfig& config);

// Exact sigmoid(beta . x) for each row's current cell values.
std::vector<double> ground_truth_proba(const SynthConfig& config,
                                       const Cohort& rows,
                                       TruthOutcome outcome);

// row_id,p_enroll,p_stem
std::string truth_to_csv(const SynthCohort& cohort);

}  // namespace stemboost
