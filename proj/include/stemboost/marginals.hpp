#pragma once

#include <string>
#include <vector>

#include "stemboost/cohort.hpp"

namespace stemboost {

// One cell of the descriptive table: outcome mix of a (variable, category,
// gender) group as percentages of the group total.
struct MarginalRow {
  std::string variable;
  std::string category;
  std::string gender;
  double pct_not_enrolled = 0.0;
  double pct_non_stem = 0.0;
  double pct_stem = 0.0;
  std::int64_t total = 0;
};

struct MarginalsTable {
  std::vector<MarginalRow> rows;
  const MarginalRow* find(const std::string& variable,
                          const std::string& category,
                          const std::string& gender) const;
};

// Per-category outcome shares by gender: macroregion, SES bands (cohort
// quartiles when enabled), school type, curriculum, and proficiency bands of
// both scores, plus a Total row per gender.
MarginalsTable summarize_marginals(const Cohort& cohort, bool ses_quartiles,
                                   const std::vector<double>& proficiency_cutpoints);

std::string marginals_to_csv(const MarginalsTable& table);

struct FacetCorrelation {
  std::vector<std::string> facet_levels;  // aligned with the `by` list
  double correlation = 0.0;
  std::int64_t rows = 0;
};

// Pearson correlation of (math_score, italian_score) per facet combination;
// empty `by` computes one global value.
std::vector<FacetCorrelation> score_correlation(
    const Cohort& cohort, const std::vector<std::string>& by);

}  // namespace stemboost
