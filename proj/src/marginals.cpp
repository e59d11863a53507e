#include "stemboost/marginals.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace stemboost {

namespace {

struct CellCounts {
  std::int64_t not_enrolled = 0;
  std::int64_t non_stem = 0;
  std::int64_t stem = 0;
  std::int64_t total() const { return not_enrolled + non_stem + stem; }
};

MarginalRow make_row(const std::string& variable, const std::string& category,
                     const std::string& gender, const CellCounts& c) {
  MarginalRow row;
  row.variable = variable;
  row.category = category;
  row.gender = gender;
  row.total = c.total();
  if (row.total > 0) {
    const double t = static_cast<double>(row.total);
    row.pct_not_enrolled = 100.0 * static_cast<double>(c.not_enrolled) / t;
    row.pct_non_stem = 100.0 * static_cast<double>(c.non_stem) / t;
    row.pct_stem = 100.0 * static_cast<double>(c.stem) / t;
  }
  return row;
}

std::vector<std::string> band_labels(std::size_t n_bands,
                                     const std::vector<double>& cuts) {
  if (n_bands == 3) return {"Low", "Medium", "High"};
  std::vector<std::string> labels;
  for (std::size_t b = 0; b < n_bands; ++b) {
    if (b == 0) {
      labels.push_back("<=" + format_double(cuts[0]));
    } else if (b == n_bands - 1) {
      labels.push_back(">" + format_double(cuts[b - 1]));
    } else {
      labels.push_back("(" + format_double(cuts[b - 1]) + "," +
                       format_double(cuts[b]) + "]");
    }
  }
  return labels;
}

// value <= cuts[0] -> band 0; cuts[b-1] < value <= cuts[b] -> band b; else last
std::size_t band_of(double value, const std::vector<double>& cuts) {
  std::size_t b = 0;
  while (b < cuts.size() && value > cuts[b]) ++b;
  return b;
}

}  // namespace

const MarginalRow* MarginalsTable::find(const std::string& variable,
                                        const std::string& category,
                                        const std::string& gender) const {
  for (const auto& row : rows) {
    if (row.variable == variable && row.category == category &&
        row.gender == gender)
      return &row;
  }
  return nullptr;
}

MarginalsTable summarize_marginals(
    const Cohort& cohort, bool ses_quartiles,
    const std::vector<double>& proficiency_cutpoints) {
  const auto& schema = cohort.schema();
  for (std::size_t i = 1; i < proficiency_cutpoints.size(); ++i) {
    if (!(proficiency_cutpoints[i - 1] < proficiency_cutpoints[i]))
      fail(Errc::invalid_config,
           "summarize_marginals: cutpoints must be strictly increasing");
  }
  if (proficiency_cutpoints.empty())
    fail(Errc::invalid_config, "summarize_marginals: need >= 1 cutpoint");

  const int gi = schema.feature_index("gender");
  if (gi < 0) fail(Errc::missing_column, "summarize_marginals: gender missing");
  const auto& genders = schema.features()[static_cast<std::size_t>(gi)].levels;
  const auto& gender_col = cohort.categorical(gi);
  const auto& enrolled = cohort.target("enrolled");
  const auto& stem = cohort.target("stem");
  const std::int64_t n = cohort.n_rows();

  auto outcome_slot = [&](std::int64_t i) -> int {
    const auto e = enrolled[static_cast<std::size_t>(i)];
    if (e == 0) return 0;
    return stem[static_cast<std::size_t>(i)] == 1 ? 2 : 1;
  };

  MarginalsTable table;

  // resolves a per-row category id plus the category label list per variable
  struct Variable {
    std::string name;
    std::vector<std::string> categories;
    std::function<std::size_t(std::int64_t)> category_of;
  };
  std::vector<Variable> variables;

  for (const char* name : {"hs_macroregion", "hs_type", "hs_curriculum"}) {
    const int fi = schema.feature_index(name);
    if (fi < 0) fail(Errc::missing_column,
                     std::string("summarize_marginals: ") + name + " missing");
    const auto& col = cohort.categorical(fi);
    variables.push_back(
        {name, schema.features()[static_cast<std::size_t>(fi)].levels,
         [&col](std::int64_t i) {
           return static_cast<std::size_t>(col[static_cast<std::size_t>(i)]);
         }});
  }

  std::vector<double> ses_cuts;
  if (ses_quartiles) {
    const int si = schema.feature_index("hs_ses");
    if (si < 0) fail(Errc::missing_column, "summarize_marginals: hs_ses missing");
    const auto& ses = cohort.numeric(si);
    std::vector<double> sorted(ses);
    std::sort(sorted.begin(), sorted.end());
    // Low = 1st quartile, High = 4th; the middle two quartiles pool as Medium
    ses_cuts = {quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.75)};
    variables.push_back({"hs_ses",
                         {"Low", "Medium", "High"},
                         [&ses, ses_cuts](std::int64_t i) {
                           return band_of(ses[static_cast<std::size_t>(i)],
                                          ses_cuts);
                         }});
  }

  const auto labels = band_labels(proficiency_cutpoints.size() + 1,
                                  proficiency_cutpoints);
  for (const char* name : {"math_score", "italian_score"}) {
    const int fi = schema.feature_index(name);
    if (fi < 0) fail(Errc::missing_column,
                     std::string("summarize_marginals: ") + name + " missing");
    const auto& col = cohort.numeric(fi);
    variables.push_back({name, labels,
                         [&col, &proficiency_cutpoints](std::int64_t i) {
                           return band_of(col[static_cast<std::size_t>(i)],
                                          proficiency_cutpoints);
                         }});
  }

  for (const auto& var : variables) {
    // counts[category][gender]
    std::vector<std::vector<CellCounts>> counts(
        var.categories.size(), std::vector<CellCounts>(genders.size()));
    for (std::int64_t i = 0; i < n; ++i) {
      auto& cell = counts[var.category_of(i)][static_cast<std::size_t>(
          gender_col[static_cast<std::size_t>(i)])];
      switch (outcome_slot(i)) {
        case 0: ++cell.not_enrolled; break;
        case 1: ++cell.non_stem; break;
        default: ++cell.stem; break;
      }
    }
    for (std::size_t c = 0; c < var.categories.size(); ++c)
      for (std::size_t g = 0; g < genders.size(); ++g)
        table.rows.push_back(
            make_row(var.name, var.categories[c], genders[g], counts[c][g]));
  }

  std::vector<CellCounts> totals(genders.size());
  for (std::int64_t i = 0; i < n; ++i) {
    auto& cell = totals[static_cast<std::size_t>(
        gender_col[static_cast<std::size_t>(i)])];
    switch (outcome_slot(i)) {
      case 0: ++cell.not_enrolled; break;
      case 1: ++cell.non_stem; break;
      default: ++cell.stem; break;
    }
  }
  for (std::size_t g = 0; g < genders.size(); ++g)
    table.rows.push_back(make_row("Total", "", genders[g], totals[g]));

  return table;
}

std::string marginals_to_csv(const MarginalsTable& table) {
  std::string out =
      "variable,category,gender,pct_not_enrolled,pct_non_stem,pct_stem,total\n";
  for (const auto& r : table.rows) {
    out += r.variable;
    out += ',';
    out += r.category;
    out += ',';
    out += r.gender;
    out += ',';
    out += format_double(r.pct_not_enrolled);
    out += ',';
    out += format_double(r.pct_non_stem);
    out += ',';
    out += format_double(r.pct_stem);
    out += ',';
    out += std::to_string(r.total);
    out += '\n';
  }
  return out;
}

std::vector<FacetCorrelation> score_correlation(
    const Cohort& cohort, const std::vector<std::string>& by) {
  const auto& schema = cohort.schema();
  const int mi = schema.feature_index("math_score");
  const int ii = schema.feature_index("italian_score");
  if (mi < 0 || ii < 0)
    fail(Errc::missing_column, "score_correlation: scores missing");

  std::vector<int> facet_features;
  for (const auto& name : by) {
    const int fi = schema.feature_index(name);
    if (fi < 0)
      fail(Errc::missing_column, "score_correlation: no feature '" + name + "'");
    if (schema.features()[static_cast<std::size_t>(fi)].kind !=
        FeatureKind::categorical)
      fail(Errc::invalid_config,
           "score_correlation: facet '" + name + "' must be categorical");
    facet_features.push_back(fi);
  }

  // enumerate facet-level combinations in row-major level order
  std::vector<std::size_t> level_counts;
  std::size_t n_combos = 1;
  for (int fi : facet_features) {
    const auto levels =
        schema.features()[static_cast<std::size_t>(fi)].levels.size();
    level_counts.push_back(levels);
    n_combos *= levels;
  }

  std::vector<std::vector<double>> math_by(n_combos), ital_by(n_combos);
  const auto& math = cohort.numeric(mi);
  const auto& ital = cohort.numeric(ii);
  for (std::int64_t i = 0; i < cohort.n_rows(); ++i) {
    std::size_t combo = 0;
    for (std::size_t f = 0; f < facet_features.size(); ++f) {
      combo = combo * level_counts[f] +
              static_cast<std::size_t>(cohort.categorical_cell(
                  facet_features[f], i));
    }
    math_by[combo].push_back(math[static_cast<std::size_t>(i)]);
    ital_by[combo].push_back(ital[static_cast<std::size_t>(i)]);
  }

  std::vector<FacetCorrelation> out;
  for (std::size_t combo = 0; combo < n_combos; ++combo) {
    FacetCorrelation fc;
    std::size_t rem = combo;
    fc.facet_levels.resize(facet_features.size());
    for (std::size_t f = facet_features.size(); f-- > 0;) {
      const std::size_t lev = rem % level_counts[f];
      rem /= level_counts[f];
      fc.facet_levels[f] =
          schema.features()[static_cast<std::size_t>(facet_features[f])]
              .levels[lev];
    }
    fc.rows = static_cast<std::int64_t>(math_by[combo].size());
    if (fc.rows < 2) {
      std::string label;
      for (const auto& l : fc.facet_levels) label += l + " ";
      fail(Errc::insufficient_rows,
           "score_correlation: facet '" + label + "' has fewer than 2 rows");
    }
    fc.correlation = pearson_correlation(math_by[combo], ital_by[combo]);
    out.push_back(std::move(fc));
  }
  return out;
}

}  // namespace stemboost
