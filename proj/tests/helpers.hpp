#pragma once

// Shared fixture builders and independent reference implementations the
// tests compare the library against. The oracles here are deliberately
// brute force: correctness over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "stemboost/boosting.hpp"
#include "stemboost/cohort.hpp"
#include "stemboost/common.hpp"
#include "stemboost/schema.hpp"

namespace testutil {

using namespace stemboost;

// Schema with `n_numeric` numeric features x0.. and `cat_levels.size()`
// categorical features c0.. plus a single binary target y.
inline FeatureSchema make_schema(int n_numeric,
                                 const std::vector<int>& cat_levels = {}) {
  std::vector<FeatureDef> features;
  for (int f = 0; f < n_numeric; ++f)
    features.push_back(
        {"x" + std::to_string(f), FeatureKind::numeric, {}});
  for (std::size_t c = 0; c < cat_levels.size(); ++c) {
    std::vector<std::string> levels;
    for (int l = 0; l < cat_levels[c]; ++l)
      levels.push_back("L" + std::to_string(l));
    features.push_back({"c" + std::to_string(c), FeatureKind::categorical,
                        std::move(levels)});
  }
  return FeatureSchema(std::move(features), {"y"});
}

// Random cohort over make_schema. Numeric cells are uniform on [0, 10) with
// duplicates likely (two decimals); targets are fair coin flips.
inline Cohort random_cohort(Rng& rng, std::int64_t n, int n_numeric,
                            const std::vector<int>& cat_levels = {}) {
  const FeatureSchema schema = make_schema(n_numeric, cat_levels);
  std::vector<std::vector<double>> nums(schema.n_features());
  std::vector<std::vector<std::int32_t>> cats(schema.n_features());
  for (int f = 0; f < n_numeric; ++f) {
    auto& col = nums[static_cast<std::size_t>(f)];
    col.resize(static_cast<std::size_t>(n));
    for (auto& v : col)
      v = std::floor(rng.uniform01() * 1000.0) / 100.0;
  }
  for (std::size_t c = 0; c < cat_levels.size(); ++c) {
    auto& col = cats[static_cast<std::size_t>(n_numeric) + c];
    col.resize(static_cast<std::size_t>(n));
    for (auto& v : col)
      v = static_cast<std::int32_t>(
          rng.uniform_below(static_cast<std::uint64_t>(cat_levels[c])));
  }
  std::vector<std::vector<std::int8_t>> tgs(1);
  tgs[0].resize(static_cast<std::size_t>(n));
  for (auto& y : tgs[0]) y = rng.uniform01() < 0.5 ? 1 : 0;
  return Cohort(schema, std::move(nums), std::move(cats), std::move(tgs));
}

// Cohort with only numeric columns x0.. and a zero-filled target.
inline Cohort numeric_cohort(const std::vector<std::vector<double>>& columns) {
  const auto schema = make_schema(static_cast<int>(columns.size()));
  std::vector<std::vector<double>> nums(columns.begin(), columns.end());
  std::vector<std::vector<std::int32_t>> cats(columns.size());
  std::vector<std::vector<std::int8_t>> tgs(
      1, std::vector<std::int8_t>(columns[0].size(), 0));
  return Cohort(schema, std::move(nums), std::move(cats), std::move(tgs));
}

inline std::vector<std::uint32_t> all_rows(const Cohort& c) {
  std::vector<std::uint32_t> rows(static_cast<std::size_t>(c.n_rows()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    rows[i] = static_cast<std::uint32_t>(i);
  return rows;
}

struct OracleSplit {
  bool found = false;
  int feature = -1;
  double gain = -std::numeric_limits<double>::infinity();
  double threshold = 0.0;            // numeric splits
  std::uint64_t left_mask = 0;       // categorical splits
  std::int64_t n_left = 0, n_right = 0;
};

// Exhaustive single-split search: every numeric midpoint and every subset of
// seen categorical levels, same tie rules as the fitter (lowest feature,
// then lowest threshold or the mean-ordered prefix). Usable only for small
// level counts.
inline OracleSplit best_split_oracle(const Cohort& data,
                                     const std::vector<std::uint32_t>& rows,
                                     const std::vector<double>& residual,
                                     int min_node) {
  const FeatureSchema& schema = data.schema();
  OracleSplit best;
  double sum_p = 0.0;
  for (std::uint32_t r : rows) sum_p += residual[r];
  const double parent = sum_p * sum_p / static_cast<double>(rows.size());

  auto consider = [&](int feature, double threshold, std::uint64_t mask,
                      double sum_l, std::int64_t n_l) {
    const std::int64_t n_r = static_cast<std::int64_t>(rows.size()) - n_l;
    if (n_l < min_node || n_r < min_node) return;
    const double sum_r = sum_p - sum_l;
    const double gain = sum_l * sum_l / static_cast<double>(n_l) +
                        sum_r * sum_r / static_cast<double>(n_r) - parent;
    // strict > mirrors the fitter: the first candidate in scan order keeps
    // a tie, so feature index, then threshold, then prefix length decide
    if (gain > best.gain) best = {true, feature, gain, threshold, mask, n_l, n_r};
  };

  for (int f = 0; f < static_cast<int>(schema.n_features()); ++f) {
    if (schema.features()[static_cast<std::size_t>(f)].kind ==
        FeatureKind::numeric) {
      std::vector<double> values;
      for (std::uint32_t r : rows) values.push_back(data.numeric_cell(f, r));
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const double threshold = 0.5 * (values[i] + values[i + 1]);
        double sum_l = 0.0;
        std::int64_t n_l = 0;
        for (std::uint32_t r : rows)
          if (data.numeric_cell(f, r) <= threshold) {
            sum_l += residual[r];
            ++n_l;
          }
        consider(f, threshold, 0, sum_l, n_l);
      }
    } else {
      std::uint64_t seen = 0;
      for (std::uint32_t r : rows)
        seen |= 1ULL << static_cast<std::uint32_t>(
            data.categorical_cell(f, r));
      std::vector<int> levels;
      for (int l = 0; l < 64; ++l)
        if (seen & (1ULL << l)) levels.push_back(l);
      // mean-residual order, then prefix subsets, mirroring the contract
      std::vector<std::pair<double, int>> means;
      for (int l : levels) {
        double sum = 0.0;
        std::int64_t cnt = 0;
        for (std::uint32_t r : rows)
          if (data.categorical_cell(f, r) == l) {
            sum += residual[r];
            ++cnt;
          }
        means.push_back({sum / static_cast<double>(cnt), l});
      }
      std::sort(means.begin(), means.end());
      std::uint64_t mask = 0;
      for (std::size_t take = 0; take + 1 < means.size(); ++take) {
        mask |= 1ULL << static_cast<std::uint32_t>(means[take].second);
        double sum_l = 0.0;
        std::int64_t n_l = 0;
        for (std::uint32_t r : rows)
          if (mask & (1ULL << static_cast<std::uint32_t>(
                          data.categorical_cell(f, r)))) {
            sum_l += residual[r];
            ++n_l;
          }
        consider(f, 0.0, mask, sum_l, n_l);
      }
    }
  }
  if (best.found) {
    double sum_r2 = 0.0;
    for (std::uint32_t r : rows) sum_r2 += residual[r] * residual[r];
    if (best.gain <= 1e-9 * std::max(1.0, sum_r2)) best.found = false;
  }
  return best;
}

// Definition-level PDP cell: overwrite the pair columns with the grid point
// for every facet row, predict, average.
inline double pdp_cell_oracle(const GbmModel& model, const Cohort& data,
                              const std::vector<std::uint32_t>& facet_rows,
                              int feature_a, int feature_b, double a, double b,
                              Output output) {
  const FeatureSchema& schema = data.schema();
  std::vector<std::vector<double>> nums(schema.n_features());
  std::vector<std::vector<std::int32_t>> cats(schema.n_features());
  const Cohort sub = data.select(facet_rows);
  for (std::size_t f = 0; f < schema.n_features(); ++f) {
    if (schema.features()[f].kind == FeatureKind::numeric)
      nums[f] = sub.numeric(static_cast<int>(f));
    else
      cats[f] = sub.categorical(static_cast<int>(f));
  }
  std::vector<std::vector<std::int8_t>> tgs(schema.n_targets());
  for (std::size_t t = 0; t < schema.n_targets(); ++t)
    tgs[t] = sub.target(static_cast<int>(t));
  std::fill(nums[static_cast<std::size_t>(feature_a)].begin(),
            nums[static_cast<std::size_t>(feature_a)].end(), a);
  std::fill(nums[static_cast<std::size_t>(feature_b)].begin(),
            nums[static_cast<std::size_t>(feature_b)].end(), b);
  const Cohort pinned(schema, std::move(nums), std::move(cats),
                      std::move(tgs));
  const auto scores = predict(model, pinned, -1, output);
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

}  // namespace testutil
