#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "stemboost/boosting.hpp"

namespace stemboost {

struct InfluenceTable {
  std::vector<std::string> feature_names;  // schema order
  std::vector<double> influence;  // non-negative, sums to 1 (all zero when
                                  // no tree ever split)
};

// Split improvements credited to their split variable, normalized across
// the first n_trees trees (-1 = all).
InfluenceTable relative_influence(const GbmModel& model,
                                  const FeatureSchema& schema,
                                  int n_trees = -1);

// One numeric feature's accumulated local effects on the raw score scale.
// boundaries[0] is the observed minimum; rows at the minimum count into
// interval 1; intervals left empty by duplicate or interpolated quantiles
// are merged into their predecessor, so every final interval is populated.
struct AleCurve {
  std::string feature;
  std::vector<double> boundaries;             // z_0..z_K, strictly increasing
  std::vector<std::int64_t> interval_counts;  // per interval, sums to n
  std::vector<double> uncentered;             // g at each boundary; g(z_0)=0
  std::vector<double> centered;               // g minus the row-weighted mean
};

// Raw-score predictions for any cohort conforming to the model's schema.
using RawScorer = std::function<std::vector<double>(const Cohort&)>;

AleCurve ale_1d(const RawScorer& scorer, const Cohort& data,
                const std::string& feature, int k_intervals);
AleCurve ale_1d(const GbmModel& model, const Cohort& data,
                const std::string& feature, int k_intervals);

// One facet's PDP grid. values is row-major over (axis_a, axis_b); masked
// flags cells whose grid point falls outside the facet's convex hull of
// observed pair values (all zero when masking is off).
struct PdpSurface {
  std::vector<std::string> facet_levels;  // aligned with the facets argument
  std::vector<double> axis_a;
  std::vector<double> axis_b;
  std::vector<double> values;
  std::vector<char> masked;
  std::vector<std::pair<double, double>> hull;  // polygon; empty if unused
  std::int64_t n_rows = 0;
};

// Mean prediction over the facet's rows with the pair overwritten by each
// grid point; one surface per populated facet-level combination (empty
// combinations are omitted). Grids span each facet's observed pair range.
std::vector<PdpSurface> pdp_faceted(
    const GbmModel& model, const Cohort& data,
    const std::pair<std::string, std::string>& pair,
    const std::vector<std::string>& facets, std::pair<int, int> grid,
    bool hull, Output output = Output::probability);

// 1 = grid point inside or on the hull (boundary inclusive); collinear or
// duplicate point sets degrade to a distance-to-segment test.
std::vector<char> convex_hull_mask(
    const std::vector<std::pair<double, double>>& points,
    const std::vector<double>& axis_a, const std::vector<double>& axis_b);

// Counter-clockwise hull polygon (monotone chain); collinear input yields
// the extreme segment, a single point repeats.
std::vector<std::pair<double, double>> convex_hull(
    std::vector<std::pair<double, double>> points);

std::string influence_to_csv(const InfluenceTable& table);
std::string influence_to_svg(const InfluenceTable& table,
                             const std::string& title);
std::string ale_to_csv(const AleCurve& curve);
/// sigmoid(anchor + centered effect): a readable probability-scale companion
std::string ale_probability_csv(const AleCurve& curve, double anchor);
std::string ale_to_svg(const AleCurve& curve, const std::string& title);
std::string pdp_to_csv(const std::vector<PdpSurface>& surfaces,
                       const std::vector<std::string>& facet_names,
                       const std::pair<std::string, std::string>& pair_names);
std::string pdp_to_svg(const std::vector<PdpSurface>& surfaces,
                       const std::vector<std::string>& facet_names,
                       const std::pair<std::string, std::string>& pair_names,
                       const std::string& title);

}  // namespace stemboost
