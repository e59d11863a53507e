#include "stemboost/interpret.hpp"

#include <algorithm>
#include <cmath>

#include "stemboost/svg.hpp"

namespace stemboost {

namespace {

using Point = std::pair<double, double>;

void check_model_schema(const GbmModel& model, const FeatureSchema& schema,
                        const char* where) {
  if (schema.fingerprint() != model.schema_fingerprint)
    fail(Errc::schema_mismatch,
         std::string(where) + ": schema does not match the model");
}

Cohort with_constant_numeric(const Cohort& data, int feature, double value) {
  const FeatureSchema& schema = data.schema();
  std::vector<std::vector<double>> nums(schema.n_features());
  std::vector<std::vector<std::int32_t>> cats(schema.n_features());
  std::vector<std::vector<std::int8_t>> tgs(schema.n_targets());
  for (std::size_t f = 0; f < schema.n_features(); ++f) {
    if (schema.features()[f].kind == FeatureKind::numeric)
      nums[f] = data.numeric(static_cast<int>(f));
    else
      cats[f] = data.categorical(static_cast<int>(f));
  }
  std::fill(nums[static_cast<std::size_t>(feature)].begin(),
            nums[static_cast<std::size_t>(feature)].end(), value);
  for (std::size_t t = 0; t < schema.n_targets(); ++t)
    tgs[t] = data.target(static_cast<int>(t));
  return Cohort(schema, std::move(nums), std::move(cats), std::move(tgs));
}

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.first - o.first) * (b.second - o.second) -
         (a.second - o.second) * (b.first - o.first);
}

// shared by the inside test and the degenerate distance test; cross products
// and squared distances both scale with coordinate magnitude squared
double hull_tolerance(const std::vector<Point>& hull) {
  double maxabs = 0.0;
  for (const Point& p : hull)
    maxabs = std::max({maxabs, std::abs(p.first), std::abs(p.second)});
  return 1e-9 * std::max(1.0, maxabs * maxabs);
}

double squared_segment_distance(const Point& a, const Point& b,
                                const Point& q) {
  const double dx = b.first - a.first, dy = b.second - a.second;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0)
    t = std::clamp(
        ((q.first - a.first) * dx + (q.second - a.second) * dy) / len2, 0.0,
        1.0);
  const double px = a.first + t * dx - q.first;
  const double py = a.second + t * dy - q.second;
  return px * px + py * py;
}

}  // namespace

InfluenceTable relative_influence(const GbmModel& model,
                                  const FeatureSchema& schema, int n_trees) {
  check_model_schema(model, schema, "relative_influence");
  const int total = static_cast<int>(model.trees.size());
  const int use = n_trees < 0 ? total : n_trees;
  if (use < 0 || use > total)
    fail(Errc::invalid_config, "relative_influence: n_trees out of range");
  InfluenceTable table;
  table.feature_names.reserve(schema.n_features());
  for (const FeatureDef& def : schema.features())
    table.feature_names.push_back(def.name);
  table.influence.assign(schema.n_features(), 0.0);
  for (int t = 0; t < use; ++t)
    for (const TreeNode& nd : model.trees[static_cast<std::size_t>(t)].nodes())
      if (nd.feature >= 0)
        table.influence[static_cast<std::size_t>(nd.feature)] +=
            nd.improvement;
  double sum = 0.0;
  for (double v : table.influence) sum += v;
  if (sum > 0.0)
    for (double& v : table.influence) v /= sum;
  return table;
}

AleCurve ale_1d(const RawScorer& scorer, const Cohort& data,
                const std::string& feature, int k_intervals) {
  const FeatureSchema& schema = data.schema();
  const int f = schema.feature_index(feature);
  if (f < 0) fail(Errc::missing_column, "ale: no feature '" + feature + "'");
  if (schema.features()[static_cast<std::size_t>(f)].kind !=
      FeatureKind::numeric)
    fail(Errc::invalid_config, "ale: feature '" + feature + "' is not numeric");
  if (k_intervals < 1)
    fail(Errc::invalid_config, "ale: k_intervals must be >= 1");
  const std::int64_t n = data.n_rows();
  if (n < 2) fail(Errc::insufficient_rows, "ale: need at least 2 rows");
  const std::vector<double>& col = data.numeric(f);
  std::vector<double> sorted(col);
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back())
    fail(Errc::constant_feature, "ale: feature '" + feature + "' is constant");

  std::vector<double> bounds{sorted.front()};
  for (int m = 1; m <= k_intervals; ++m) {
    const double q = quantile_sorted(
        sorted, static_cast<double>(m) / static_cast<double>(k_intervals));
    if (q > bounds.back()) bounds.push_back(q);
  }

  // interval k covers (z_{k-1}, z_k]; rows at the minimum fall in interval 1
  auto interval_of = [&bounds](double v) {
    return static_cast<std::size_t>(
        std::lower_bound(bounds.begin() + 1, bounds.end(), v) -
        bounds.begin());
  };

  // interpolated quantiles can leave interior intervals without rows; merge
  // each empty one into its predecessor by dropping the shared boundary
  {
    std::vector<std::int64_t> counts(bounds.size() - 1, 0);
    for (double v : col) counts[interval_of(v) - 1] += 1;
    std::vector<double> merged{bounds.front()};
    for (std::size_t k = 1; k < bounds.size(); ++k) {
      if (counts[k - 1] == 0) merged.pop_back();
      merged.push_back(bounds[k]);
    }
    bounds.swap(merged);
  }

  const std::size_t k_final = bounds.size() - 1;
  std::vector<std::vector<std::uint32_t>> members(k_final);
  for (std::int64_t i = 0; i < n; ++i)
    members[interval_of(col[static_cast<std::size_t>(i)]) - 1].push_back(
        static_cast<std::uint32_t>(i));

  AleCurve curve;
  curve.feature = feature;
  curve.boundaries = bounds;
  curve.interval_counts.resize(k_final);
  curve.uncentered.assign(k_final + 1, 0.0);
  double acc = 0.0;
  for (std::size_t k = 0; k < k_final; ++k) {
    const auto& rows = members[k];
    curve.interval_counts[k] = static_cast<std::int64_t>(rows.size());
    const Cohort sub = data.select(rows);
    const auto hi = scorer(with_constant_numeric(sub, f, bounds[k + 1]));
    const auto lo = scorer(with_constant_numeric(sub, f, bounds[k]));
    if (hi.size() != rows.size() || lo.size() != rows.size())
      fail(Errc::invalid_config, "ale: scorer must return one score per row");
    double delta = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) delta += hi[i] - lo[i];
    acc += delta / static_cast<double>(rows.size());
    curve.uncentered[k + 1] = acc;
  }

  double weighted = 0.0;
  for (std::size_t k = 0; k < k_final; ++k)
    weighted +=
        static_cast<double>(curve.interval_counts[k]) * curve.uncentered[k + 1];
  const double center = weighted / static_cast<double>(n);
  curve.centered.resize(k_final + 1);
  for (std::size_t m = 0; m <= k_final; ++m)
    curve.centered[m] = curve.uncentered[m] - center;
  return curve;
}

AleCurve ale_1d(const GbmModel& model, const Cohort& data,
                const std::string& feature, int k_intervals) {
  check_model_schema(model, data.schema(), "ale");
  return ale_1d(
      [&model](const Cohort& rows) {
        return predict(model, rows, -1, Output::raw);
      },
      data, feature, k_intervals);
}

std::vector<Point> convex_hull(std::vector<Point> points) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() <= 2) return points;
  std::vector<Point> hull(2 * points.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  for (std::size_t i = points.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);  // the walk closes on the starting point
  return hull;
}

std::vector<char> convex_hull_mask(const std::vector<Point>& points,
                                   const std::vector<double>& axis_a,
                                   const std::vector<double>& axis_b) {
  if (points.empty())
    fail(Errc::insufficient_rows, "convex_hull_mask: no points");
  const std::vector<Point> hull = convex_hull(points);
  const double tol = hull_tolerance(hull);
  std::vector<char> inside(axis_a.size() * axis_b.size(), 0);
  for (std::size_t i = 0; i < axis_a.size(); ++i)
    for (std::size_t j = 0; j < axis_b.size(); ++j) {
      const Point q{axis_a[i], axis_b[j]};
      bool in;
      if (hull.size() == 1) {
        in = squared_segment_distance(hull[0], hull[0], q) <= tol;
      } else if (hull.size() == 2) {
        in = squared_segment_distance(hull[0], hull[1], q) <= tol;
      } else {
        in = true;
        for (std::size_t e = 0; e < hull.size() && in; ++e)
          in = cross(hull[e], hull[(e + 1) % hull.size()], q) >= -tol;
      }
      inside[i * axis_b.size() + j] = in ? 1 : 0;
    }
  return inside;
}

std::vector<PdpSurface> pdp_faceted(
    const GbmModel& model, const Cohort& data,
    const std::pair<std::string, std::string>& pair,
    const std::vector<std::string>& facets, std::pair<int, int> grid,
    bool hull, Output output) {
  const FeatureSchema& schema = data.schema();
  check_model_schema(model, schema, "pdp");
  const int fa = schema.feature_index(pair.first);
  const int fb = schema.feature_index(pair.second);
  if (fa < 0 || fb < 0)
    fail(Errc::missing_column, "pdp: unknown pair feature");
  if (fa == fb) fail(Errc::invalid_config, "pdp: pair features must differ");
  for (int f : {fa, fb})
    if (schema.features()[static_cast<std::size_t>(f)].kind !=
        FeatureKind::numeric)
      fail(Errc::invalid_config, "pdp: pair features must be numeric");
  const auto [na, nb] = grid;
  if (na < 1 || nb < 1)
    fail(Errc::invalid_config, "pdp: grid dimensions must be >= 1");

  std::vector<int> facet_features;
  std::vector<std::size_t> level_counts;
  std::size_t n_combos = 1;
  for (const std::string& name : facets) {
    const int f = schema.feature_index(name);
    if (f < 0) fail(Errc::missing_column, "pdp: no facet feature '" + name + "'");
    if (schema.features()[static_cast<std::size_t>(f)].kind !=
        FeatureKind::categorical)
      fail(Errc::invalid_config, "pdp: facet '" + name + "' must be categorical");
    facet_features.push_back(f);
    level_counts.push_back(
        schema.features()[static_cast<std::size_t>(f)].levels.size());
    n_combos *= level_counts.back();
  }

  std::vector<std::vector<std::uint32_t>> members(n_combos);
  for (std::int64_t i = 0; i < data.n_rows(); ++i) {
    std::size_t combo = 0;
    for (std::size_t f = 0; f < facet_features.size(); ++f)
      combo = combo * level_counts[f] +
              static_cast<std::size_t>(
                  data.categorical_cell(facet_features[f], i));
    members[combo].push_back(static_cast<std::uint32_t>(i));
  }

  const std::vector<double>& col_a = data.numeric(fa);
  const std::vector<double>& col_b = data.numeric(fb);
  const auto cells = static_cast<std::size_t>(na) * static_cast<std::size_t>(nb);

  std::vector<PdpSurface> surfaces;
  for (std::size_t combo = 0; combo < n_combos; ++combo) {
    const auto& rows = members[combo];
    if (rows.empty()) continue;  // facet has no population; surface omitted

    PdpSurface s;
    s.n_rows = static_cast<std::int64_t>(rows.size());
    std::size_t rem = combo;
    s.facet_levels.resize(facet_features.size());
    for (std::size_t f = facet_features.size(); f-- > 0;) {
      const std::size_t lev = rem % level_counts[f];
      rem /= level_counts[f];
      s.facet_levels[f] =
          schema.features()[static_cast<std::size_t>(facet_features[f])]
              .levels[lev];
    }

    double a_min = col_a[rows[0]], a_max = col_a[rows[0]];
    double b_min = col_b[rows[0]], b_max = col_b[rows[0]];
    for (std::uint32_t r : rows) {
      a_min = std::min(a_min, col_a[r]);
      a_max = std::max(a_max, col_a[r]);
      b_min = std::min(b_min, col_b[r]);
      b_max = std::max(b_max, col_b[r]);
    }
    s.axis_a.resize(static_cast<std::size_t>(na));
    s.axis_b.resize(static_cast<std::size_t>(nb));
    for (int i = 0; i < na; ++i)
      s.axis_a[static_cast<std::size_t>(i)] =
          na == 1 ? a_min
                  : a_min + (a_max - a_min) * i / static_cast<double>(na - 1);
    for (int j = 0; j < nb; ++j)
      s.axis_b[static_cast<std::size_t>(j)] =
          nb == 1 ? b_min
                  : b_min + (b_max - b_min) * j / static_cast<double>(nb - 1);

    // first grid index each split sends right, per node; pair-feature
    // thresholds are the only ones that cut the grid
    std::vector<std::vector<int>> cut(model.trees.size());
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
      const auto& nodes = model.trees[t].nodes();
      cut[t].assign(nodes.size(), 0);
      for (std::size_t u = 0; u < nodes.size(); ++u) {
        if (nodes[u].feature == fa)
          cut[t][u] = static_cast<int>(
              std::upper_bound(s.axis_a.begin(), s.axis_a.end(),
                               nodes[u].threshold) -
              s.axis_a.begin());
        else if (nodes[u].feature == fb)
          cut[t][u] = static_cast<int>(
              std::upper_bound(s.axis_b.begin(), s.axis_b.end(),
                               nodes[u].threshold) -
              s.axis_b.begin());
      }
    }

    const std::int64_t n_rows_facet = static_cast<std::int64_t>(rows.size());
    const std::int64_t n_chunks =
        (n_rows_facet + kRowChunk - 1) / kRowChunk;
    std::vector<std::vector<double>> chunk_acc(
        static_cast<std::size_t>(n_chunks));
    const std::size_t diff_stride = static_cast<std::size_t>(nb) + 1;
    const std::size_t diff_size =
        (static_cast<std::size_t>(na) + 1) * diff_stride;

    parallel_chunks(
        n_rows_facet, kRowChunk,
        [&](std::int64_t c, std::int64_t begin, std::int64_t end) {
          std::vector<double>& acc = chunk_acc[static_cast<std::size_t>(c)];
          acc.assign(cells, 0.0);
          std::vector<double> diff(diff_size);
          struct Rect {
            int node, alo, ahi, blo, bhi;
          };
          std::vector<Rect> stack;
          stack.reserve(64);
          for (std::int64_t ri = begin; ri < end; ++ri) {
            const std::int64_t row = rows[static_cast<std::size_t>(ri)];
            std::fill(diff.begin(), diff.end(), 0.0);
            for (std::size_t t = 0; t < model.trees.size(); ++t) {
              const auto& nodes = model.trees[t].nodes();
              stack.push_back({0, 0, na, 0, nb});
              while (!stack.empty()) {
                const Rect rc = stack.back();
                stack.pop_back();
                const TreeNode& nd =
                    nodes[static_cast<std::size_t>(rc.node)];
                if (nd.feature < 0) {
                  const double v = model.shrinkage * nd.value;
                  const auto alo = static_cast<std::size_t>(rc.alo);
                  const auto ahi = static_cast<std::size_t>(rc.ahi);
                  const auto blo = static_cast<std::size_t>(rc.blo);
                  const auto bhi = static_cast<std::size_t>(rc.bhi);
                  diff[alo * diff_stride + blo] += v;
                  diff[alo * diff_stride + bhi] -= v;
                  diff[ahi * diff_stride + blo] -= v;
                  diff[ahi * diff_stride + bhi] += v;
                  continue;
                }
                if (nd.feature == fa) {
                  const int c0 = std::clamp(cut[t][static_cast<std::size_t>(
                                                rc.node)],
                                            rc.alo, rc.ahi);
                  if (c0 > rc.alo)
                    stack.push_back({nd.left, rc.alo, c0, rc.blo, rc.bhi});
                  if (c0 < rc.ahi)
                    stack.push_back({nd.right, c0, rc.ahi, rc.blo, rc.bhi});
                } else if (nd.feature == fb) {
                  const int c0 = std::clamp(cut[t][static_cast<std::size_t>(
                                                rc.node)],
                                            rc.blo, rc.bhi);
                  if (c0 > rc.blo)
                    stack.push_back({nd.left, rc.alo, rc.ahi, rc.blo, c0});
                  if (c0 < rc.bhi)
                    stack.push_back({nd.right, rc.alo, rc.ahi, c0, rc.bhi});
                } else {
                  bool go_left;
                  if (nd.categorical) {
                    const std::uint64_t bit =
                        1ULL << static_cast<std::uint32_t>(
                            data.categorical_cell(nd.feature, row));
                    go_left = (nd.seen_mask & bit) != 0 &&
                              (nd.left_mask & bit) != 0;
                  } else {
                    go_left =
                        data.numeric_cell(nd.feature, row) <= nd.threshold;
                  }
                  stack.push_back({go_left ? nd.left : nd.right, rc.alo,
                                   rc.ahi, rc.blo, rc.bhi});
                }
              }
            }
            // 2-D prefix sums turn corner marks into per-cell raw scores
            for (std::size_t i = 1; i <= static_cast<std::size_t>(na); ++i)
              for (std::size_t j = 0; j < diff_stride; ++j)
                diff[i * diff_stride + j] += diff[(i - 1) * diff_stride + j];
            for (std::size_t i = 0; i <= static_cast<std::size_t>(na); ++i)
              for (std::size_t j = 1; j < diff_stride; ++j)
                diff[i * diff_stride + j] += diff[i * diff_stride + j - 1];
            for (std::size_t i = 0; i < static_cast<std::size_t>(na); ++i)
              for (std::size_t j = 0; j < static_cast<std::size_t>(nb); ++j) {
                const double raw = model.f0 + diff[i * diff_stride + j];
                acc[i * static_cast<std::size_t>(nb) + j] +=
                    output == Output::probability ? sigmoid(raw) : raw;
              }
          }
        });

    s.values.assign(cells, 0.0);
    for (const auto& acc : chunk_acc) {
      if (acc.empty()) continue;
      for (std::size_t i = 0; i < cells; ++i) s.values[i] += acc[i];
    }
    for (double& v : s.values) v /= static_cast<double>(n_rows_facet);

    s.masked.assign(cells, 0);
    if (hull) {
      std::vector<Point> pts;
      pts.reserve(rows.size());
      for (std::uint32_t r : rows) pts.emplace_back(col_a[r], col_b[r]);
      s.hull = convex_hull(pts);
      const auto inside = convex_hull_mask(pts, s.axis_a, s.axis_b);
      for (std::size_t i = 0; i < cells; ++i) s.masked[i] = inside[i] ? 0 : 1;
    }
    surfaces.push_back(std::move(s));
  }
  return surfaces;
}

std::string influence_to_csv(const InfluenceTable& table) {
  std::string out = "feature,influence\n";
  for (std::size_t f = 0; f < table.feature_names.size(); ++f) {
    out += table.feature_names[f];
    out += ',';
    out += format_double(table.influence[f]);
    out += '\n';
  }
  return out;
}

std::string influence_to_svg(const InfluenceTable& table,
                             const std::string& title) {
  std::vector<std::size_t> order(table.feature_names.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&table](std::size_t a, std::size_t b) {
    if (table.influence[a] != table.influence[b])
      return table.influence[a] > table.influence[b];
    return a < b;
  });
  const double row_h = 26.0;
  const double height = 70.0 + row_h * static_cast<double>(order.size());
  svg::Canvas canvas(480, height);
  canvas.text(240, 22, title, 13, "middle");
  const double bar_x = 150.0, bar_max = 290.0;
  double top = 44.0;
  const double scale =
      table.influence.empty() || table.influence[order[0]] <= 0.0
          ? 0.0
          : bar_max / table.influence[order[0]];
  for (std::size_t i : order) {
    canvas.text(bar_x - 8, top + 14, table.feature_names[i], 11, "end");
    canvas.rect(bar_x, top + 2, table.influence[i] * scale, 16, "#1f6fb2");
    char label[32];
    std::snprintf(label, sizeof(label), "%.1f%%", 100.0 * table.influence[i]);
    canvas.text(bar_x + table.influence[i] * scale + 6, top + 14, label, 10);
    top += row_h;
  }
  return canvas.str();
}

std::string ale_to_csv(const AleCurve& curve) {
  std::string out = "boundary,uncentered,centered,interval_count\n";
  for (std::size_t m = 0; m < curve.boundaries.size(); ++m) {
    out += format_double(curve.boundaries[m]);
    out += ',';
    out += format_double(curve.uncentered[m]);
    out += ',';
    out += format_double(curve.centered[m]);
    out += ',';
    out += m == 0 ? "0" : std::to_string(curve.interval_counts[m - 1]);
    out += '\n';
  }
  return out;
}

std::string ale_probability_csv(const AleCurve& curve, double anchor) {
  std::string out = "boundary,probability\n";
  for (std::size_t m = 0; m < curve.boundaries.size(); ++m) {
    out += format_double(curve.boundaries[m]);
    out += ',';
    out += format_double(sigmoid(anchor + curve.centered[m]));
    out += '\n';
  }
  return out;
}

std::string ale_to_svg(const AleCurve& curve, const std::string& title) {
  double lo = curve.centered[0], hi = curve.centered[0];
  for (double v : curve.centered) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double pad = std::max(0.05, (hi - lo) * 0.08);
  svg::Canvas canvas(460, 360);
  svg::Plot plot(460, 360, curve.boundaries.front(), curve.boundaries.back(),
                 lo - pad, hi + pad);
  plot.draw_axes(canvas, 6, 6, title, curve.feature, "centered effect");
  canvas.line(plot.left(), plot.py(0.0), plot.right(), plot.py(0.0),
              "#999999", 1.0, true);
  std::vector<Point> pts;
  pts.reserve(curve.boundaries.size());
  for (std::size_t m = 0; m < curve.boundaries.size(); ++m)
    pts.emplace_back(plot.px(curve.boundaries[m]), plot.py(curve.centered[m]));
  canvas.polyline(pts, "#b2451f", 2.0);
  return canvas.str();
}

std::string pdp_to_csv(const std::vector<PdpSurface>& surfaces,
                       const std::vector<std::string>& facet_names,
                       const std::pair<std::string, std::string>& pair_names) {
  std::string out;
  for (const std::string& name : facet_names) {
    out += name;
    out += ',';
  }
  out += pair_names.first;
  out += ',';
  out += pair_names.second;
  out += ",value,masked\n";
  for (const PdpSurface& s : surfaces)
    for (std::size_t i = 0; i < s.axis_a.size(); ++i)
      for (std::size_t j = 0; j < s.axis_b.size(); ++j) {
        for (const std::string& level : s.facet_levels) {
          out += level;
          out += ',';
        }
        out += format_double(s.axis_a[i]);
        out += ',';
        out += format_double(s.axis_b[j]);
        out += ',';
        out += format_double(s.values[i * s.axis_b.size() + j]);
        out += ',';
        out += s.masked[i * s.axis_b.size() + j] ? '1' : '0';
        out += '\n';
      }
  return out;
}

std::string pdp_to_svg(const std::vector<PdpSurface>& surfaces,
                       const std::vector<std::string>& facet_names,
                       const std::pair<std::string, std::string>& pair_names,
                       const std::string& title) {
  const std::size_t n_panels = surfaces.size();
  const std::size_t cols = n_panels < 3 ? std::max<std::size_t>(n_panels, 1) : 3;
  const std::size_t rows = (n_panels + cols - 1) / cols;
  const double panel_w = 250.0, panel_h = 250.0, gap = 24.0;
  const double width = 70.0 + cols * (panel_w + gap) + 60.0;
  const double height = 60.0 + rows * (panel_h + gap);
  svg::Canvas canvas(width, height);
  canvas.text(width / 2, 26, title, 14, "middle");

  double v_lo = 0.0, v_hi = 1.0;
  bool seeded = false;
  for (const PdpSurface& s : surfaces)
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (s.masked[i]) continue;
      if (!seeded) {
        v_lo = v_hi = s.values[i];
        seeded = true;
      } else {
        v_lo = std::min(v_lo, s.values[i]);
        v_hi = std::max(v_hi, s.values[i]);
      }
    }
  if (!seeded || v_hi <= v_lo) v_hi = v_lo + 1.0;

  for (std::size_t p = 0; p < n_panels; ++p) {
    const PdpSurface& s = surfaces[p];
    const double x0 = 70.0 + static_cast<double>(p % cols) * (panel_w + gap);
    const double y0 = 48.0 + static_cast<double>(p / cols) * (panel_h + gap);
    std::string label;
    for (std::size_t f = 0; f < s.facet_levels.size(); ++f) {
      if (f) label += " / ";
      label += s.facet_levels[f];
    }
    canvas.text(x0 + panel_w / 2, y0 - 4, label, 11, "middle");

    const double a_lo = s.axis_a.front(), a_hi = s.axis_a.back();
    const double b_lo = s.axis_b.front(), b_hi = s.axis_b.back();
    const double a_span = a_hi > a_lo ? a_hi - a_lo : 1.0;
    const double b_span = b_hi > b_lo ? b_hi - b_lo : 1.0;
    auto px = [&](double a) { return x0 + (a - a_lo) / a_span * panel_w; };
    auto py = [&](double b) {
      return y0 + panel_h - (b - b_lo) / b_span * panel_h;
    };
    const double cell_w = panel_w / static_cast<double>(s.axis_a.size());
    const double cell_h = panel_h / static_cast<double>(s.axis_b.size());
    for (std::size_t i = 0; i < s.axis_a.size(); ++i)
      for (std::size_t j = 0; j < s.axis_b.size(); ++j) {
        const std::size_t idx = i * s.axis_b.size() + j;
        const std::string fill =
            s.masked[idx] ? "#e3e3e3"
                          : svg::lerp_color("#f7fbff", "#08306b",
                                            (s.values[idx] - v_lo) /
                                                (v_hi - v_lo));
        canvas.rect(x0 + static_cast<double>(i) * cell_w,
                    y0 + panel_h - static_cast<double>(j + 1) * cell_h,
                    cell_w + 0.4, cell_h + 0.4, fill);
      }
    if (!s.hull.empty()) {
      std::vector<Point> poly;
      poly.reserve(s.hull.size());
      for (const Point& pt : s.hull)
        poly.emplace_back(px(pt.first), py(pt.second));
      canvas.polygon(poly, "none", "#d95f02", 1.4);
    }
    canvas.rect(x0, y0, panel_w, panel_h, "none", "#333333", 1.0);
    canvas.text(x0 + panel_w / 2, y0 + panel_h + 14,
                pair_names.first + " " + svg::tick_label(a_lo) + " to " +
                    svg::tick_label(a_hi),
                9, "middle");
    canvas.text(x0 - 4, y0 + panel_h / 2, pair_names.second, 9, "middle",
                true);
  }

  // shared color scale
  const double bar_x = width - 44.0, bar_y = 48.0, bar_h = 160.0;
  for (int step = 0; step < 40; ++step) {
    const double t = static_cast<double>(step) / 39.0;
    canvas.rect(bar_x, bar_y + bar_h * (1.0 - t) - bar_h / 40.0, 14.0,
                bar_h / 40.0 + 0.4,
                svg::lerp_color("#f7fbff", "#08306b", t));
  }
  canvas.text(bar_x + 18, bar_y + 4, svg::tick_label(v_hi), 9);
  canvas.text(bar_x + 18, bar_y + bar_h + 4, svg::tick_label(v_lo), 9);
  return canvas.str();
}

}  // namespace stemboost
