#include "stemboost/tree.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace stemboost {

namespace {

constexpr double kNewtonEps = 1e-12;

// Relative slack against accumulated rounding in the prefix sums; a node of
// numerically constant residuals must stay a leaf.
inline double gain_tolerance(double node_sum_r2) {
  return 1e-9 * std::max(1.0, node_sum_r2);
}

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  bool categorical = false;
  double threshold = 0.0;
  std::uint64_t left_mask = 0;
  std::uint64_t seen_mask = 0;
};

struct NodeStats {
  std::int64_t count = 0;
  double sum_r = 0.0;
  double sum_h = 0.0;
  double sum_r2 = 0.0;
};

void validate_params(const FeatureSchema& schema, const TreeFitParams& p) {
  if (p.max_depth < 1 || p.max_depth > 8)
    fail(Errc::invalid_config, "tree: max_depth must be in [1, 8]");
  if (p.min_node < 1)
    fail(Errc::invalid_config, "tree: min_node must be >= 1");
  for (int f : p.feature_subset)
    if (f < 0 || f >= static_cast<int>(schema.n_features()))
      fail(Errc::invalid_config, "tree: feature_subset index out of range");
}

std::vector<TreeNode> to_preorder(const std::vector<TreeNode>& nodes) {
  std::vector<std::int32_t> order;
  order.reserve(nodes.size());
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const std::int32_t id = stack.back();
    stack.pop_back();
    order.push_back(id);
    const TreeNode& nd = nodes[static_cast<std::size_t>(id)];
    if (nd.feature >= 0) {
      stack.push_back(nd.right);
      stack.push_back(nd.left);
    }
  }
  std::vector<std::int32_t> new_id(nodes.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    new_id[static_cast<std::size_t>(order[pos])] =
        static_cast<std::int32_t>(pos);
  std::vector<TreeNode> out(nodes.size());
  for (std::size_t old = 0; old < nodes.size(); ++old) {
    TreeNode nd = nodes[old];
    if (nd.feature >= 0) {
      nd.left = new_id[static_cast<std::size_t>(nd.left)];
      nd.right = new_id[static_cast<std::size_t>(nd.right)];
    }
    out[static_cast<std::size_t>(new_id[old])] = nd;
  }
  return out;
}

}  // namespace

RegressionTree::RegressionTree(std::vector<TreeNode> nodes)
    : nodes_(std::move(nodes)) {
  if (nodes_.empty())
    fail(Errc::invalid_config, "tree: node list must be non-empty");
  const int size = static_cast<int>(nodes_.size());
  for (int i = 0; i < size; ++i) {
    const TreeNode& nd = nodes_[static_cast<std::size_t>(i)];
    if (nd.feature < 0) continue;
    // preorder layout: children follow their parent
    if (nd.left <= i || nd.left >= size || nd.right <= i || nd.right >= size)
      fail(Errc::invalid_config, "tree: child index out of preorder range");
  }
}

int RegressionTree::depth() const {
  int max_depth = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [id, d] = stack.back();
    stack.pop_back();
    const TreeNode& nd = nodes_[static_cast<std::size_t>(id)];
    if (nd.feature < 0) {
      max_depth = std::max(max_depth, d);
    } else {
      stack.push_back({nd.left, d + 1});
      stack.push_back({nd.right, d + 1});
    }
  }
  return max_depth;
}

std::int64_t RegressionTree::n_leaves() const {
  std::int64_t leaves = 0;
  for (const TreeNode& nd : nodes_)
    if (nd.feature < 0) ++leaves;
  return leaves;
}

double RegressionTree::predict_cohort_row(const Cohort& rows, std::int64_t row,
                                          bool strict,
                                          std::uint64_t& unseen_levels) const {
  return predict_row(
      [&rows, row](int f) { return rows.numeric_cell(f, row); },
      [&rows, row](int f) { return rows.categorical_cell(f, row); }, strict,
      unseen_levels);
}

TreeFitWorkspace::TreeFitWorkspace(const Cohort& cohort) : cohort_(&cohort) {
  const auto& schema = cohort.schema();
  sorted_.resize(schema.n_features());
  const std::int64_t n = cohort.n_rows();
  for (std::size_t f = 0; f < schema.n_features(); ++f) {
    if (schema.features()[f].kind != FeatureKind::numeric) continue;
    const auto& col = cohort.numeric(static_cast<int>(f));
    auto& order = sorted_[f];
    order.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
      order[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(i);
    std::sort(order.begin(), order.end(),
              [&col](std::uint32_t a, std::uint32_t b) {
                if (col[a] != col[b]) return col[a] < col[b];
                return a < b;
              });
  }
}

RegressionTree fit_regression_tree(const TreeFitWorkspace& ws,
                                   const std::vector<std::uint32_t>& rows,
                                   const std::vector<double>& residuals,
                                   const std::vector<double>& hessians,
                                   const TreeFitParams& params) {
  const Cohort& cohort = ws.cohort();
  const FeatureSchema& schema = cohort.schema();
  validate_params(schema, params);
  const std::int64_t n = cohort.n_rows();
  if (residuals.size() != static_cast<std::size_t>(n) ||
      hessians.size() != static_cast<std::size_t>(n))
    fail(Errc::invalid_config, "tree: arrays must span the workspace cohort");
  if (static_cast<std::int64_t>(rows.size()) <
      2 * static_cast<std::int64_t>(params.min_node))
    fail(Errc::too_few_rows, "tree: need at least 2*min_node rows");

  const int n_features = static_cast<int>(schema.n_features());
  std::vector<char> use_feature(static_cast<std::size_t>(n_features), 1);
  if (!params.feature_subset.empty()) {
    std::fill(use_feature.begin(), use_feature.end(), 0);
    for (int f : params.feature_subset)
      use_feature[static_cast<std::size_t>(f)] = 1;
  }

  // position[row]: node currently holding the row; -1 = outside `rows`
  std::vector<std::int32_t> position(static_cast<std::size_t>(n), -1);
  for (std::uint32_t r : rows) {
    if (r >= static_cast<std::uint32_t>(n) || position[r] != -1)
      fail(Errc::invalid_config, "tree: rows must be distinct cohort indices");
    position[r] = 0;
  }

  std::vector<TreeNode> nodes(1);
  std::vector<NodeStats> stats(1);
  for (std::uint32_t r : rows) {
    NodeStats& s = stats[0];
    s.count += 1;
    s.sum_r += residuals[r];
    s.sum_h += hessians[r];
    s.sum_r2 += residuals[r] * residuals[r];
  }

  std::int32_t level_begin = 0;
  std::int32_t level_end = 1;
  for (int depth = 0; depth < params.max_depth && level_begin < level_end;
       ++depth) {
    const std::int32_t n_level = level_end - level_begin;
    std::vector<char> splittable(static_cast<std::size_t>(n_level), 0);
    std::vector<double> parent_term(static_cast<std::size_t>(n_level), 0.0);
    bool any = false;
    for (std::int32_t i = 0; i < n_level; ++i) {
      const NodeStats& s = stats[static_cast<std::size_t>(level_begin + i)];
      if (s.count >= 2 * static_cast<std::int64_t>(params.min_node)) {
        splittable[static_cast<std::size_t>(i)] = 1;
        parent_term[static_cast<std::size_t>(i)] =
            s.sum_r * s.sum_r / static_cast<double>(s.count);
        any = true;
      }
    }
    if (!any) break;

    // per-feature candidates, filled independently, reduced in feature order
    std::vector<std::vector<SplitCandidate>> cand(
        static_cast<std::size_t>(n_features),
        std::vector<SplitCandidate>(static_cast<std::size_t>(n_level)));
    parallel_jobs(n_features, [&](std::int64_t fj) {
      const int f = static_cast<int>(fj);
      if (!use_feature[static_cast<std::size_t>(f)]) return;
      auto& out = cand[static_cast<std::size_t>(f)];
      if (schema.features()[static_cast<std::size_t>(f)].kind ==
          FeatureKind::numeric) {
        const auto& col = cohort.numeric(f);
        const auto& order = ws.sorted_order(f);
        std::vector<std::int64_t> cnt(static_cast<std::size_t>(n_level), 0);
        std::vector<double> sum(static_cast<std::size_t>(n_level), 0.0);
        std::vector<double> last(static_cast<std::size_t>(n_level), 0.0);
        for (std::uint32_t r : order) {
          const std::int32_t node = position[r];
          if (node < level_begin) continue;
          const auto i = static_cast<std::size_t>(node - level_begin);
          if (!splittable[i]) continue;
          const double v = col[r];
          const NodeStats& s = stats[static_cast<std::size_t>(node)];
          if (cnt[i] > 0 && v > last[i]) {
            const std::int64_t n_l = cnt[i];
            const std::int64_t n_r = s.count - n_l;
            if (n_l >= params.min_node && n_r >= params.min_node) {
              const double s_l = sum[i];
              const double s_r = s.sum_r - s_l;
              const double gain = s_l * s_l / static_cast<double>(n_l) +
                                  s_r * s_r / static_cast<double>(n_r) -
                                  parent_term[i];
              SplitCandidate& best = out[i];
              if (gain > best.gain) {
                best.gain = gain;
                best.feature = f;
                best.categorical = false;
                best.threshold = 0.5 * (last[i] + v);
              }
            }
          }
          cnt[i] += 1;
          sum[i] += residuals[r];
          last[i] = v;
        }
      } else {
        const auto& col = cohort.categorical(f);
        const auto n_levels =
            schema.features()[static_cast<std::size_t>(f)].levels.size();
        std::vector<std::int64_t> lcnt(
            static_cast<std::size_t>(n_level) * n_levels, 0);
        std::vector<double> lsum(static_cast<std::size_t>(n_level) * n_levels,
                                 0.0);
        for (std::int64_t r = 0; r < n; ++r) {
          const std::int32_t node = position[static_cast<std::size_t>(r)];
          if (node < level_begin) continue;
          const auto i = static_cast<std::size_t>(node - level_begin);
          if (!splittable[i]) continue;
          const std::size_t slot =
              i * n_levels +
              static_cast<std::size_t>(col[static_cast<std::size_t>(r)]);
          lcnt[slot] += 1;
          lsum[slot] += residuals[static_cast<std::size_t>(r)];
        }
        std::vector<std::pair<double, int>> means;
        for (std::size_t i = 0; i < static_cast<std::size_t>(n_level); ++i) {
          if (!splittable[i]) continue;
          const NodeStats& s =
              stats[static_cast<std::size_t>(level_begin) + i];
          means.clear();
          std::uint64_t seen = 0;
          for (std::size_t l = 0; l < n_levels; ++l) {
            const std::size_t slot = i * n_levels + l;
            if (lcnt[slot] == 0) continue;
            means.emplace_back(lsum[slot] / static_cast<double>(lcnt[slot]),
                               static_cast<int>(l));
            seen |= 1ULL << l;
          }
          if (means.size() < 2) continue;
          // ordinal treatment along the mean-residual order is least-squares
          // optimal over all level subsets
          std::sort(means.begin(), means.end());
          std::int64_t cum_n = 0;
          double cum_s = 0.0;
          std::uint64_t mask = 0;
          for (std::size_t k = 0; k + 1 < means.size(); ++k) {
            const auto l = static_cast<std::size_t>(means[k].second);
            cum_n += lcnt[i * n_levels + l];
            cum_s += lsum[i * n_levels + l];
            mask |= 1ULL << l;
            const std::int64_t n_r = s.count - cum_n;
            if (cum_n < params.min_node || n_r < params.min_node) continue;
            const double s_r = s.sum_r - cum_s;
            const double gain = cum_s * cum_s / static_cast<double>(cum_n) +
                                s_r * s_r / static_cast<double>(n_r) -
                                parent_term[i];
            SplitCandidate& best = out[i];
            if (gain > best.gain) {
              best.gain = gain;
              best.feature = f;
              best.categorical = true;
              best.left_mask = mask;
              best.seen_mask = seen;
            }
          }
        }
      }
    });

    std::vector<SplitCandidate> chosen(static_cast<std::size_t>(n_level));
    for (int f = 0; f < n_features; ++f)
      for (std::size_t i = 0; i < static_cast<std::size_t>(n_level); ++i)
        if (cand[static_cast<std::size_t>(f)][i].gain > chosen[i].gain)
          chosen[i] = cand[static_cast<std::size_t>(f)][i];

    std::vector<std::int32_t> first_child(static_cast<std::size_t>(n_level),
                                          -1);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n_level); ++i) {
      const SplitCandidate& c = chosen[i];
      const auto node = static_cast<std::size_t>(level_begin) + i;
      if (c.feature < 0 || !(c.gain > gain_tolerance(stats[node].sum_r2)))
        continue;
      const auto child = static_cast<std::int32_t>(nodes.size());
      first_child[i] = child;
      nodes.resize(nodes.size() + 2);
      stats.resize(stats.size() + 2);
      TreeNode& nd = nodes[node];
      nd.feature = c.feature;
      nd.categorical = c.categorical;
      nd.threshold = c.threshold;
      nd.left_mask = c.left_mask;
      nd.seen_mask = c.seen_mask;
      nd.left = child;
      nd.right = child + 1;
      nd.improvement = c.gain;
    }
    if (nodes.size() == static_cast<std::size_t>(level_end)) break;

    for (std::int64_t r = 0; r < n; ++r) {
      const std::int32_t node = position[static_cast<std::size_t>(r)];
      if (node < level_begin) continue;
      const auto i = static_cast<std::size_t>(node - level_begin);
      if (first_child[i] < 0) continue;
      const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
      bool go_left;
      if (nd.categorical) {
        const std::uint64_t bit =
            1ULL << static_cast<std::uint32_t>(
                cohort.categorical_cell(nd.feature, r));
        go_left = (nd.left_mask & bit) != 0;
      } else {
        go_left = cohort.numeric_cell(nd.feature, r) <= nd.threshold;
      }
      const std::int32_t child = go_left ? nd.left : nd.right;
      position[static_cast<std::size_t>(r)] = child;
      NodeStats& s = stats[static_cast<std::size_t>(child)];
      const double res = residuals[static_cast<std::size_t>(r)];
      s.count += 1;
      s.sum_r += res;
      s.sum_h += hessians[static_cast<std::size_t>(r)];
      s.sum_r2 += res * res;
    }

    level_begin = level_end;
    level_end = static_cast<std::int32_t>(nodes.size());
  }

  for (std::size_t i = 0; i < nodes.size(); ++i)
    nodes[i].value = stats[i].sum_r / (stats[i].sum_h + kNewtonEps);

  return RegressionTree(to_preorder(nodes));
}

RegressionTree fit_regression_tree(const Cohort& features,
                                   const std::vector<std::uint32_t>& rows,
                                   const std::vector<double>& residuals,
                                   const std::vector<double>& hessians,
                                   const TreeFitParams& params) {
  if (residuals.size() != rows.size() || hessians.size() != rows.size())
    fail(Errc::invalid_config, "tree: arrays must align with rows");
  const auto n = static_cast<std::size_t>(features.n_rows());
  std::vector<double> r_full(n, 0.0), h_full(n, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    r_full[rows[i]] = residuals[i];
    h_full[rows[i]] = hessians[i];
  }
  TreeFitWorkspace ws(features);
  return fit_regression_tree(ws, rows, r_full, h_full, params);
}

}  // namespace stemboost
