#pragma once

#include <cstdint>
#include <vector>

#include "stemboost/cohort.hpp"

namespace stemboost {

// Nodes are stored in preorder; feature == -1 marks a leaf. Numeric rules
// route value <= threshold left. Categorical rules route by level bitmask:
// left_mask holds the left-going levels, seen_mask every level present at
// the node during fitting. Levels absent from seen_mask route right (strict
// prediction raises UnknownLevel instead).
struct TreeNode {
  int feature = -1;
  bool categorical = false;
  double threshold = 0.0;
  std::uint64_t left_mask = 0;
  std::uint64_t seen_mask = 0;
  int left = -1;
  int right = -1;
  double value = 0.0;        // Newton value of the node's rows
  double improvement = 0.0;  // residual-SSE reduction of the split; 0 at leaves
};

struct TreeFitParams {
  int max_depth = 3;
  int min_node = 10;               // minimum rows per child
  std::vector<int> feature_subset; // empty = all features
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int depth() const;
  std::int64_t n_leaves() const;

  // num(feature) -> double and cat(feature) -> level index supply the row.
  template <class NumericAt, class CategoricalAt>
  double predict_row(NumericAt&& num, CategoricalAt&& cat, bool strict,
                     std::uint64_t& unseen_levels) const {
    int idx = 0;
    while (nodes_[static_cast<std::size_t>(idx)].feature >= 0) {
      const TreeNode& nd = nodes_[static_cast<std::size_t>(idx)];
      bool go_left;
      if (nd.categorical) {
        const std::uint64_t bit =
            1ULL << static_cast<std::uint32_t>(cat(nd.feature));
        if ((nd.seen_mask & bit) == 0) {
          if (strict)
            fail(Errc::unknown_level,
                 "predict: categorical level unseen at fit time");
          ++unseen_levels;
          go_left = false;
        } else {
          go_left = (nd.left_mask & bit) != 0;
        }
      } else {
        go_left = num(nd.feature) <= nd.threshold;
      }
      idx = go_left ? nd.left : nd.right;
    }
    return nodes_[static_cast<std::size_t>(idx)].value;
  }

  double predict_cohort_row(const Cohort& rows, std::int64_t row, bool strict,
                            std::uint64_t& unseen_levels) const;

 private:
  std::vector<TreeNode> nodes_;
};

// Presorted per-feature row orders over one cohort view, built once and
// reused across boosting iterations so each tree costs one pass per depth
// level instead of a sort per node. Immutable after construction.
class TreeFitWorkspace {
 public:
  explicit TreeFitWorkspace(const Cohort& cohort);

  const Cohort& cohort() const { return *cohort_; }
  std::int64_t n_rows() const { return cohort_->n_rows(); }
  const std::vector<std::uint32_t>& sorted_order(int feature) const {
    return sorted_[static_cast<std::size_t>(feature)];
  }

 private:
  const Cohort* cohort_ = nullptr;
  std::vector<std::vector<std::uint32_t>> sorted_;  // empty for categorical
};

// Exact greedy least-squares fit to `residuals` on the rows in `rows`
// (a subset of the workspace cohort); leaf values use the Newton rule
// sum(residuals) / (sum(hessians) + 1e-12). Arrays span the full cohort,
// indexed by absolute row id.
RegressionTree fit_regression_tree(const TreeFitWorkspace& ws,
                                   const std::vector<std::uint32_t>& rows,
                                   const std::vector<double>& residuals,
                                   const std::vector<double>& hessians,
                                   const TreeFitParams& params);

// Convenience form: residuals[i] and hessians[i] belong to rows[i].
RegressionTree fit_regression_tree(const Cohort& features,
                                   const std::vector<std::uint32_t>& rows,
                                   const std::vector<double>& residuals,
                                   const std::vector<double>& hessians,
                                   const TreeFitParams& params);

}  // namespace stemboost
