#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stemboost/common.hpp"

namespace stemboost {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0,0) to (1,1), fpr/tpr non-decreasing
  double auc = 0.0;
};

// Threshold sweep over distinct scores, descending; tied scores collapse to
// one point. Classification rule everywhere: score >= threshold is positive.
// Trapezoidal AUC over integer counts, so it equals the pair-counting value
// exactly. Labels must be 0/1 with both classes present.
RocCurve roc_curve(const std::vector<double>& labels,
                   const std::vector<double>& scores);

// Exhaustive Mann-Whitney count: (concordant + ties/2) / (n1*n0).
double auc_pair_oracle(const std::vector<double>& labels,
                       const std::vector<double>& scores);

struct Confusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
  double sensitivity = 0.0;  // 0 when the class is absent
  double specificity = 0.0;
};

Confusion confusion_at(const std::vector<double>& labels,
                       const std::vector<double>& scores, double threshold);

std::string roc_to_csv(const RocCurve& curve);
std::string roc_to_svg(const RocCurve& curve, const std::string& title);

}  // namespace stemboost
