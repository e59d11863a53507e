#include "stemboost/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stemboost/svg.hpp"

namespace stemboost {

namespace {

void check_binary(const std::vector<double>& labels,
                  const std::vector<double>& scores, const char* where) {
  if (labels.size() != scores.size())
    fail(Errc::invalid_config, std::string(where) + ": length mismatch");
  if (labels.empty())
    fail(Errc::insufficient_rows, std::string(where) + ": empty input");
  for (double v : labels)
    if (v != 0.0 && v != 1.0)
      fail(Errc::invalid_target, std::string(where) + ": labels must be 0/1");
}

std::pair<std::int64_t, std::int64_t> class_counts(
    const std::vector<double>& labels, const char* where) {
  std::int64_t n1 = 0;
  for (double v : labels) n1 += v == 1.0;
  const auto n0 = static_cast<std::int64_t>(labels.size()) - n1;
  if (n1 == 0 || n0 == 0)
    fail(Errc::single_class, std::string(where) + ": both classes required");
  return {n1, n0};
}

}  // namespace

RocCurve roc_curve(const std::vector<double>& labels,
                   const std::vector<double>& scores) {
  check_binary(labels, scores, "roc_curve");
  const auto [n1, n0] = class_counts(labels, "roc_curve");

  std::vector<std::uint32_t> order(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = static_cast<std::uint32_t>(i);
  std::sort(order.begin(), order.end(),
            [&scores](std::uint32_t a, std::uint32_t b) {
              if (scores[a] != scores[b]) return scores[a] > scores[b];
              return a < b;
            });

  RocCurve curve;
  curve.points.push_back(
      {0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::int64_t tp = 0, fp = 0, prev_tp = 0, prev_fp = 0;
  // trapezoid area accumulated in integer count units (exact in doubles)
  double area2 = 0.0;  // twice the area, in units of n1*n0
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (labels[order[i]] == 1.0) ++tp;
      else ++fp;
      ++i;
    }
    area2 += static_cast<double>(fp - prev_fp) *
             static_cast<double>(tp + prev_tp);
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(n0),
                            static_cast<double>(tp) / static_cast<double>(n1),
                            s});
    prev_tp = tp;
    prev_fp = fp;
  }
  curve.auc = area2 / (2.0 * static_cast<double>(n1) *
                       static_cast<double>(n0));
  return curve;
}

double auc_pair_oracle(const std::vector<double>& labels,
                       const std::vector<double>& scores) {
  check_binary(labels, scores, "auc_pair_oracle");
  const auto [n1, n0] = class_counts(labels, "auc_pair_oracle");
  double count = 0.0;  // concordant + half ties, exact for desk-scale n
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1.0) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0.0) continue;
      if (scores[i] > scores[j]) count += 1.0;
      else if (scores[i] == scores[j]) count += 0.5;
    }
  }
  return count / (static_cast<double>(n1) * static_cast<double>(n0));
}

Confusion confusion_at(const std::vector<double>& labels,
                       const std::vector<double>& scores, double threshold) {
  check_binary(labels, scores, "confusion_at");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool positive = scores[i] >= threshold;
    if (labels[i] == 1.0) {
      positive ? ++c.tp : ++c.fn;
    } else {
      positive ? ++c.fp : ++c.tn;
    }
  }
  if (c.tp + c.fn > 0)
    c.sensitivity =
        static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (c.tn + c.fp > 0)
    c.specificity =
        static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  return c;
}

std::string roc_to_csv(const RocCurve& curve) {
  std::string out = "fpr,tpr,threshold\n";
  for (const RocPoint& p : curve.points) {
    out += format_double(p.fpr);
    out += ',';
    out += format_double(p.tpr);
    out += ',';
    out += format_double(p.threshold);
    out += '\n';
  }
  return out;
}

std::string roc_to_svg(const RocCurve& curve, const std::string& title) {
  svg::Canvas canvas(420, 400);
  svg::Plot plot(420, 400, 0.0, 1.0, 0.0, 1.0);
  plot.draw_axes(canvas, 6, 6, title, "false positive rate",
                 "true positive rate");
  canvas.line(plot.px(0), plot.py(0), plot.px(1), plot.py(1), "#999999", 1.0,
              true);
  std::vector<std::pair<double, double>> pts;
  pts.reserve(curve.points.size());
  for (const RocPoint& p : curve.points)
    pts.emplace_back(plot.px(p.fpr), plot.py(p.tpr));
  canvas.polyline(pts, "#1f6fb2", 2.0);
  canvas.text(plot.px(0.62), plot.py(0.08),
              "AUC = " + svg::tick_label(curve.auc), 12);
  return canvas.str();
}

}  // namespace stemboost
