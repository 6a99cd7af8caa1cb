// SPDX-License-Identifier: Apache-2.0
//
// Binary ranking metrics over scored items; MSI is the positive class.
#pragma once

#include <array>
#include <span>
#include <vector>

namespace bp {

struct Scored {
  double score = 0.0;
  bool positive = false;
};

/// Probability that a random positive outranks a random negative, ties
/// counted one half. Throws a degeneracy error unless both classes appear.
double auroc(std::span<const Scored> items);

/// Non-interpolated step sum over the descending ranking; tied scores form
/// one step. Throws when there are no positives.
double average_precision(std::span<const Scored> items);

struct Confusion {
  double tp = 0, fp = 0, fn = 0, tn = 0;
  double total() const { return tp + fp + fn + tn; }
  bool operator==(const Confusion&) const = default;
};

struct F1Result {
  double f1 = 0, precision = 0, recall = 0;
  Confusion confusion;
};

/// Predicted positive iff score >= threshold. Undefined ratios are 0.
F1Result f1_at_threshold(std::span<const Scored> items, double threshold);

struct ThresholdChoice {
  double threshold = 0.0;
  double mean_f1 = 0.0;
  bool degenerate = false;  // fewer than two distinct scores across folds
};

/// Argmax over candidate thresholds of the mean F1 across folds; ties go
/// to the smaller threshold. Candidates are {0, 1} plus the midpoints
/// between adjacent distinct pooled scores.
ThresholdChoice select_f1_threshold(std::span<const std::vector<Scored>> folds);

struct CurvePoint {
  double x = 0, y = 0;
  bool operator==(const CurvePoint&) const = default;
};

/// (FPR, TPR) from (0,0) to (1,1), one point per distinct threshold.
std::vector<CurvePoint> roc_curve(std::span<const Scored> items);
/// (recall, precision), one point per ranked step.
std::vector<CurvePoint> pr_curve(std::span<const Scored> items);
double trapezoid_area(std::span<const CurvePoint> curve);

inline constexpr std::size_t kCurveGridPoints = 101;

struct MeanCurve {
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
  bool operator==(const MeanCurve&) const = default;
};

/// Vertical averaging on a fixed grid; band is mean +- 1.96 sd/sqrt(n),
/// clipped to [0, 1]. ROC curves are interpolated linearly in FPR; PR
/// curves use the interpolated precision max{p : recall >= r}.
MeanCurve mean_roc(std::span<const std::vector<CurvePoint>> curves);
MeanCurve mean_pr(std::span<const std::vector<CurvePoint>> curves);
double interpolate_roc(std::span<const CurvePoint> roc, double fpr);
double interpolate_pr(std::span<const CurvePoint> pr, double recall);

}  // namespace bp
