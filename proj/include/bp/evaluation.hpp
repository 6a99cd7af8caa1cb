// SPDX-License-Identifier: Apache-2.0
//
// Per-fold test evaluation and the report that aggregates it.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "bp/aggregation.hpp"
#include "bp/folds.hpp"
#include "bp/metrics.hpp"
#include "bp/stats.hpp"

namespace bp {

inline constexpr int kReportSchemaVersion = 1;

/// Patient scores produced by one fold's model.
struct FoldScores {
  int fold = 0;
  std::vector<PatientScore> test;
  std::vector<bool> test_positive;
  std::vector<Scored> validation;

  std::vector<Scored> test_scored() const;
};

struct FoldEvaluation {
  int fold = 0;
  double auroc = 0, ap = 0, f1 = 0, precision = 0, recall = 0;
  Confusion confusion;
  std::vector<CurvePoint> roc;
  std::vector<CurvePoint> pr;
  std::vector<PatientScore> test_scores;
  std::vector<bool> test_positive;
  bool operator==(const FoldEvaluation&) const = default;
};

struct MetricSummary {
  std::vector<double> per_fold;
  MeanInterval interval;  // mean, sample sd, 95% t-interval
  bool operator==(const MetricSummary&) const = default;
};

struct PairedComparison {
  std::string comparator;
  std::string metric;
  PairedTTest test;
  bool operator==(const PairedComparison&) const = default;
};

struct EvaluationReport {
  int schema_version = kReportSchemaVersion;
  std::string model;
  std::string labeling;
  std::vector<FoldEvaluation> folds;
  MetricSummary auroc, ap, f1;
  MeanCurve roc_mean, pr_mean;
  Confusion mean_confusion;
  double f1_threshold = 0.0;
  double f1_threshold_validation_f1 = 0.0;
  bool f1_threshold_degenerate = false;
  std::vector<PairedComparison> paired;
  std::vector<std::string> flags;
  bool operator==(const EvaluationReport&) const = default;

  const PairedComparison* find_paired(std::string_view comparator, std::string_view metric) const;
};

/// The F1 threshold is selected on validation scores pooled over folds and
/// then applied to every fold's test scores.
EvaluationReport build_report(const std::string& model, const std::string& labeling,
                              std::span<const FoldScores> folds);

/// Paired t-tests on AUROC, AP and F1, pairing fold i with fold i.
void add_paired_tests(EvaluationReport& report, const EvaluationReport& comparator,
                      const std::string& comparator_name);

/// Scores one fold's model on the TEST split and on the fold's validation
/// patients.
FoldScores score_fold(const HeadModel& model, const Cohort& cohort, const FoldPlan& plan,
                      int fold);

nlohmann::json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& j);

/// Writes `<stem>.json` plus `<stem>_roc_fold<i>.csv`, `<stem>_pr_fold<i>.csv`,
/// `<stem>_roc_mean.csv`, `<stem>_pr_mean.csv` and `<stem>_scores.csv`.
void write_report(const EvaluationReport& report, const std::filesystem::path& dir,
                  const std::string& stem);

}  // namespace bp
