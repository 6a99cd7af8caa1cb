// SPDX-License-Identifier: Apache-2.0
//
// Cross-validated experiment: stratified folds on the primed labels, one
// primed head and one matched baseline head per fold trained on identical
// patients, both scored on the TEST split.
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bp/combiner.hpp"
#include "bp/evaluation.hpp"
#include "bp/head.hpp"
#include "bp/labeling.hpp"

namespace bp {

struct ExperimentConfig {
  std::string name = "bp";
  LabelingSpec spec;
  int k = 5;
  std::uint64_t fold_seed = 0;
  TrainConfig train;
  int jobs = 1;
};

struct ModelRun {
  std::string name;
  std::vector<HeadModel> models;  // indexed by fold
  std::vector<FoldScores> scores;
  EvaluationReport report;
};

struct ExperimentResult {
  LabeledCohort labeled;
  LabeledCohort baseline_labeled;
  FoldPlan plan;
  ModelRun focus;
  ModelRun baseline;
};

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

/// Trains the per-fold models of one labeling on a fixed plan. Training
/// patients are the fold complement minus `exclusions`.
std::vector<HeadModel> train_folds(const LabeledCohort& labeled, const FoldPlan& plan,
                                   const TrainConfig& cfg, const LabeledCohort& exclusions,
                                   int jobs);

ExperimentResult run_experiment(std::shared_ptr<const Cohort> cohort, const ExperimentConfig& cfg);

struct CombinedResult {
  std::vector<FusionModel> models;
  std::vector<FoldScores> scores;
  EvaluationReport report;
};

/// Fusion of two experiments run on the same cohort. The fusion for fold f
/// is trained on out-of-fold source probabilities: every TRAIN patient is
/// scored by the source models of whichever fold held it out. Fold f of
/// `a`'s plan is the fusion's validation set; at test time fold f uses
/// a.focus.models[f] and b.focus.models[f].
CombinedResult run_combined(const ExperimentResult& a, const ExperimentResult& b,
                            const TrainConfig& fusion_cfg, int jobs = 1);

}  // namespace bp
