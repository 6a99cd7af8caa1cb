// SPDX-License-Identifier: Apache-2.0
//
// On-disk layout of one trained set of fold models:
//   labeling.json          the labeling spec the heads were trained on
//   folds.csv              patient_id,fold
//   model_fold{i}.json     one head per fold
//   train_log_fold{i}.csv  epoch,val_auroc,best
#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "bp/folds.hpp"
#include "bp/head.hpp"
#include "bp/labeling.hpp"

namespace bp {

nlohmann::json labeling_to_json(const LabelingSpec& spec);
LabelingSpec labeling_from_json(const nlohmann::json& j);

std::filesystem::path model_path(const std::filesystem::path& dir, int fold);

void write_train_log(const HeadModel& model, const std::filesystem::path& path);

/// Writes labeling.json, folds.csv and every model in `models` that is
/// trained (n_classes > 0) for its fold index.
void write_model_dir(const std::filesystem::path& dir, const LabelingSpec& spec,
                     const FoldPlan& plan, const Cohort& cohort,
                     const std::vector<HeadModel>& models);

struct ModelDir {
  LabelingSpec spec;
  FoldPlan plan;
  std::vector<HeadModel> models;  // one per fold, all present
};

/// Reads a complete model directory. `plan_override`, when given, is used
/// instead of the directory's folds.csv.
ModelDir read_model_dir(const std::filesystem::path& dir, const Cohort& cohort,
                        const FoldPlan* plan_override = nullptr);

}  // namespace bp
