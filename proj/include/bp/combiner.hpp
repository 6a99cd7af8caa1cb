// SPDX-License-Identifier: Apache-2.0
//
// Fusion of two three-class heads: per patch, the probabilities of model A
// then model B ([MSS, MSI_1, MSI_2] each) feed a small two-class MLP whose
// patch MSI probabilities are averaged per patient.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "bp/aggregation.hpp"
#include "bp/head.hpp"
#include "bp/labeling.hpp"
#include "bp/trainer.hpp"

namespace bp {

inline constexpr std::size_t kFusionInputDim = 6;

struct SourceModelRef {
  std::string name;
  std::string sha256;  // of the serialized model document
  bool operator==(const SourceModelRef&) const = default;
};

struct FusionModel {
  HeadModel head;
  SourceModelRef source_a;
  SourceModelRef source_b;
  bool operator==(const FusionModel&) const = default;
};

struct FusionRow {
  std::array<double, kFusionInputDim> x{};
  bool msi = false;
  PatientIndex patient = 0;
};

std::array<double, kFusionInputDim> fusion_input(const HeadModel& a, const HeadModel& b,
                                                 std::span<const float> patch);

/// One row per patch of each listed patient, labeled by base MSI status.
std::vector<FusionRow> build_fusion_dataset(const HeadModel& model_a, const HeadModel& model_b,
                                            const LabeledCohort& labeled_a,
                                            const LabeledCohort& labeled_b,
                                            std::span<const PatientIndex> patients);

/// Trains on rows whose patient is in `train_patients`, checkpoints on
/// patient-level AUROC of rows whose patient is in `val_patients`.
FusionModel train_fusion(std::span<const FusionRow> dataset,
                         std::span<const PatientIndex> train_patients,
                         std::span<const PatientIndex> val_patients, const TrainConfig& cfg,
                         int fold = 0);

std::vector<PatientScore> predict_fusion(const FusionModel& model, const HeadModel& model_a,
                                         const HeadModel& model_b, const Cohort& cohort,
                                         std::span<const PatientIndex> patients);

/// Source-model digest used in fusion provenance.
SourceModelRef describe_source(const std::string& name, const HeadModel& model);

nlohmann::json fusion_to_json(const FusionModel& model);
FusionModel fusion_from_json(const nlohmann::json& j);
void save_fusion(const FusionModel& model, const std::filesystem::path& path);
FusionModel load_fusion(const std::filesystem::path& path);

}  // namespace bp
