// SPDX-License-Identifier: Apache-2.0
//
// Patch-to-patient scores. A patch's MSI probability is the MSI entry of a
// two-class head, or max(MSI_1, MSI_2) of a three-class head; the patient
// score is the arithmetic mean over the patient's patches.
#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bp/head.hpp"

namespace bp {

struct PatientScore {
  std::string patient_id;
  double p_msi = 0.0;
  std::size_t n_patches = 0;
  bool operator==(const PatientScore&) const = default;
};

double patch_msi_probability(std::span<const double> probs, std::size_t n_classes);
double patch_msi_probability(const PatchPrediction& pred, std::size_t n_classes);

PatientScore aggregate_patient(const std::string& patient_id,
                               std::span<const PatchPrediction> preds, std::size_t n_classes);

/// Mean of already-merged patch MSI probabilities.
PatientScore aggregate_probabilities(const std::string& patient_id,
                                     std::span<const double> patch_msi);

/// Runs the model on every patch of each listed patient.
std::vector<PatientScore> score_patients(const HeadModel& model, const Cohort& cohort,
                                         std::span<const PatientIndex> patients);

/// Scores CSV `patient_id,p_msi,n_patches`.
void write_scores(std::span<const PatientScore> scores, std::ostream& out);

}  // namespace bp
