// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bp/labeling.hpp"

namespace bp {

/// Stratum of a TRAIN patient: its sub-label, or kExcluded for patients
/// removed from head training (they still rotate through validation).
enum class Stratum { kMss = 0, kMsi1 = 1, kMsi2 = 2, kExcluded = 3 };

std::string_view to_string(Stratum s);

struct FoldPlan {
  int k = 0;
  std::uint64_t seed = 0;
  Variant stratify_key = Variant::kBaseline;
  /// Parallel to the cohort's patients; -1 for TEST patients.
  std::vector<int> assignment;
  std::vector<std::string> flags;

  std::vector<PatientIndex> fold_patients(int fold) const;
  /// TRAIN patients outside `fold`, including excluded ones.
  std::vector<PatientIndex> training_patients(int fold) const;
};

Stratum stratum_of(const LabeledCohort& labeled, PatientIndex i);

/// Stratified assignment: each stratum is shuffled and dealt round-robin,
/// continuing from where the previous stratum stopped, so per-fold counts
/// of each stratum differ from the ideal by at most one.
FoldPlan make_folds(const LabeledCohort& labeled, int k, std::uint64_t seed);

/// Fold-plan CSV `patient_id,fold` for TRAIN patients.
void write_folds(const FoldPlan& plan, const Cohort& cohort, std::ostream& out);
FoldPlan read_folds(std::istream& in, const Cohort& cohort);

/// Removes patients excluded by the labeling from a patient list.
std::vector<PatientIndex> without_excluded(const LabeledCohort& labeled,
                                           std::span<const PatientIndex> patients);

}  // namespace bp
