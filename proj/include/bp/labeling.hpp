// SPDX-License-Identifier: Apache-2.0
//
// Sub-class label generation. An MSI patient whose selected genomic feature
// is strictly above the threshold becomes MSI_2, otherwise MSI_1; MSS
// patients keep MSS. Labels are patient-level and inherited by every patch.
#pragma once

#include <array>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bp/cohort.hpp"

namespace bp {

enum class Variant { kBaseline, kSnp, kCimp, kCnv };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view token);  // case-insensitive

/// For CIMP, MSI_1 is MSI-non-CIMP-H and MSI_2 is MSI-CIMP-H.
enum class SubLabel { kMss = 0, kMsi1 = 1, kMsi2 = 2 };

std::string_view to_string(SubLabel s);
std::optional<SubLabel> parse_sublabel(std::string_view token);

inline constexpr double kDefaultSnpThreshold = 1200.0;
inline constexpr double kDefaultCnvThreshold = 0.005;

struct LabelingSpec {
  Variant variant = Variant::kBaseline;
  std::optional<double> threshold;
  bool exclude_mss_cimp_h_from_train = false;

  static LabelingSpec baseline() { return {}; }
  static LabelingSpec snp(double threshold) { return {Variant::kSnp, threshold, false}; }
  static LabelingSpec cimp(bool exclude = true) { return {Variant::kCimp, std::nullopt, exclude}; }
  static LabelingSpec cnv(double threshold = kDefaultCnvThreshold) {
    return {Variant::kCnv, threshold, false};
  }

  /// Throws a usage error when the threshold rules are broken.
  void validate() const;
  std::size_t n_classes() const { return variant == Variant::kBaseline ? 2 : 3; }
  std::string describe() const;

  bool operator==(const LabelingSpec&) const = default;
};

struct LabeledCohort {
  std::shared_ptr<const Cohort> base;
  LabelingSpec spec;
  /// Parallel to base->patients(); nullopt exactly for excluded patients.
  std::vector<std::optional<SubLabel>> sublabels;
  std::set<std::string> excluded_train_patients;

  const Cohort& cohort() const { return *base; }
  bool excluded(PatientIndex i) const { return !sublabels.at(i).has_value(); }
  std::size_t n_classes() const { return spec.n_classes(); }
};

LabeledCohort relabel(std::shared_ptr<const Cohort> cohort, const LabelingSpec& spec);

struct ClassCount {
  std::size_t patients = 0;
  std::size_t patches = 0;
  bool operator==(const ClassCount&) const = default;
};

/// Indexed by SubLabel. Excluded patients are not counted.
using ClassCounts = std::array<ClassCount, 3>;

ClassCounts class_counts(const LabeledCohort& labeled, Split split);

/// Sub-label CSV `patient_id,sublabel,excluded`; excluded rows carry `NA`.
void write_sublabels(const LabeledCohort& labeled, std::ostream& out);

}  // namespace bp
