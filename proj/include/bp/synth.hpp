// SPDX-License-Identifier: Apache-2.0
//
// Seeded synthetic cohorts in which genomic sub-class membership shifts the
// patch feature distribution.
//
// Generative model
//   - MSS mean is the origin; MSI mean is class_separation * e0.
//   - Each linked feature f (SNP, CIMP, CNV) owns a direction e_f (e1, e2,
//     e3, wrapping within 1..d-1). An MSI patient in sub-class MSI_2 for f
//     is displaced by +subclass_separation/2 * e_f, in MSI_1 by -1/2 of it.
//   - MSI SNP counts are a two-component log-normal mixture; the sub-class
//     is snp > snp_split. CIMP-H is Bernoulli; the CNV sub-class is
//     cnv > cnv_split.
//   - A patient's centre adds N(0, patient_sd^2 I); its patches add
//     N(0, noise_sd^2 I) around the centre.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "bp/cohort.hpp"

namespace bp {

struct MorphologyLink {
  bool snp = true;
  bool cimp = true;
  bool cnv = false;
  bool operator==(const MorphologyLink&) const = default;
};

struct GeneratorConfig {
  // Patients per split and subtype (defaults are the published cohort).
  int n_train_msi = 39;
  int n_train_mss = 221;
  int n_test_msi = 26;
  int n_test_mss = 74;
  int patches_min = 20;
  int patches_max = 40;
  /// When set, exact patch totals per [split][msi_status] spread as evenly
  /// as possible over the group's patients; overrides patches_min/max.
  std::optional<std::array<std::array<std::int64_t, 2>, 2>> patch_totals;

  int dim = 16;
  double class_separation = 0.4;
  double subclass_separation = 2.5;
  MorphologyLink link;
  double noise_sd = 1.0;
  double patient_sd = 0.3;

  double snp_split = 1000.0;
  double msi_snp_low_median = 550.0;
  double msi_snp_high_median = 1900.0;
  double msi_snp_high_weight = 0.5;
  double msi_snp_log_sd = 0.45;
  double mss_snp_median = 120.0;
  double mss_snp_log_sd = 0.6;

  double cimp_h_prevalence_msi = 0.59;
  double cimp_h_prevalence_mss_train = 0.05;
  double cimp_h_prevalence_mss_test = 0.01;
  double cimp_low_fraction = 0.5;  // of non-CIMP-H patients

  double cnv_split = 0.005;
  double msi_cnv_median = 0.005;
  double msi_cnv_log_sd = 0.5;
  double mss_cnv_median = 0.12;
  double mss_cnv_log_sd = 1.0;

  std::uint64_t seed = 0;

  /// Throws a usage error on invalid settings.
  void validate() const;
  bool operator==(const GeneratorConfig&) const = default;
};

void to_json(nlohmann::json& j, const GeneratorConfig& c);
/// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, GeneratorConfig& c);

struct PlantedTruth {
  double snp_split = 0.0;
  double cnv_split = 0.0;
  std::size_t class_axis = 0;
  std::array<std::size_t, 3> feature_axis{};  // SNP, CIMP, CNV
  MorphologyLink link;
  double class_offset = 0.0;     // MSI mean along class_axis
  double subclass_offset = 0.0;  // +- this along a linked feature axis
};

PlantedTruth planted_truth(const GeneratorConfig& cfg);

/// Mean embedding of a patient with the given profile before patient and
/// patch noise.
std::vector<double> planted_mean(const GeneratorConfig& cfg, MsiStatus status,
                                 const GenomicProfile& genomic);

Cohort generate(const GeneratorConfig& cfg);

/// Published cohort layout: 260/100 patients with Fig. 1 patch totals.
GeneratorConfig published_layout_config();

}  // namespace bp
