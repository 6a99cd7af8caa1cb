// SPDX-License-Identifier: Apache-2.0
//
// Patient-level genomics of patches grouped by their patch-level outcome
// (TP/FN/FP/TN with MSI positive).
#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bp/head.hpp"
#include "bp/labeling.hpp"
#include "bp/stats.hpp"

namespace bp {

enum class Outcome { kTp = 0, kFn = 1, kFp = 2, kTn = 3 };
std::string_view to_string(Outcome o);

struct OutcomeProfile {
  Outcome outcome = Outcome::kTp;
  std::size_t n_patches = 0;
  std::optional<FiveNumber> snp;
  /// CIMP_H, CIMP_LOW, NON_CIMP, NA; all zero when the category is empty.
  std::array<double, 4> cimp_proportions{};
  std::optional<FiveNumber> cnv;
  bool empty = true;
};

struct MisclassificationProfile {
  double threshold = 0.5;
  std::array<OutcomeProfile, 4> categories;
  std::vector<std::string> flags;
};

/// `preds` must cover every patch it names; patches not present are
/// ignored. A patch is predicted MSI iff its MSI probability >= threshold.
MisclassificationProfile misclassification_profile(const LabeledCohort& labeled,
                                                   std::span<const PatchPrediction> preds,
                                                   std::size_t n_classes, double threshold);

/// CSV with one row per category.
void write_profile(const MisclassificationProfile& profile, std::ostream& out);

}  // namespace bp
