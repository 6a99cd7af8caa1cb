// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bp/folds.hpp"
#include "bp/head.hpp"

namespace bp {

struct SweepRow {
  double threshold = 0.0;
  std::optional<double> auroc;  // nullopt when the candidate was skipped
  std::string note;
};

struct SweepResult {
  double best_threshold = 0.0;
  std::vector<SweepRow> table;  // in candidate order
};

/// For each SNP threshold: relabel, train on the complement of fold 0 and
/// score patient-level AUROC on fold 0. Returns the argmax, ties toward the
/// smaller threshold. Candidates leaving MSI_1 or MSI_2 empty in training
/// are skipped; if every candidate is skipped the sweep fails.
SweepResult sweep_snp_threshold(std::shared_ptr<const Cohort> cohort,
                                std::span<const double> candidates, const FoldPlan& plan,
                                const TrainConfig& cfg, int jobs = 1);

/// "lo:hi:step" (inclusive) or a comma-separated list.
/// CSV threshold,val_auroc,note; skipped candidates show NA.
void write_sweep_table(const SweepResult& sweep, const std::filesystem::path& path);

std::vector<double> parse_candidates(std::string_view text);

inline std::vector<double> default_snp_candidates() {
  return {800, 900, 1000, 1100, 1200, 1300, 1400, 1500};
}

}  // namespace bp
