// SPDX-License-Identifier: Apache-2.0
//
// The seeded end-to-end synthetic experiment. One root seed fixes the
// cohort, the fold plans and every trainer.
#pragma once

#include <cstdint>
#include <filesystem>

#include "bp/experiment.hpp"
#include "bp/sweep.hpp"
#include "bp/synth.hpp"

namespace bp {

/// Head training used by the synthetic SNP, CIMP and CNV experiments.
TrainConfig synthetic_train_config(std::uint64_t seed);
/// Fusion head training (hidden [16]).
TrainConfig synthetic_fusion_config(std::uint64_t seed);

/// Cohort for threshold recovery: larger TRAIN split, SNP counts dense
/// around the planted split, no class offset so sub-class modes carry the
/// signal.
GeneratorConfig sweep_generator_config(std::uint64_t seed);
TrainConfig sweep_train_config(std::uint64_t seed);

struct SyntheticRun {
  std::uint64_t seed = 0;
  std::shared_ptr<const Cohort> cohort;
  ExperimentResult snp;
  ExperimentResult cimp;
  ExperimentResult cnv;
  CombinedResult combined;
  SweepResult sweep;
};

SyntheticRun run_synthetic(std::uint64_t seed, int jobs = 1);

/// Headline numbers of a run as a JSON object.
nlohmann::json synthetic_summary(const SyntheticRun& run);

/// Writes cohort files, model directories, reports and curves under `dir`.
void write_synthetic(const SyntheticRun& run, const std::filesystem::path& dir);

}  // namespace bp
