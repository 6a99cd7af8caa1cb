// SPDX-License-Identifier: Apache-2.0
#include "bp/reproduce.hpp"

#include <sstream>

#include "bp/error.hpp"
#include "bp/model_dir.hpp"
#include "bp/util.hpp"

namespace bp {

TrainConfig synthetic_train_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.learning_rate = 1.5e-4;
  cfg.seed = seed;
  return cfg;
}

TrainConfig synthetic_fusion_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.hidden_dims = {16};
  cfg.learning_rate = 1e-2;
  cfg.seed = seed;
  return cfg;
}

GeneratorConfig sweep_generator_config(std::uint64_t seed) {
  GeneratorConfig g;
  g.n_train_msi = 200;
  g.n_train_mss = 400;
  g.n_test_msi = 10;
  g.n_test_mss = 10;
  g.class_separation = 0.0;
  g.link = {.snp = true, .cimp = false, .cnv = false};
  g.msi_snp_low_median = 700.0;
  g.msi_snp_high_median = 1400.0;
  g.msi_snp_log_sd = 0.25;
  g.seed = seed;
  return g;
}

TrainConfig sweep_train_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.learning_rate = 5e-5;
  cfg.seed = seed;
  return cfg;
}

SyntheticRun run_synthetic(std::uint64_t seed, int jobs) {
  SyntheticRun run;
  run.seed = seed;
  GeneratorConfig g;
  g.seed = seed;
  run.cohort = std::make_shared<const Cohort>(generate(g));

  const auto experiment = [&](const char* name, const LabelingSpec& spec) {
    ExperimentConfig ec;
    ec.name = name;
    ec.spec = spec;
    ec.fold_seed = seed;
    ec.train = synthetic_train_config(seed);
    ec.jobs = jobs;
    return run_experiment(run.cohort, ec);
  };
  run.snp = experiment("snp", LabelingSpec::snp(g.snp_split));
  run.cimp = experiment("cimp", LabelingSpec::cimp(true));
  run.cnv = experiment("cnv", LabelingSpec::cnv(g.cnv_split));
  run.combined = run_combined(run.snp, run.cimp, synthetic_fusion_config(seed), jobs);

  auto sweep_cohort = std::make_shared<const Cohort>(generate(sweep_generator_config(seed)));
  const auto plan = make_folds(relabel(sweep_cohort, LabelingSpec::baseline()), 5, seed);
  const auto candidates = default_snp_candidates();
  run.sweep = sweep_snp_threshold(sweep_cohort, candidates, plan, sweep_train_config(seed), jobs);
  return run;
}

namespace {

nlohmann::json experiment_summary(const ExperimentResult& r) {
  const auto* p = r.focus.report.find_paired("baseline", "auroc");
  return {{"labeling", r.focus.report.labeling},
          {"auroc", r.focus.report.auroc.interval.mean},
          {"baseline_auroc", r.baseline.report.auroc.interval.mean},
          {"auroc_gain", r.focus.report.auroc.interval.mean - r.baseline.report.auroc.interval.mean},
          {"p_vs_baseline", p ? p->test.p : 1.0}};
}

}  // namespace

nlohmann::json synthetic_summary(const SyntheticRun& run) {
  nlohmann::json combined{{"auroc", run.combined.report.auroc.interval.mean}};
  for (const auto& c : run.combined.report.paired) {
    if (c.metric == "auroc") combined["p_vs_" + c.comparator] = c.test.p;
  }
  nlohmann::json table = nlohmann::json::array();
  for (const auto& row : run.sweep.table) {
    table.push_back({{"threshold", row.threshold},
                     {"auroc", row.auroc ? nlohmann::json(*row.auroc) : nlohmann::json(nullptr)}});
  }
  return {{"seed", run.seed},
          {"toolkit_version", kToolkitVersion},
          {"snp", experiment_summary(run.snp)},
          {"cimp", experiment_summary(run.cimp)},
          {"cnv", experiment_summary(run.cnv)},
          {"combined", combined},
          {"sweep", {{"best_threshold", run.sweep.best_threshold}, {"table", table}}}};
}

void write_synthetic(const SyntheticRun& run, const std::filesystem::path& dir) {
  const Cohort& cohort = *run.cohort;
  std::filesystem::create_directories(dir / "cohort");
  write_manifest(cohort, dir / "cohort" / "manifest.csv");
  write_embeddings(cohort.embeddings(), dir / "cohort" / "embeddings.bpem", EmbeddingFormat::kPacked);

  for (const auto* r : {&run.snp, &run.cimp, &run.cnv}) {
    const auto base = dir / r->focus.name;
    write_model_dir(base / "models", r->labeled.spec, r->plan, cohort, r->focus.models);
    write_model_dir(base / "baseline", LabelingSpec::baseline(), r->plan, cohort, r->baseline.models);
    write_report(r->focus.report, base / "report", r->focus.name);
    write_report(r->baseline.report, base / "report", "baseline");
  }
  const auto fusion_dir = dir / "combined";
  std::filesystem::create_directories(fusion_dir);
  for (std::size_t f = 0; f < run.combined.models.size(); ++f) {
    save_fusion(run.combined.models[f], fusion_dir / ("fusion_fold" + std::to_string(f) + ".json"));
  }
  write_report(run.combined.report, fusion_dir / "report", "combined");

  std::filesystem::create_directories(dir / "sweep");
  write_sweep_table(run.sweep, dir / "sweep" / "sweep.csv");
  write_file(dir / "summary.json", synthetic_summary(run).dump(1) + "\n");
}

}  // namespace bp
