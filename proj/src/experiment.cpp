// SPDX-License-Identifier: Apache-2.0
#include "bp/experiment.hpp"

#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "bp/error.hpp"
#include "bp/trainer.hpp"

namespace bp {

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (int w = 0; w < std::min(jobs, n); ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<HeadModel> train_folds(const LabeledCohort& labeled, const FoldPlan& plan,
                                   const TrainConfig& cfg, const LabeledCohort& exclusions,
                                   int jobs) {
  std::vector<HeadModel> models(static_cast<std::size_t>(plan.k));
  parallel_for(plan.k, jobs, [&](int f) {
    const auto train_patients = without_excluded(exclusions, plan.training_patients(f));
    models[static_cast<std::size_t>(f)] = train(labeled, train_patients, plan.fold_patients(f), cfg, f);
  });
  return models;
}

namespace {

ModelRun evaluate_run(std::string name, const std::string& labeling, std::vector<HeadModel> models,
                      const Cohort& cohort, const FoldPlan& plan, int jobs) {
  ModelRun run;
  run.name = std::move(name);
  run.scores.resize(models.size());
  parallel_for(static_cast<int>(models.size()), jobs, [&](int f) {
    run.scores[static_cast<std::size_t>(f)] = score_fold(models[static_cast<std::size_t>(f)], cohort, plan, f);
  });
  run.models = std::move(models);
  run.report = build_report(run.name, labeling, run.scores);
  return run;
}

}  // namespace

ExperimentResult run_experiment(std::shared_ptr<const Cohort> cohort, const ExperimentConfig& cfg) {
  if (!cohort || !cohort->has_embeddings()) throw usage_error("experiment requires a cohort with embeddings");
  if (cohort->patients_in(Split::kTest).empty()) throw usage_error("experiment requires TEST patients");
  ExperimentResult out;
  out.labeled = relabel(cohort, cfg.spec);
  out.baseline_labeled = relabel(cohort, LabelingSpec::baseline());
  out.plan = make_folds(out.labeled, cfg.k, cfg.fold_seed);

  // Both heads see identical training patients, exclusions included.
  auto focus = train_folds(out.labeled, out.plan, cfg.train, out.labeled, cfg.jobs);
  auto baseline = train_folds(out.baseline_labeled, out.plan, cfg.train, out.labeled, cfg.jobs);

  out.focus = evaluate_run(cfg.name, cfg.spec.describe(), std::move(focus), *cohort, out.plan, cfg.jobs);
  out.baseline = evaluate_run("baseline", "baseline (folds and exclusions of " + cfg.name + ")",
                              std::move(baseline), *cohort, out.plan, cfg.jobs);
  add_paired_tests(out.focus.report, out.baseline.report, "baseline");

  std::size_t excluded_in_val = 0;
  for (std::size_t i = 0; i < out.plan.assignment.size(); ++i) {
    if (out.plan.assignment[i] >= 0 && out.labeled.excluded(i)) ++excluded_in_val;
  }
  for (auto* report : {&out.focus.report, &out.baseline.report}) {
    for (const auto& f : out.plan.flags) report->flags.push_back(f);
    if (excluded_in_val > 0) {
      report->flags.push_back(std::to_string(excluded_in_val) +
                              " excluded MSS CIMP-H patients kept in validation folds");
    }
  }
  return out;
}

CombinedResult run_combined(const ExperimentResult& a, const ExperimentResult& b,
                            const TrainConfig& fusion_cfg, int jobs) {
  if (a.labeled.base != b.labeled.base) throw usage_error("combined model needs experiments on one cohort");
  const Cohort& cohort = a.labeled.cohort();
  const int k = a.plan.k;
  if (b.plan.k != k) throw usage_error("combined model needs experiments with the same k");

  // Out-of-fold source probabilities for every TRAIN patient.
  std::vector<FusionRow> dataset;
  for (PatientIndex i : cohort.patients_in(Split::kTrain)) {
    const auto fa = static_cast<std::size_t>(a.plan.assignment[i]);
    const auto fb = static_cast<std::size_t>(b.plan.assignment[i]);
    const PatientIndex one[] = {i};
    auto rows = build_fusion_dataset(a.focus.models[fa], b.focus.models[fb], a.labeled, b.labeled, one);
    dataset.insert(dataset.end(), rows.begin(), rows.end());
  }

  CombinedResult out;
  out.models.resize(static_cast<std::size_t>(k));
  out.scores.resize(static_cast<std::size_t>(k));
  const auto test = cohort.patients_in(Split::kTest);
  parallel_for(k, jobs, [&](int f) {
    const auto fi = static_cast<std::size_t>(f);
    const auto val = a.plan.fold_patients(f);
    FusionModel model = train_fusion(dataset, a.plan.training_patients(f), val, fusion_cfg, f);
    model.source_a = describe_source(a.focus.name + "_fold" + std::to_string(f), a.focus.models[fi]);
    model.source_b = describe_source(b.focus.name + "_fold" + std::to_string(f), b.focus.models[fi]);
    model.head.provenance().extra["training_inputs"] = "out-of-fold source probabilities";

    FoldScores s;
    s.fold = f;
    s.test = predict_fusion(model, a.focus.models[fi], b.focus.models[fi], cohort, test);
    for (PatientIndex i : test) s.test_positive.push_back(cohort.patient(i).msi_status == MsiStatus::kMsi);
    std::map<PatientIndex, std::pair<double, std::size_t>> sums;
    for (PatientIndex v : val) sums[v] = {0.0, 0};
    for (const auto& row : dataset) {
      auto it = sums.find(row.patient);
      if (it == sums.end()) continue;
      it->second.first += model.head.forward(std::span<const double>(row.x))[1];
      ++it->second.second;
    }
    for (const auto& [patient, acc] : sums) {
      s.validation.push_back({acc.first / static_cast<double>(acc.second),
                              cohort.patient(patient).msi_status == MsiStatus::kMsi});
    }
    out.models[fi] = std::move(model);
    out.scores[fi] = std::move(s);
  });
  out.report = build_report("combined", a.focus.name + "+" + b.focus.name, out.scores);
  add_paired_tests(out.report, a.baseline.report, "baseline");
  add_paired_tests(out.report, a.focus.report, a.focus.name);
  add_paired_tests(out.report, b.focus.report, b.focus.name);
  return out;
}

}  // namespace bp
