// SPDX-License-Identifier: Apache-2.0
#include "bp/model_dir.hpp"

#include <fstream>
#include <sstream>

#include "bp/error.hpp"
#include "bp/util.hpp"

namespace bp {

nlohmann::json labeling_to_json(const LabelingSpec& spec) {
  nlohmann::json j{{"variant", to_string(spec.variant)},
                   {"exclude_mss_cimp_h_from_train", spec.exclude_mss_cimp_h_from_train}};
  j["threshold"] = spec.threshold ? nlohmann::json(*spec.threshold) : nlohmann::json(nullptr);
  return j;
}

LabelingSpec labeling_from_json(const nlohmann::json& j) {
  LabelingSpec spec;
  const auto v = parse_variant(j.at("variant").get<std::string>());
  if (!v) throw data_error("labeling.json: unknown variant " + j.at("variant").dump());
  spec.variant = *v;
  if (j.contains("threshold") && !j.at("threshold").is_null()) spec.threshold = j.at("threshold").get<double>();
  spec.exclude_mss_cimp_h_from_train = j.value("exclude_mss_cimp_h_from_train", false);
  spec.validate();
  return spec;
}

std::filesystem::path model_path(const std::filesystem::path& dir, int fold) {
  return dir / ("model_fold" + std::to_string(fold) + ".json");
}

void write_train_log(const HeadModel& model, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "epoch,val_auroc,best\n";
  const auto& prov = model.provenance();
  for (std::size_t e = 0; e < prov.epoch_val_auroc.size(); ++e) {
    const int epoch = static_cast<int>(e) + 1;
    out << epoch << ',' << format_double(prov.epoch_val_auroc[e]) << ','
        << (epoch == prov.best_epoch ? 1 : 0) << '\n';
  }
  write_file(path, out.str());
}

void write_model_dir(const std::filesystem::path& dir, const LabelingSpec& spec, const FoldPlan& plan,
                     const Cohort& cohort, const std::vector<HeadModel>& models) {
  std::filesystem::create_directories(dir);
  write_file(dir / "labeling.json", labeling_to_json(spec).dump(1) + "\n");
  std::ostringstream folds;
  write_folds(plan, cohort, folds);
  write_file(dir / "folds.csv", folds.str());
  for (std::size_t f = 0; f < models.size(); ++f) {
    if (models[f].n_classes() == 0) continue;
    save_model(models[f], model_path(dir, static_cast<int>(f)));
    write_train_log(models[f], dir / ("train_log_fold" + std::to_string(f) + ".csv"));
  }
}

ModelDir read_model_dir(const std::filesystem::path& dir, const Cohort& cohort, const FoldPlan* plan_override) {
  if (!std::filesystem::is_directory(dir)) throw usage_error("model directory not found: " + dir.string());
  ModelDir out;
  out.spec = labeling_from_json(nlohmann::json::parse(read_file(dir / "labeling.json")));
  if (plan_override) {
    out.plan = *plan_override;
  } else {
    std::ifstream in(dir / "folds.csv");
    if (!in) throw usage_error("missing " + (dir / "folds.csv").string());
    out.plan = read_folds(in, cohort);
  }
  for (int f = 0; f < out.plan.k; ++f) {
    const auto path = model_path(dir, f);
    if (!std::filesystem::exists(path)) throw usage_error("missing model for fold " + std::to_string(f) + ": " + path.string());
    out.models.push_back(load_model(path));
    if (out.models.back().n_classes() != out.spec.n_classes()) {
      throw data_error(path.string() + ": class count does not match labeling.json");
    }
  }
  return out;
}

}  // namespace bp
