// SPDX-License-Identifier: Apache-2.0
#include "bp/combiner.hpp"

#include <map>
#include <set>

#include "bp/error.hpp"
#include "bp/util.hpp"

namespace bp {

namespace {

void require_three_class(const HeadModel& m, const char* which) {
  if (m.n_classes() != 3) {
    throw usage_error(std::string("fusion source model ") + which + " must have 3 classes");
  }
}

}  // namespace

std::array<double, kFusionInputDim> fusion_input(const HeadModel& a, const HeadModel& b,
                                                 std::span<const float> patch) {
  std::array<double, kFusionInputDim> x{};
  const auto pa = a.forward(patch);
  const auto pb = b.forward(patch);
  std::copy(pa.begin(), pa.end(), x.begin());
  std::copy(pb.begin(), pb.end(), x.begin() + 3);
  return x;
}

std::vector<FusionRow> build_fusion_dataset(const HeadModel& model_a, const HeadModel& model_b,
                                            const LabeledCohort& labeled_a,
                                            const LabeledCohort& labeled_b,
                                            std::span<const PatientIndex> patients) {
  require_three_class(model_a, "A");
  require_three_class(model_b, "B");
  if (labeled_a.base != labeled_b.base && !(*labeled_a.base == *labeled_b.base)) {
    throw usage_error("fusion sources must share the same base cohort");
  }
  const Cohort& cohort = labeled_a.cohort();
  if (model_a.input_dim() != cohort.dim() || model_b.input_dim() != cohort.dim()) {
    throw data_error("fusion source model input dimension does not match the cohort");
  }
  std::vector<FusionRow> rows;
  for (PatientIndex pi : patients) {
    const auto& p = cohort.patient(pi);
    if (p.split != Split::kTrain) throw usage_error("fusion training patient " + p.patient_id + " is not TRAIN");
    for (std::size_t e : p.patches) {
      rows.push_back({fusion_input(model_a, model_b, cohort.embeddings()[e].vector),
                      p.msi_status == MsiStatus::kMsi, pi});
    }
  }
  return rows;
}

FusionModel train_fusion(std::span<const FusionRow> dataset,
                         std::span<const PatientIndex> train_patients,
                         std::span<const PatientIndex> val_patients, const TrainConfig& cfg,
                         int fold) {
  const std::set<PatientIndex> train_set(train_patients.begin(), train_patients.end());
  std::map<PatientIndex, std::size_t> val_group;
  for (PatientIndex v : val_patients) {
    if (train_set.count(v)) throw usage_error("fusion training and validation patients overlap");
    val_group.emplace(v, val_group.size());
  }
  TrainingRows<double> train;
  ValidationRows<double> val;
  val.group_positive.assign(val_group.size(), false);
  for (const auto& row : dataset) {
    if (train_set.count(row.patient)) {
      train.features.emplace_back(row.x);
      train.labels.push_back(row.msi ? 1 : 0);
    } else if (auto it = val_group.find(row.patient); it != val_group.end()) {
      val.features.emplace_back(row.x);
      val.group.push_back(it->second);
      val.group_positive[it->second] = row.msi;
    }
  }
  FusionModel out;
  out.head = fit_head(train, val, 2, cfg, fold);
  out.head.provenance().labeling = "fusion";
  return out;
}

std::vector<PatientScore> predict_fusion(const FusionModel& model, const HeadModel& model_a,
                                         const HeadModel& model_b, const Cohort& cohort,
                                         std::span<const PatientIndex> patients) {
  require_three_class(model_a, "A");
  require_three_class(model_b, "B");
  if (model.head.input_dim() != kFusionInputDim || model.head.n_classes() != 2) {
    throw usage_error("fusion model must map 6 inputs to 2 classes");
  }
  std::vector<PatientScore> out;
  std::vector<double> msi;
  for (PatientIndex pi : patients) {
    const auto& p = cohort.patient(pi);
    msi.clear();
    for (std::size_t e : p.patches) {
      const auto x = fusion_input(model_a, model_b, cohort.embeddings()[e].vector);
      msi.push_back(model.head.forward(std::span<const double>(x))[1]);
    }
    out.push_back(aggregate_probabilities(p.patient_id, msi));
  }
  return out;
}

SourceModelRef describe_source(const std::string& name, const HeadModel& model) {
  return {name, sha256_hex(model_to_json(model).dump())};
}

nlohmann::json fusion_to_json(const FusionModel& model) {
  auto j = model_to_json(model.head);
  j["fusion"] = {
      {"input_order", "model_a[MSS,MSI_1,MSI_2] + model_b[MSS,MSI_1,MSI_2]"},
      {"source_a", {{"name", model.source_a.name}, {"sha256", model.source_a.sha256}}},
      {"source_b", {{"name", model.source_b.name}, {"sha256", model.source_b.sha256}}}};
  return j;
}

FusionModel fusion_from_json(const nlohmann::json& j) {
  FusionModel m;
  m.head = model_from_json(j);
  if (m.head.input_dim() != kFusionInputDim || m.head.n_classes() != 2) {
    throw data_error("fusion model must map 6 inputs to 2 classes");
  }
  try {
    const auto& f = j.at("fusion");
    m.source_a = {f.at("source_a").at("name").get<std::string>(),
                  f.at("source_a").at("sha256").get<std::string>()};
    m.source_b = {f.at("source_b").at("name").get<std::string>(),
                  f.at("source_b").at("sha256").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("malformed fusion block: ") + e.what());
  }
  return m;
}

void save_fusion(const FusionModel& model, const std::filesystem::path& path) {
  write_file(path, fusion_to_json(model).dump(1) + "\n");
}

FusionModel load_fusion(const std::filesystem::path& path) {
  try {
    return fusion_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw data_error(path.string() + ": " + e.what());
  }
}

}  // namespace bp
