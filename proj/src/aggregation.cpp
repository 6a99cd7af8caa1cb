// SPDX-License-Identifier: Apache-2.0
#include "bp/aggregation.hpp"

#include <algorithm>
#include <ostream>

#include "bp/error.hpp"
#include "bp/util.hpp"

namespace bp {

double patch_msi_probability(std::span<const double> probs, std::size_t n_classes) {
  if (n_classes != 2 && n_classes != 3) {
    throw usage_error("patch MSI probability needs 2 or 3 classes, got " + std::to_string(n_classes));
  }
  if (probs.size() != n_classes) throw usage_error("probability vector length mismatch");
  return n_classes == 2 ? probs[1] : std::max(probs[1], probs[2]);
}

double patch_msi_probability(const PatchPrediction& pred, std::size_t n_classes) {
  return patch_msi_probability(pred.probs, n_classes);
}

PatientScore aggregate_probabilities(const std::string& patient_id,
                                     std::span<const double> patch_msi) {
  if (patch_msi.empty()) throw usage_error("patient " + patient_id + " has no patch predictions");
  double sum = 0.0;
  for (double p : patch_msi) sum += p;
  return {patient_id, sum / static_cast<double>(patch_msi.size()), patch_msi.size()};
}

PatientScore aggregate_patient(const std::string& patient_id, std::span<const PatchPrediction> preds,
                               std::size_t n_classes) {
  std::vector<double> msi;
  msi.reserve(preds.size());
  for (const auto& p : preds) msi.push_back(patch_msi_probability(p, n_classes));
  return aggregate_probabilities(patient_id, msi);
}

std::vector<PatientScore> score_patients(const HeadModel& model, const Cohort& cohort,
                                         std::span<const PatientIndex> patients) {
  if (cohort.dim() != model.input_dim()) {
    throw data_error("cohort dimension " + std::to_string(cohort.dim()) +
                     " does not match model input " + std::to_string(model.input_dim()));
  }
  std::vector<PatientScore> out;
  out.reserve(patients.size());
  detail::Workspace ws;
  std::vector<double> msi;
  for (PatientIndex pi : patients) {
    const auto& p = cohort.patient(pi);
    msi.clear();
    for (std::size_t e : p.patches) {
      const auto& probs = detail::forward_into(
          model.parameters(), std::span<const float>(cohort.embeddings()[e].vector), ws);
      msi.push_back(patch_msi_probability(probs, model.n_classes()));
    }
    out.push_back(aggregate_probabilities(p.patient_id, msi));
  }
  return out;
}

void write_scores(std::span<const PatientScore> scores, std::ostream& out) {
  out << "patient_id,p_msi,n_patches\n";
  for (const auto& s : scores) {
    out << s.patient_id << ',' << format_double(s.p_msi) << ',' << s.n_patches << '\n';
  }
}

}  // namespace bp
