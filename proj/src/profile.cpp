// SPDX-License-Identifier: Apache-2.0
#include "bp/profile.hpp"

#include <ostream>

#include "bp/aggregation.hpp"
#include "bp/error.hpp"
#include "bp/util.hpp"

namespace bp {

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::kTp: return "TP";
    case Outcome::kFn: return "FN";
    case Outcome::kFp: return "FP";
    case Outcome::kTn: return "TN";
  }
  return "?";
}

MisclassificationProfile misclassification_profile(const LabeledCohort& labeled,
                                                   std::span<const PatchPrediction> preds,
                                                   std::size_t n_classes, double threshold) {
  const Cohort& cohort = labeled.cohort();
  MisclassificationProfile out;
  out.threshold = threshold;
  std::array<std::vector<double>, 4> snp, cnv;
  std::array<std::array<std::size_t, 4>, 4> cimp{};
  for (const auto& pred : preds) {
    const auto patch = cohort.find_patch(pred.patch_id);
    if (!patch) throw data_error("prediction for unknown patch " + pred.patch_id);
    const auto& emb = cohort.embeddings()[*patch];
    const auto& patient = cohort.patient(*cohort.find_patient(emb.patient_id));
    const bool predicted = patch_msi_probability(pred, n_classes) >= threshold;
    const bool actual = patient.msi_status == MsiStatus::kMsi;
    const Outcome o = actual ? (predicted ? Outcome::kTp : Outcome::kFn)
                             : (predicted ? Outcome::kFp : Outcome::kTn);
    const int c = static_cast<int>(o);
    ++out.categories[c].n_patches;
    if (patient.genomic.snp_count) snp[c].push_back(static_cast<double>(*patient.genomic.snp_count));
    if (patient.genomic.cnv_fraction) cnv[c].push_back(*patient.genomic.cnv_fraction);
    ++cimp[c][patient.genomic.cimp_status ? static_cast<int>(*patient.genomic.cimp_status) : 3];
  }
  for (int c = 0; c < 4; ++c) {
    auto& cat = out.categories[c];
    cat.outcome = static_cast<Outcome>(c);
    cat.empty = cat.n_patches == 0;
    if (cat.empty) {
      out.flags.push_back(std::string(to_string(cat.outcome)) + " is empty");
      continue;
    }
    if (!snp[c].empty()) cat.snp = five_number(snp[c]);
    if (!cnv[c].empty()) cat.cnv = five_number(cnv[c]);
    for (int k = 0; k < 4; ++k) {
      cat.cimp_proportions[k] = static_cast<double>(cimp[c][k]) / static_cast<double>(cat.n_patches);
    }
  }
  return out;
}

void write_profile(const MisclassificationProfile& profile, std::ostream& out) {
  out << "outcome,n_patches,snp_min,snp_q1,snp_median,snp_q3,snp_max,"
         "cimp_h,cimp_low,non_cimp,cimp_na,cnv_min,cnv_q1,cnv_median,cnv_q3,cnv_max\n";
  const auto five = [&](const std::optional<FiveNumber>& f) {
    if (!f) {
      out << ",NA,NA,NA,NA,NA";
      return;
    }
    out << ',' << format_double(f->min) << ',' << format_double(f->q1) << ',' << format_double(f->median)
        << ',' << format_double(f->q3) << ',' << format_double(f->max);
  };
  for (const auto& c : profile.categories) {
    out << to_string(c.outcome) << ',' << c.n_patches;
    five(c.snp);
    for (double p : c.cimp_proportions) out << ',' << (c.empty ? "NA" : format_double(p));
    five(c.cnv);
    out << '\n';
  }
}

}  // namespace bp
