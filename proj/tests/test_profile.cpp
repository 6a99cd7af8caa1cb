#include <doctest.h>

#include <sstream>

#include "bp/profile.hpp"
#include "bp/synth.hpp"
#include "support.hpp"

using namespace bp;

namespace {

std::vector<PatchPrediction> constant_preds(const Cohort& c, double msi_prob_for_msi,
                                            double msi_prob_for_mss) {
  std::vector<PatchPrediction> out;
  for (const auto& e : c.embeddings()) {
    const bool msi = c.patient(*c.find_patient(e.patient_id)).msi_status == MsiStatus::kMsi;
    const double p = msi ? msi_prob_for_msi : msi_prob_for_mss;
    out.push_back({e.patch_id, {1 - p, p}});
  }
  return out;
}

}  // namespace

TEST_CASE("every MSI patch a true positive leaves FN empty and flagged") {
  GeneratorConfig g;
  g.seed = 1;
  const auto c = std::make_shared<const Cohort>(generate(g));
  const auto l = relabel(c, LabelingSpec::baseline());
  const auto prof = misclassification_profile(l, constant_preds(*c, 0.9, 0.2), 2, 0.5);
  const auto& fn = prof.categories[static_cast<int>(Outcome::kFn)];
  CHECK(fn.empty);
  CHECK(fn.n_patches == 0);
  CHECK_FALSE(fn.snp.has_value());
  CHECK(std::find(prof.flags.begin(), prof.flags.end(), "FN is empty") != prof.flags.end());
  CHECK(prof.categories[static_cast<int>(Outcome::kTp)].n_patches > 0);
  std::ostringstream out;
  write_profile(prof, out);
  CHECK(out.str().find("FN,0,NA") != std::string::npos);
}

TEST_CASE("a scorer along the SNP axis misses low-SNP MSI patches") {
  GeneratorConfig g;
  g.seed = 2;
  g.class_separation = 0;
  const auto c = std::make_shared<const Cohort>(generate(g));
  const auto truth = planted_truth(g);
  // Two-class head whose MSI logit is 4 * x[snp axis].
  HeadModel m(c->dim(), {}, 2);
  m.parameters()[0].w(1, truth.feature_axis[0]) = 4.0;
  const auto preds = predict(m, c->embeddings());
  const auto l = relabel(c, LabelingSpec::baseline());
  const auto prof = misclassification_profile(l, preds, 2, 0.5);
  const auto& tp = prof.categories[static_cast<int>(Outcome::kTp)];
  const auto& fn = prof.categories[static_cast<int>(Outcome::kFn)];
  REQUIRE(tp.snp.has_value());
  REQUIRE(fn.snp.has_value());
  // High-SNP patients sit on the positive side of the axis.
  CHECK(fn.snp->median < truth.snp_split);
  CHECK(tp.snp->median > truth.snp_split);
}

TEST_CASE("category proportions sum to one and patches are all counted") {
  GeneratorConfig g;
  g.seed = 3;
  const auto c = std::make_shared<const Cohort>(generate(g));
  Rng rng(3);
  const std::vector<int> hidden{8};
  const auto m = HeadModel::initialized(c->dim(), hidden, 3, rng);
  const auto l = relabel(c, LabelingSpec::cimp(true));
  const auto prof = misclassification_profile(l, predict(m, c->embeddings()), 3, 0.3);
  std::size_t total = 0;
  for (const auto& cat : prof.categories) {
    total += cat.n_patches;
    if (cat.empty) continue;
    double s = 0;
    for (double p : cat.cimp_proportions) s += p;
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
  CHECK(total == c->embeddings().size());
  CHECK(prof.threshold == 0.3);
}
