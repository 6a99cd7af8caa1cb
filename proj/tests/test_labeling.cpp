#include <doctest.h>

#include <sstream>

#include "bp/error.hpp"
#include "bp/labeling.hpp"
#include "bp/synth.hpp"
#include "support.hpp"

using namespace bp;
using bp::test::patient;

namespace {

std::shared_ptr<const Cohort> share(std::vector<PatientRecord> ps) {
  return std::make_shared<const Cohort>(std::move(ps));
}

SubLabel label_of(const PatientRecord& p, const LabelingSpec& spec) {
  const auto l = relabel(share({p}), spec);
  REQUIRE(l.sublabels[0].has_value());
  return *l.sublabels[0];
}

}  // namespace

TEST_CASE("SNP count above the threshold gives MSI_2") {
  const auto p = patient("P", MsiStatus::kMsi, 1432, CimpStatus::kNonCimp, 0.1);
  CHECK(label_of(p, LabelingSpec::snp(1200)) == SubLabel::kMsi2);
  CHECK(label_of(p, LabelingSpec::snp(1500)) == SubLabel::kMsi1);
}

TEST_CASE("a count equal to the threshold stays MSI_1") {
  const auto p = patient("P", MsiStatus::kMsi, 1200, CimpStatus::kNonCimp, 0.005);
  CHECK(label_of(p, LabelingSpec::snp(1200)) == SubLabel::kMsi1);
  CHECK(label_of(p, LabelingSpec::cnv(0.005)) == SubLabel::kMsi1);
}

TEST_CASE("MSS patients are MSS under every labeling") {
  for (auto cimp : {CimpStatus::kCimpH, CimpStatus::kCimpLow, CimpStatus::kNonCimp}) {
    const auto p = patient("P", MsiStatus::kMss, 5000, cimp, 0.9, Split::kTest);
    for (const auto& spec : {LabelingSpec::baseline(), LabelingSpec::snp(1200),
                             LabelingSpec::cimp(true), LabelingSpec::cimp(false),
                             LabelingSpec::cnv(0.005)}) {
      CHECK(label_of(p, spec) == SubLabel::kMss);
    }
  }
}

TEST_CASE("CIMP labeling splits MSI by CIMP-H") {
  CHECK(label_of(patient("P", MsiStatus::kMsi, 1, CimpStatus::kCimpLow, 0.1),
                 LabelingSpec::cimp()) == SubLabel::kMsi1);
  CHECK(label_of(patient("P", MsiStatus::kMsi, 1, CimpStatus::kNonCimp, 0.1),
                 LabelingSpec::cimp()) == SubLabel::kMsi1);
  CHECK(label_of(patient("P", MsiStatus::kMsi, 1, CimpStatus::kCimpH, 0.1),
                 LabelingSpec::cimp()) == SubLabel::kMsi2);
}

TEST_CASE("CIMP exclusion removes TRAIN MSS CIMP-H patients only") {
  const auto c = share({patient("A", MsiStatus::kMss, 1, CimpStatus::kCimpH, 0.1),
                        patient("B", MsiStatus::kMss, 1, CimpStatus::kCimpH, 0.1, Split::kTest),
                        patient("C", MsiStatus::kMsi, 1, CimpStatus::kCimpH, 0.1),
                        patient("D", MsiStatus::kMss, 1, CimpStatus::kCimpLow, 0.1)});
  const auto with = relabel(c, LabelingSpec::cimp(true));
  CHECK(with.excluded_train_patients == std::set<std::string>{"A"});
  CHECK(with.excluded(0));
  CHECK(with.sublabels[1] == SubLabel::kMss);
  CHECK(with.sublabels[2] == SubLabel::kMsi2);
  CHECK(with.sublabels[3] == SubLabel::kMss);
  const auto without = relabel(c, LabelingSpec::cimp(false));
  CHECK(without.excluded_train_patients.empty());
  CHECK(without.sublabels[0] == SubLabel::kMss);
}

TEST_CASE("missing genomic values and bad specs are errors") {
  const auto na = share({patient("P", MsiStatus::kMsi, std::nullopt, std::nullopt, std::nullopt)});
  CHECK_THROWS_AS(relabel(na, LabelingSpec::snp(1200)), Error);
  CHECK_THROWS_AS(relabel(na, LabelingSpec::cimp()), Error);
  CHECK_THROWS_AS(relabel(na, LabelingSpec::cnv()), Error);
  CHECK(relabel(na, LabelingSpec::baseline()).sublabels[0] == SubLabel::kMsi1);
  const auto mss_na =
      share({patient("P", MsiStatus::kMss, std::nullopt, std::nullopt, std::nullopt)});
  CHECK_THROWS_AS(relabel(mss_na, LabelingSpec::cimp(true)), Error);
  CHECK(relabel(mss_na, LabelingSpec::snp(1200)).sublabels[0] == SubLabel::kMss);

  const auto ok = share({patient("P", MsiStatus::kMsi, 1, CimpStatus::kCimpH, 0.1)});
  CHECK_THROWS_AS(relabel(ok, LabelingSpec{Variant::kSnp, std::nullopt, false}), Error);
  CHECK_THROWS_AS(relabel(ok, LabelingSpec{Variant::kBaseline, 3.0, false}), Error);
  CHECK_THROWS_AS(relabel(ok, LabelingSpec{Variant::kSnp, 1200.0, true}), Error);
}

TEST_CASE("relabel properties on random cohorts") {
  Rng rng(20240611);
  const std::vector<double> thresholds{0, 500, 999, 1000, 1200, 1432, 2000, 2999, 5000};
  for (int trial = 0; trial < 500; ++trial) {
    const auto cohort = share(bp::test::random_patients(rng, 1 + static_cast<int>(rng.below(60))));
    const auto& ps = cohort->patients();
    for (const auto& spec : {LabelingSpec::baseline(), LabelingSpec::snp(1200),
                             LabelingSpec::cimp(true), LabelingSpec::cimp(false),
                             LabelingSpec::cnv(0.01)}) {
      const auto l = relabel(cohort, spec);
      // Partition: every patient has one label or is excluded, never both.
      std::size_t labeled = 0;
      for (std::size_t i = 0; i < ps.size(); ++i) {
        const bool ex = l.excluded_train_patients.count(ps[i].patient_id) > 0;
        CHECK(ex != l.sublabels[i].has_value());
        labeled += l.sublabels[i].has_value();
      }
      CHECK(labeled + l.excluded_train_patients.size() == ps.size());
      std::size_t counted = 0;
      for (auto split : {Split::kTrain, Split::kTest}) {
        for (const auto& cc : class_counts(l, split)) counted += cc.patients;
      }
      CHECK(counted == labeled);

      const auto again = relabel(cohort, spec);
      CHECK(again.sublabels == l.sublabels);
      CHECK(again.excluded_train_patients == l.excluded_train_patients);
    }

    const auto base = relabel(cohort, LabelingSpec::baseline());
    for (std::size_t i = 0; i < ps.size(); ++i) {
      REQUIRE(base.sublabels[i].has_value());
      CHECK(*base.sublabels[i] != SubLabel::kMsi2);
      const auto merged = *base.sublabels[i] == SubLabel::kMss ? MsiStatus::kMss : MsiStatus::kMsi;
      CHECK(merged == ps[i].msi_status);
    }

    std::vector<bool> prev(ps.size(), true);
    for (double t : thresholds) {
      const auto l = relabel(cohort, LabelingSpec::snp(t > 0 ? t : 1e-9));
      for (std::size_t i = 0; i < ps.size(); ++i) {
        const bool msi2 = l.sublabels[i] == SubLabel::kMsi2;
        CHECK((!msi2 || prev[i]));
        prev[i] = msi2;
        const bool msi1 = l.sublabels[i] == SubLabel::kMsi1;
        CHECK((msi1 || msi2) == (ps[i].msi_status == MsiStatus::kMsi));
      }
    }
  }
}

TEST_CASE("class counts of the published layout under the baseline") {
  const auto c = std::make_shared<const Cohort>(generate(published_layout_config()));
  const auto l = relabel(c, LabelingSpec::baseline());
  const auto train = class_counts(l, Split::kTrain);
  CHECK(train[0] == ClassCount{221, 46704});
  CHECK(train[1] == ClassCount{39, 46704});
  CHECK(train[2] == ClassCount{0, 0});
}

TEST_CASE("class counts of an empty split are zero") {
  const auto c = share({patient("P", MsiStatus::kMsi, 1, CimpStatus::kCimpH, 0.1)});
  const auto counts = class_counts(relabel(c, LabelingSpec::snp(1200)), Split::kTest);
  for (const auto& cc : counts) CHECK(cc == ClassCount{});
}

TEST_CASE("class counts match a recount of generated records") {
  GeneratorConfig g;
  g.seed = 5;
  const auto c = std::make_shared<const Cohort>(generate(g));
  const auto l = relabel(c, LabelingSpec::snp(1000));
  for (auto split : {Split::kTrain, Split::kTest}) {
    ClassCounts oracle{};
    for (const auto& p : c->patients()) {
      if (p.split != split) continue;
      int k = 0;
      if (p.msi_status == MsiStatus::kMsi) k = *p.genomic.snp_count > 1000 ? 2 : 1;
      oracle[k].patients++;
      for (const auto& e : c->embeddings()) oracle[k].patches += e.patient_id == p.patient_id;
    }
    CHECK(class_counts(l, split) == oracle);
  }
}

TEST_CASE("sub-label CSV lists excluded patients as NA") {
  const auto c = share({patient("A", MsiStatus::kMss, 1, CimpStatus::kCimpH, 0.1),
                        patient("B", MsiStatus::kMsi, 1, CimpStatus::kCimpH, 0.1)});
  std::ostringstream out;
  write_sublabels(relabel(c, LabelingSpec::cimp(true)), out);
  CHECK(out.str() == "patient_id,sublabel,excluded\nA,NA,true\nB,MSI_2,false\n");
}

TEST_CASE("spec names and parsing") {
  CHECK(LabelingSpec::snp(1000).describe() == "snp@1000");
  CHECK(LabelingSpec::cimp(true).describe() == "cimp+exclude_mss_cimp_h");
  CHECK(parse_variant("SNP") == Variant::kSnp);
  CHECK(parse_variant("cnv") == Variant::kCnv);
  CHECK_FALSE(parse_variant("x").has_value());
  CHECK(LabelingSpec::baseline().n_classes() == 2);
  CHECK(LabelingSpec::cimp().n_classes() == 3);
}
