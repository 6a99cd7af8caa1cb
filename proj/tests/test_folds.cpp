#include <doctest.h>

#include <sstream>

#include "bp/error.hpp"
#include "bp/folds.hpp"
#include "bp/synth.hpp"
#include "strata.hpp"

using namespace bp;

TEST_CASE("divisible strata split evenly") {
  std::vector<PatientRecord> ps;
  for (int i = 0; i < 50; ++i) {
    PatientRecord p;
    p.patient_id = "P" + std::to_string(i);
    p.msi_status = i < 20 ? MsiStatus::kMsi : MsiStatus::kMss;
    p.genomic = {i < 10 ? 500 : 1500, CimpStatus::kNonCimp, 0.1};
    ps.push_back(p);
  }
  const auto c = std::make_shared<const Cohort>(ps);
  const auto l = relabel(c, LabelingSpec::snp(1000));
  const auto plan = make_folds(l, 5, 3);
  CHECK(plan.flags.empty());
  for (int f = 0; f < 5; ++f) {
    std::array<int, 3> n{};
    for (auto i : plan.fold_patients(f)) n[static_cast<int>(*l.sublabels[i])]++;
    CHECK(n == std::array<int, 3>{6, 2, 2});
    CHECK(plan.training_patients(f).size() == 40);
  }
}

TEST_CASE("39 MSI patients over 5 folds give 7 or 8 per fold") {
  const auto c = std::make_shared<const Cohort>(generate(published_layout_config()));
  const auto l = relabel(c, LabelingSpec::baseline());
  const auto plan = make_folds(l, 5, 0);
  int total = 0;
  for (int f = 0; f < 5; ++f) {
    int msi = 0;
    for (auto i : plan.fold_patients(f)) msi += c->patient(i).msi_status == MsiStatus::kMsi;
    CHECK(msi >= 7);
    CHECK(msi <= 8);
    total += msi;
  }
  CHECK(total == 39);
}

TEST_CASE("per-stratum deviation stays within one") {
  Rng rng(123);
  for (int trial = 0; trial < 300; ++trial) {
    const auto t = bp::test::strata_trial(rng);
    CHECK_MESSAGE(t.ok, t.detail);
  }
}

TEST_CASE("small strata are flagged, excluded patients keep a fold") {
  const auto c = bp::test::strata_cohort({20, 3, 6, 4}, 2);
  const auto l = relabel(c, LabelingSpec::cimp(true));
  const auto plan = make_folds(l, 5, 1);
  CHECK(plan.flags.size() == 2);
  for (PatientIndex i = 0; i < c->patients().size(); ++i) {
    if (l.excluded(i)) CHECK(plan.assignment[i] >= 0);
  }
}

TEST_CASE("fold plans are seeded") {
  const auto c = bp::test::strata_cohort({30, 10, 10, 0}, 0);
  const auto l = relabel(c, LabelingSpec::cimp(false));
  CHECK(make_folds(l, 5, 7).assignment == make_folds(l, 5, 7).assignment);
  CHECK(make_folds(l, 5, 7).assignment != make_folds(l, 5, 8).assignment);
}

TEST_CASE("fold errors") {
  const auto c = bp::test::strata_cohort({3, 1, 0, 0}, 1);
  const auto l = relabel(c, LabelingSpec::baseline());
  CHECK_THROWS_AS(make_folds(l, 1, 0), Error);
  CHECK_THROWS_AS(make_folds(l, 5, 0), Error);
  const auto mss_only = bp::test::strata_cohort({5, 0, 0, 0}, 1);
  CHECK_THROWS_AS(make_folds(relabel(mss_only, LabelingSpec::baseline()), 2, 0), Error);
}

TEST_CASE("fold files round-trip and are validated") {
  const auto c = bp::test::strata_cohort({12, 4, 4, 2}, 3);
  const auto l = relabel(c, LabelingSpec::cimp(true));
  const auto plan = make_folds(l, 4, 9);
  std::stringstream ss;
  write_folds(plan, *c, ss);
  const auto back = read_folds(ss, *c);
  CHECK(back.assignment == plan.assignment);
  CHECK(back.k == 4);

  std::istringstream bad_header("id,fold\n");
  CHECK_THROWS_AS(read_folds(bad_header, *c), Error);
  std::istringstream missing("patient_id,fold\n");
  CHECK_THROWS_AS(read_folds(missing, *c), Error);
  std::istringstream unknown("patient_id,fold\nNOPE,0\n");
  CHECK_THROWS_AS(read_folds(unknown, *c), Error);
}

TEST_CASE("without_excluded drops excluded patients only") {
  const auto c = bp::test::strata_cohort({4, 2, 2, 3}, 0);
  const auto l = relabel(c, LabelingSpec::cimp(true));
  const auto all = c->patients_in(Split::kTrain);
  const auto kept = without_excluded(l, all);
  CHECK(kept.size() == all.size() - 3);
  for (auto i : kept) CHECK_FALSE(l.excluded(i));
}
