// SPDX-License-Identifier: Apache-2.0
#include "bp/folds.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>

#include "bp/error.hpp"
#include "bp/rng.hpp"
#include "bp/util.hpp"

namespace bp {

std::string_view to_string(Stratum s) {
  switch (s) {
    case Stratum::kMss: return "MSS";
    case Stratum::kMsi1: return "MSI_1";
    case Stratum::kMsi2: return "MSI_2";
    case Stratum::kExcluded: return "EXCLUDED";
  }
  return "?";
}

Stratum stratum_of(const LabeledCohort& labeled, PatientIndex i) {
  const auto& s = labeled.sublabels.at(i);
  return s ? static_cast<Stratum>(static_cast<int>(*s)) : Stratum::kExcluded;
}

std::vector<PatientIndex> FoldPlan::fold_patients(int fold) const {
  std::vector<PatientIndex> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<PatientIndex> FoldPlan::training_patients(int fold) const {
  std::vector<PatientIndex> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] >= 0 && assignment[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan make_folds(const LabeledCohort& labeled, int k, std::uint64_t seed) {
  if (k < 2) throw usage_error("k must be >= 2");
  const auto& cohort = labeled.cohort();
  const auto train = cohort.patients_in(Split::kTrain);
  if (static_cast<std::size_t>(k) > train.size()) {
    throw usage_error("k=" + std::to_string(k) + " exceeds the " + std::to_string(train.size()) +
                      " TRAIN patients");
  }
  bool any_msi = false, any_mss = false;
  for (PatientIndex i : train) {
    (cohort.patient(i).msi_status == MsiStatus::kMsi ? any_msi : any_mss) = true;
  }
  if (!any_msi || !any_mss) throw data_error("TRAIN split needs at least one MSI and one MSS patient");

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.stratify_key = labeled.spec.variant;
  plan.assignment.assign(cohort.patients().size(), -1);

  std::array<std::vector<PatientIndex>, 4> strata;
  for (PatientIndex i : train) strata[static_cast<int>(stratum_of(labeled, i))].push_back(i);

  std::size_t offset = 0;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    auto& members = strata[s];
    if (members.empty()) continue;
    if (members.size() < static_cast<std::size_t>(k)) {
      plan.flags.push_back("stratum " + std::string(to_string(static_cast<Stratum>(s))) + " has " +
                           std::to_string(members.size()) + " patients, fewer than k=" +
                           std::to_string(k));
    }
    Rng rng(derive_seed(seed, Stream::kFolds, s));
    rng.shuffle(std::span<PatientIndex>(members));
    for (std::size_t j = 0; j < members.size(); ++j) {
      plan.assignment[members[j]] = static_cast<int>((offset + j) % static_cast<std::size_t>(k));
    }
    offset = (offset + members.size()) % static_cast<std::size_t>(k);
  }
  return plan;
}

void write_folds(const FoldPlan& plan, const Cohort& cohort, std::ostream& out) {
  out << "patient_id,fold\n";
  for (std::size_t i = 0; i < plan.assignment.size(); ++i) {
    if (plan.assignment[i] >= 0) out << cohort.patient(i).patient_id << ',' << plan.assignment[i] << '\n';
  }
}

FoldPlan read_folds(std::istream& in, const Cohort& cohort) {
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty fold file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "patient_id,fold") throw data_error("fold file header must be patient_id,fold");
  FoldPlan plan;
  plan.assignment.assign(cohort.patients().size(), -1);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 2) throw data_error("fold file line " + std::to_string(line_no) + ": expected 2 columns");
    const auto idx = cohort.find_patient(cells[0]);
    if (!idx) throw data_error("fold file line " + std::to_string(line_no) + ": unknown patient " + std::string(cells[0]));
    if (cohort.patient(*idx).split != Split::kTrain) {
      throw data_error("fold file line " + std::to_string(line_no) + ": patient " + std::string(cells[0]) + " is not TRAIN");
    }
    int fold = -1;
    try {
      fold = std::stoi(std::string(cells[1]));
    } catch (const std::exception&) {
      throw data_error("fold file line " + std::to_string(line_no) + ": bad fold index");
    }
    if (fold < 0) throw data_error("fold file line " + std::to_string(line_no) + ": negative fold");
    plan.assignment[*idx] = fold;
    plan.k = std::max(plan.k, fold + 1);
  }
  for (PatientIndex i : cohort.patients_in(Split::kTrain)) {
    if (plan.assignment[i] < 0) throw data_error("fold file does not assign patient " + cohort.patient(i).patient_id);
  }
  return plan;
}

std::vector<PatientIndex> without_excluded(const LabeledCohort& labeled,
                                           std::span<const PatientIndex> patients) {
  std::vector<PatientIndex> out;
  for (PatientIndex i : patients) {
    if (!labeled.excluded(i)) out.push_back(i);
  }
  return out;
}

}  // namespace bp
