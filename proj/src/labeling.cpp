// SPDX-License-Identifier: Apache-2.0
#include "bp/labeling.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>

#include "bp/error.hpp"
#include "bp/util.hpp"

namespace bp {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kBaseline: return "baseline";
    case Variant::kSnp: return "snp";
    case Variant::kCimp: return "cimp";
    case Variant::kCnv: return "cnv";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view token) {
  std::string t(token);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "baseline") return Variant::kBaseline;
  if (t == "snp") return Variant::kSnp;
  if (t == "cimp") return Variant::kCimp;
  if (t == "cnv") return Variant::kCnv;
  return std::nullopt;
}

std::string_view to_string(SubLabel s) {
  switch (s) {
    case SubLabel::kMss: return "MSS";
    case SubLabel::kMsi1: return "MSI_1";
    case SubLabel::kMsi2: return "MSI_2";
  }
  return "?";
}

std::optional<SubLabel> parse_sublabel(std::string_view t) {
  if (t == "MSS") return SubLabel::kMss;
  if (t == "MSI_1") return SubLabel::kMsi1;
  if (t == "MSI_2") return SubLabel::kMsi2;
  return std::nullopt;
}

void LabelingSpec::validate() const {
  const bool has = threshold.has_value();
  switch (variant) {
    case Variant::kSnp:
      if (!has) throw usage_error("SNP labeling requires a threshold");
      if (!std::isfinite(*threshold) || *threshold <= 0.0) {
        throw usage_error("SNP threshold must be finite and > 0");
      }
      break;
    case Variant::kCnv:
      if (!has) throw usage_error("CNV labeling requires a threshold");
      if (!std::isfinite(*threshold) || *threshold <= 0.0 || *threshold >= 1.0) {
        throw usage_error("CNV threshold must lie in (0, 1)");
      }
      break;
    case Variant::kBaseline:
    case Variant::kCimp:
      if (has) throw usage_error(std::string(to_string(variant)) + " labeling takes no threshold");
      break;
  }
  if (exclude_mss_cimp_h_from_train && variant != Variant::kCimp) {
    throw usage_error("MSS CIMP-H exclusion applies only to CIMP labeling");
  }
}

std::string LabelingSpec::describe() const {
  std::string out(to_string(variant));
  if (threshold) out += "@" + format_double(*threshold);
  if (exclude_mss_cimp_h_from_train) out += "+exclude_mss_cimp_h";
  return out;
}

LabeledCohort relabel(std::shared_ptr<const Cohort> cohort, const LabelingSpec& spec) {
  if (!cohort) throw usage_error("relabel: null cohort");
  spec.validate();
  LabeledCohort out;
  out.base = cohort;
  out.spec = spec;
  const auto& patients = cohort->patients();
  out.sublabels.resize(patients.size());
  const auto missing = [](const PatientRecord& p, const char* field) {
    return data_error("patient " + p.patient_id + ": " + field + " is NA but the " +
                      "labeling requires it");
  };
  for (std::size_t i = 0; i < patients.size(); ++i) {
    const auto& p = patients[i];
    if (p.msi_status == MsiStatus::kMss) {
      if (spec.exclude_mss_cimp_h_from_train && p.split == Split::kTrain) {
        if (!p.genomic.cimp_status) throw missing(p, "cimp_status");
        if (*p.genomic.cimp_status == CimpStatus::kCimpH) {
          out.excluded_train_patients.insert(p.patient_id);
          continue;
        }
      }
      out.sublabels[i] = SubLabel::kMss;
      continue;
    }
    bool above = false;
    switch (spec.variant) {
      case Variant::kBaseline:
        break;
      case Variant::kSnp:
        if (!p.genomic.snp_count) throw missing(p, "snp_count");
        above = static_cast<double>(*p.genomic.snp_count) > *spec.threshold;
        break;
      case Variant::kCnv:
        if (!p.genomic.cnv_fraction) throw missing(p, "cnv_fraction");
        above = *p.genomic.cnv_fraction > *spec.threshold;
        break;
      case Variant::kCimp:
        if (!p.genomic.cimp_status) throw missing(p, "cimp_status");
        above = *p.genomic.cimp_status == CimpStatus::kCimpH;
        break;
    }
    out.sublabels[i] = above ? SubLabel::kMsi2 : SubLabel::kMsi1;
  }
  return out;
}

ClassCounts class_counts(const LabeledCohort& labeled, Split split) {
  ClassCounts counts{};
  const auto& patients = labeled.cohort().patients();
  for (std::size_t i = 0; i < patients.size(); ++i) {
    if (patients[i].split != split || !labeled.sublabels[i]) continue;
    auto& c = counts[static_cast<int>(*labeled.sublabels[i])];
    ++c.patients;
    c.patches += patients[i].patches.size();
  }
  return counts;
}

void write_sublabels(const LabeledCohort& labeled, std::ostream& out) {
  out << "patient_id,sublabel,excluded\n";
  const auto& patients = labeled.cohort().patients();
  for (std::size_t i = 0; i < patients.size(); ++i) {
    const auto& s = labeled.sublabels[i];
    out << patients[i].patient_id << ',' << (s ? to_string(*s) : "NA") << ','
        << (s ? "false" : "true") << '\n';
  }
}

}  // namespace bp
