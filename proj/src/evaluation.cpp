// SPDX-License-Identifier: Apache-2.0
#include "bp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bp/error.hpp"
#include "bp/util.hpp"

namespace bp {

std::vector<Scored> FoldScores::test_scored() const {
  std::vector<Scored> out;
  out.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) out.push_back({test[i].p_msi, test_positive[i]});
  return out;
}

const PairedComparison* EvaluationReport::find_paired(std::string_view comparator,
                                                      std::string_view metric) const {
  for (const auto& p : paired) {
    if (p.comparator == comparator && p.metric == metric) return &p;
  }
  return nullptr;
}

namespace {

MetricSummary summarize(std::vector<double> values) {
  MetricSummary s;
  s.interval = t_interval(values);
  s.interval.lower = std::clamp(s.interval.lower, 0.0, 1.0);
  s.interval.upper = std::clamp(s.interval.upper, 0.0, 1.0);
  s.per_fold = std::move(values);
  return s;
}

}  // namespace

EvaluationReport build_report(const std::string& model, const std::string& labeling,
                              std::span<const FoldScores> folds) {
  if (folds.empty()) throw usage_error("report needs at least one fold");
  EvaluationReport r;
  r.model = model;
  r.labeling = labeling;

  std::vector<std::vector<Scored>> validation;
  for (const auto& f : folds) validation.push_back(f.validation);
  const ThresholdChoice choice = select_f1_threshold(validation);
  r.f1_threshold = choice.threshold;
  r.f1_threshold_validation_f1 = choice.mean_f1;
  r.f1_threshold_degenerate = choice.degenerate;
  if (choice.degenerate) r.flags.push_back("f1 threshold degenerate: validation scores not distinct");

  std::vector<double> aurocs, aps, f1s;
  std::vector<std::vector<CurvePoint>> rocs, prs;
  for (const auto& f : folds) {
    const auto scored = f.test_scored();
    FoldEvaluation e;
    e.fold = f.fold;
    e.auroc = auroc(scored);
    e.ap = average_precision(scored);
    const auto f1 = f1_at_threshold(scored, r.f1_threshold);
    e.f1 = f1.f1;
    e.precision = f1.precision;
    e.recall = f1.recall;
    e.confusion = f1.confusion;
    e.roc = roc_curve(scored);
    e.pr = pr_curve(scored);
    e.test_scores = f.test;
    e.test_positive = f.test_positive;
    aurocs.push_back(e.auroc);
    aps.push_back(e.ap);
    f1s.push_back(e.f1);
    rocs.push_back(e.roc);
    prs.push_back(e.pr);
    r.mean_confusion.tp += e.confusion.tp;
    r.mean_confusion.fp += e.confusion.fp;
    r.mean_confusion.fn += e.confusion.fn;
    r.mean_confusion.tn += e.confusion.tn;
    r.folds.push_back(std::move(e));
  }
  const double n = static_cast<double>(folds.size());
  r.mean_confusion.tp /= n;
  r.mean_confusion.fp /= n;
  r.mean_confusion.fn /= n;
  r.mean_confusion.tn /= n;
  r.auroc = summarize(std::move(aurocs));
  r.ap = summarize(std::move(aps));
  r.f1 = summarize(std::move(f1s));
  r.roc_mean = mean_roc(rocs);
  r.pr_mean = mean_pr(prs);
  return r;
}

void add_paired_tests(EvaluationReport& report, const EvaluationReport& comparator,
                      const std::string& comparator_name) {
  if (report.folds.size() != comparator.folds.size()) {
    throw usage_error("paired comparison needs the same number of folds");
  }
  const auto add = [&](const char* metric, const MetricSummary& a, const MetricSummary& b) {
    report.paired.push_back({comparator_name, metric, paired_t_test(a.per_fold, b.per_fold)});
    if (report.paired.back().test.degenerate) {
      report.flags.push_back(std::string("paired ") + metric + " vs " + comparator_name +
                             ": zero-variance differences");
    }
  };
  add("auroc", report.auroc, comparator.auroc);
  add("ap", report.ap, comparator.ap);
  add("f1", report.f1, comparator.f1);
}

FoldScores score_fold(const HeadModel& model, const Cohort& cohort, const FoldPlan& plan, int fold) {
  FoldScores s;
  s.fold = fold;
  const auto test = cohort.patients_in(Split::kTest);
  if (test.empty()) throw usage_error("cohort has no TEST patients");
  s.test = score_patients(model, cohort, test);
  for (PatientIndex i : test) s.test_positive.push_back(cohort.patient(i).msi_status == MsiStatus::kMsi);
  const auto val = plan.fold_patients(fold);
  const auto val_scores = score_patients(model, cohort, val);
  for (std::size_t i = 0; i < val.size(); ++i) {
    s.validation.push_back({val_scores[i].p_msi, cohort.patient(val[i]).msi_status == MsiStatus::kMsi});
  }
  return s;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double get_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

json curve_json(const std::vector<CurvePoint>& c) {
  json a = json::array();
  for (const auto& p : c) a.push_back({p.x, p.y});
  return a;
}

std::vector<CurvePoint> curve_from(const json& j) {
  std::vector<CurvePoint> c;
  for (const auto& p : j) c.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return c;
}

json confusion_json(const Confusion& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

Confusion confusion_from(const json& j) {
  return {j.at("tp").get<double>(), j.at("fp").get<double>(), j.at("fn").get<double>(),
          j.at("tn").get<double>()};
}

json summary_json(const MetricSummary& s) {
  return {{"per_fold", s.per_fold},
          {"mean", s.interval.mean},
          {"sd", s.interval.sd},
          {"ci95_t", {s.interval.lower, s.interval.upper}}};
}

MetricSummary summary_from(const json& j) {
  MetricSummary s;
  s.per_fold = j.at("per_fold").get<std::vector<double>>();
  s.interval.mean = j.at("mean").get<double>();
  s.interval.sd = j.at("sd").get<double>();
  s.interval.lower = j.at("ci95_t").at(0).get<double>();
  s.interval.upper = j.at("ci95_t").at(1).get<double>();
  return s;
}

json mean_curve_json(const MeanCurve& c) {
  return {{"grid", c.grid}, {"mean", c.mean}, {"lower", c.lower}, {"upper", c.upper}};
}

MeanCurve mean_curve_from(const json& j) {
  return {j.at("grid").get<std::vector<double>>(), j.at("mean").get<std::vector<double>>(),
          j.at("lower").get<std::vector<double>>(), j.at("upper").get<std::vector<double>>()};
}

}  // namespace

nlohmann::json report_to_json(const EvaluationReport& r) {
  json folds = json::array();
  for (const auto& f : r.folds) {
    json scores = json::array();
    for (std::size_t i = 0; i < f.test_scores.size(); ++i) {
      scores.push_back({{"patient_id", f.test_scores[i].patient_id},
                        {"p_msi", f.test_scores[i].p_msi},
                        {"n_patches", f.test_scores[i].n_patches},
                        {"msi", static_cast<bool>(f.test_positive[i])}});
    }
    folds.push_back({{"fold", f.fold},
                     {"auroc", f.auroc},
                     {"ap", f.ap},
                     {"f1", f.f1},
                     {"precision", f.precision},
                     {"recall", f.recall},
                     {"confusion", confusion_json(f.confusion)},
                     {"roc", curve_json(f.roc)},
                     {"pr", curve_json(f.pr)},
                     {"test_scores", scores}});
  }
  json paired = json::array();
  for (const auto& p : r.paired) {
    paired.push_back({{"comparator", p.comparator},
                      {"metric", p.metric},
                      {"t", number(p.test.t)},
                      {"p", p.test.p},
                      {"n", p.test.n},
                      {"degenerate", p.test.degenerate}});
  }
  return {{"schema_version", r.schema_version},
          {"model", r.model},
          {"labeling", r.labeling},
          {"metrics", {{"auroc", summary_json(r.auroc)}, {"ap", summary_json(r.ap)}, {"f1", summary_json(r.f1)}}},
          {"f1_threshold",
           {{"value", r.f1_threshold},
            {"validation_mean_f1", r.f1_threshold_validation_f1},
            {"degenerate", r.f1_threshold_degenerate}}},
          {"mean_confusion", confusion_json(r.mean_confusion)},
          {"roc_mean", mean_curve_json(r.roc_mean)},
          {"pr_mean", mean_curve_json(r.pr_mean)},
          {"paired_tests", paired},
          {"flags", r.flags},
          {"folds", folds}};
}

EvaluationReport report_from_json(const nlohmann::json& j) {
  try {
    EvaluationReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion) {
      throw data_error("unsupported report schema version " + std::to_string(r.schema_version));
    }
    r.model = j.at("model").get<std::string>();
    r.labeling = j.at("labeling").get<std::string>();
    const auto& m = j.at("metrics");
    r.auroc = summary_from(m.at("auroc"));
    r.ap = summary_from(m.at("ap"));
    r.f1 = summary_from(m.at("f1"));
    const auto& t = j.at("f1_threshold");
    r.f1_threshold = t.at("value").get<double>();
    r.f1_threshold_validation_f1 = t.at("validation_mean_f1").get<double>();
    r.f1_threshold_degenerate = t.at("degenerate").get<bool>();
    r.mean_confusion = confusion_from(j.at("mean_confusion"));
    r.roc_mean = mean_curve_from(j.at("roc_mean"));
    r.pr_mean = mean_curve_from(j.at("pr_mean"));
    for (const auto& p : j.at("paired_tests")) {
      PairedComparison c;
      c.comparator = p.at("comparator").get<std::string>();
      c.metric = p.at("metric").get<std::string>();
      c.test.t = get_number(p.at("t"));
      c.test.p = p.at("p").get<double>();
      c.test.n = p.at("n").get<std::size_t>();
      c.test.degenerate = p.at("degenerate").get<bool>();
      r.paired.push_back(std::move(c));
    }
    r.flags = j.at("flags").get<std::vector<std::string>>();
    for (const auto& jf : j.at("folds")) {
      FoldEvaluation f;
      f.fold = jf.at("fold").get<int>();
      f.auroc = jf.at("auroc").get<double>();
      f.ap = jf.at("ap").get<double>();
      f.f1 = jf.at("f1").get<double>();
      f.precision = jf.at("precision").get<double>();
      f.recall = jf.at("recall").get<double>();
      f.confusion = confusion_from(jf.at("confusion"));
      f.roc = curve_from(jf.at("roc"));
      f.pr = curve_from(jf.at("pr"));
      for (const auto& s : jf.at("test_scores")) {
        f.test_scores.push_back({s.at("patient_id").get<std::string>(), s.at("p_msi").get<double>(),
                                 s.at("n_patches").get<std::size_t>()});
        f.test_positive.push_back(s.at("msi").get<bool>());
      }
      r.folds.push_back(std::move(f));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("malformed report: ") + e.what());
  }
}

void write_report(const EvaluationReport& report, const std::filesystem::path& dir,
                  const std::string& stem) {
  std::filesystem::create_directories(dir);
  write_file(dir / (stem + ".json"), report_to_json(report).dump(1) + "\n");
  const auto write_curve = [&](const std::string& name, const char* header,
                               const std::vector<CurvePoint>& c) {
    std::ostringstream out;
    out << header << '\n';
    for (const auto& p : c) out << format_double(p.x) << ',' << format_double(p.y) << '\n';
    write_file(dir / name, out.str());
  };
  std::ostringstream scores;
  scores << "fold,patient_id,p_msi,n_patches,msi\n";
  for (const auto& f : report.folds) {
    write_curve(stem + "_roc_fold" + std::to_string(f.fold) + ".csv", "fpr,tpr", f.roc);
    write_curve(stem + "_pr_fold" + std::to_string(f.fold) + ".csv", "recall,precision", f.pr);
    for (std::size_t i = 0; i < f.test_scores.size(); ++i) {
      scores << f.fold << ',' << f.test_scores[i].patient_id << ',' << format_double(f.test_scores[i].p_msi)
             << ',' << f.test_scores[i].n_patches << ',' << (f.test_positive[i] ? "MSI" : "MSS") << '\n';
    }
  }
  write_file(dir / (stem + "_scores.csv"), scores.str());
  const auto write_mean = [&](const std::string& name, const char* header, const MeanCurve& c) {
    std::ostringstream out;
    out << header << '\n';
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      out << format_double(c.grid[i]) << ',' << format_double(c.mean[i]) << ','
          << format_double(c.lower[i]) << ',' << format_double(c.upper[i]) << '\n';
    }
    write_file(dir / name, out.str());
  };
  write_mean(stem + "_roc_mean.csv", "fpr,tpr,tpr_lower,tpr_upper", report.roc_mean);
  write_mean(stem + "_pr_mean.csv", "recall,precision,precision_lower,precision_upper", report.pr_mean);
}

}  // namespace bp
