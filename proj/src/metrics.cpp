// SPDX-License-Identifier: Apache-2.0
#include "bp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bp/error.hpp"
#include "bp/stats.hpp"

namespace bp {

namespace {

struct Counts {
  std::size_t pos = 0, neg = 0;
};

Counts count(std::span<const Scored> items) {
  Counts c;
  for (const auto& s : items) (s.positive ? c.pos : c.neg)++;
  return c;
}

std::vector<Scored> sorted_descending(std::span<const Scored> items) {
  std::vector<Scored> v(items.begin(), items.end());
  std::stable_sort(v.begin(), v.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });
  return v;
}

// Calls fn(tp, fp) with cumulative counts after each group of tied scores,
// walking from the highest score down.
template <typename Fn>
void for_each_step(const std::vector<Scored>& desc, Fn&& fn) {
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < desc.size()) {
    std::size_t j = i;
    while (j < desc.size() && desc[j].score == desc[i].score) {
      (desc[j].positive ? tp : fp)++;
      ++j;
    }
    fn(tp, fp);
    i = j;
  }
}

void require_both(const Counts& c, const char* what) {
  if (c.pos == 0 || c.neg == 0) {
    throw degenerate_error(std::string(what) + " is undefined without both positive and negative items");
  }
}

}  // namespace

double auroc(std::span<const Scored> items) {
  const Counts c = count(items);
  require_both(c, "AUROC");
  std::vector<Scored> asc(items.begin(), items.end());
  std::sort(asc.begin(), asc.end(), [](const Scored& a, const Scored& b) { return a.score < b.score; });
  // Twice the Mann-Whitney U, kept integral so the result is exact.
  double twice_u = 0.0;
  std::size_t neg_below = 0;
  std::size_t i = 0;
  while (i < asc.size()) {
    std::size_t j = i, pos = 0, neg = 0;
    while (j < asc.size() && asc[j].score == asc[i].score) {
      (asc[j].positive ? pos : neg)++;
      ++j;
    }
    twice_u += static_cast<double>(2 * pos * neg_below + pos * neg);
    neg_below += neg;
    i = j;
  }
  return twice_u / (2.0 * static_cast<double>(c.pos) * static_cast<double>(c.neg));
}

double average_precision(std::span<const Scored> items) {
  const Counts c = count(items);
  if (c.pos == 0) throw degenerate_error("average precision is undefined without positives");
  const auto desc = sorted_descending(items);
  double ap = 0.0, prev_recall = 0.0;
  const double n_pos = static_cast<double>(c.pos);
  for_each_step(desc, [&](std::size_t tp, std::size_t fp) {
    const double recall = static_cast<double>(tp) / n_pos;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  });
  return ap;
}

F1Result f1_at_threshold(std::span<const Scored> items, double threshold) {
  F1Result r;
  for (const auto& s : items) {
    const bool predicted = s.score >= threshold;
    if (predicted && s.positive) r.confusion.tp += 1;
    else if (predicted) r.confusion.fp += 1;
    else if (s.positive) r.confusion.fn += 1;
    else r.confusion.tn += 1;
  }
  const auto& m = r.confusion;
  r.precision = m.tp + m.fp > 0 ? m.tp / (m.tp + m.fp) : 0.0;
  r.recall = m.tp + m.fn > 0 ? m.tp / (m.tp + m.fn) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

ThresholdChoice select_f1_threshold(std::span<const std::vector<Scored>> folds) {
  if (folds.empty()) throw usage_error("select_f1_threshold needs at least one fold");
  std::set<double> distinct;
  for (const auto& f : folds) {
    for (const auto& s : f) distinct.insert(s.score);
  }
  std::set<double> candidates{0.0, 1.0};
  for (auto it = distinct.begin(); it != distinct.end(); ++it) {
    const auto next = std::next(it);
    if (next == distinct.end()) break;
    candidates.insert(0.5 * (*it + *next));
  }
  ThresholdChoice best;
  best.degenerate = distinct.size() < 2;
  bool first = true;
  for (double t : candidates) {
    double sum = 0.0;
    for (const auto& f : folds) sum += f1_at_threshold(f, t).f1;
    const double m = sum / static_cast<double>(folds.size());
    if (first || m > best.mean_f1) {
      best.threshold = t;
      best.mean_f1 = m;
      first = false;
    }
  }
  return best;
}

std::vector<CurvePoint> roc_curve(std::span<const Scored> items) {
  const Counts c = count(items);
  require_both(c, "ROC curve");
  const auto desc = sorted_descending(items);
  std::vector<CurvePoint> out{{0.0, 0.0}};
  for_each_step(desc, [&](std::size_t tp, std::size_t fp) {
    out.push_back({static_cast<double>(fp) / static_cast<double>(c.neg),
                   static_cast<double>(tp) / static_cast<double>(c.pos)});
  });
  return out;
}

std::vector<CurvePoint> pr_curve(std::span<const Scored> items) {
  const Counts c = count(items);
  require_both(c, "PR curve");
  const auto desc = sorted_descending(items);
  std::vector<CurvePoint> out;
  for_each_step(desc, [&](std::size_t tp, std::size_t fp) {
    out.push_back({static_cast<double>(tp) / static_cast<double>(c.pos),
                   static_cast<double>(tp) / static_cast<double>(tp + fp)});
  });
  return out;
}

double trapezoid_area(std::span<const CurvePoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].x - curve[i - 1].x) * 0.5 * (curve[i].y + curve[i - 1].y);
  }
  return area;
}

double interpolate_roc(std::span<const CurvePoint> roc, double fpr) {
  double exact = -1.0;
  for (const auto& p : roc) {
    if (p.x == fpr) exact = std::max(exact, p.y);
  }
  if (exact >= 0.0) return exact;
  for (std::size_t i = 1; i < roc.size(); ++i) {
    if (roc[i - 1].x < fpr && fpr < roc[i].x) {
      const double w = (fpr - roc[i - 1].x) / (roc[i].x - roc[i - 1].x);
      return roc[i - 1].y + w * (roc[i].y - roc[i - 1].y);
    }
  }
  return fpr <= 0.0 ? 0.0 : 1.0;
}

double interpolate_pr(std::span<const CurvePoint> pr, double recall) {
  double best = 0.0;
  for (const auto& p : pr) {
    if (p.x >= recall) best = std::max(best, p.y);
  }
  return best;
}

namespace {

template <typename Interp>
MeanCurve mean_curve(std::span<const std::vector<CurvePoint>> curves, Interp interp) {
  MeanCurve out;
  const std::size_t n = curves.size();
  for (std::size_t g = 0; g < kCurveGridPoints; ++g) {
    const double x = static_cast<double>(g) / static_cast<double>(kCurveGridPoints - 1);
    std::vector<double> ys;
    ys.reserve(n);
    for (const auto& c : curves) ys.push_back(interp(c, x));
    const double m = mean(ys);
    const double half = n >= 2 ? 1.96 * sample_sd(ys) / std::sqrt(static_cast<double>(n)) : 0.0;
    out.grid.push_back(x);
    out.mean.push_back(m);
    out.lower.push_back(std::clamp(m - half, 0.0, 1.0));
    out.upper.push_back(std::clamp(m + half, 0.0, 1.0));
  }
  return out;
}

}  // namespace

MeanCurve mean_roc(std::span<const std::vector<CurvePoint>> curves) {
  auto out = mean_curve(curves, [](const std::vector<CurvePoint>& c, double x) {
    return interpolate_roc(c, x);
  });
  return out;
}

MeanCurve mean_pr(std::span<const std::vector<CurvePoint>> curves) {
  return mean_curve(curves, [](const std::vector<CurvePoint>& c, double x) {
    return interpolate_pr(c, x);
  });
}

}  // namespace bp
