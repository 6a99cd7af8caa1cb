// SPDX-License-Identifier: Apache-2.0
#include "bp/sweep.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "bp/error.hpp"
#include "bp/experiment.hpp"
#include "bp/trainer.hpp"
#include "bp/util.hpp"

namespace bp {

SweepResult sweep_snp_threshold(std::shared_ptr<const Cohort> cohort, std::span<const double> candidates,
                                const FoldPlan& plan, const TrainConfig& cfg, int jobs) {
  if (candidates.empty()) throw usage_error("sweep needs at least one candidate threshold");
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (!(candidates[i] > candidates[i - 1])) throw usage_error("sweep candidates must be strictly increasing");
  }
  if (plan.k < 1) throw usage_error("sweep needs a fold plan with at least one fold");
  const auto train_patients = plan.training_patients(0);
  const auto val_patients = plan.fold_patients(0);

  SweepResult result;
  result.table.resize(candidates.size());
  parallel_for(static_cast<int>(candidates.size()), jobs, [&](int c) {
    auto& row = result.table[static_cast<std::size_t>(c)];
    row.threshold = candidates[static_cast<std::size_t>(c)];
    const auto labeled = relabel(cohort, LabelingSpec::snp(row.threshold));
    std::array<std::size_t, 3> present{};
    for (PatientIndex i : train_patients) ++present[static_cast<int>(*labeled.sublabels[i])];
    if (present[1] == 0 || present[2] == 0) {
      row.note = present[1] == 0 ? "no MSI_1 training patients" : "no MSI_2 training patients";
      return;
    }
    const auto model = train(labeled, train_patients, val_patients, cfg, 0);
    const auto& log = model.provenance().epoch_val_auroc;
    row.auroc = *std::max_element(log.begin(), log.end());
  });

  bool found = false;
  double best = 0.0;
  for (const auto& row : result.table) {
    if (row.auroc && (!found || *row.auroc > best)) {
      best = *row.auroc;
      result.best_threshold = row.threshold;
      found = true;
    }
  }
  if (!found) throw degenerate_error("every sweep candidate left an MSI sub-class empty");
  return result;
}

std::vector<double> parse_candidates(std::string_view text) {
  const auto parse = [&](std::string_view s) {
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw usage_error("bad candidate value '" + std::string(s) + "'");
    }
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
      const auto colon = text.find(':', start);
      parts.push_back(text.substr(start, colon == std::string_view::npos ? colon : colon - start));
      if (colon == std::string_view::npos) break;
      start = colon + 1;
    }
    if (parts.size() != 3) throw usage_error("candidate range must be lo:hi:step");
    const double lo = parse(parts[0]), hi = parse(parts[1]), step = parse(parts[2]);
    if (!(step > 0) || hi < lo) throw usage_error("candidate range needs step > 0 and hi >= lo");
    for (long i = 0;; ++i) {
      const double v = lo + static_cast<double>(i) * step;
      if (v > hi + 1e-9 * step) break;
      out.push_back(v);
    }
  } else {
    for (auto cell : split_csv_line(text)) out.push_back(parse(cell));
  }
  if (out.empty()) throw usage_error("no candidate thresholds");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (!(out[i] > out[i - 1])) throw usage_error("sweep candidates must be strictly increasing");
  }
  return out;
}

void write_sweep_table(const SweepResult& sweep, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "threshold,val_auroc,note\n";
  for (const auto& row : sweep.table) {
    out << format_double(row.threshold) << ',' << (row.auroc ? format_double(*row.auroc) : "NA") << ','
        << row.note << '\n';
  }
  write_file(path, out.str());
}

}  // namespace bp
