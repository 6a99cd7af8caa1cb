// SPDX-License-Identifier: Apache-2.0
#include "bp/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "bp/aggregation.hpp"
#include "bp/error.hpp"
#include "bp/metrics.hpp"

namespace bp {

ClassBalancedSampler::ClassBalancedSampler(std::span<const int> labels, std::size_t n_classes)
    : by_class_(n_classes) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class_.at(static_cast<std::size_t>(labels[i])).push_back(i);
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (by_class_[c].empty()) throw data_error("training class " + std::to_string(c) + " has zero patches");
  }
}

std::size_t ClassBalancedSampler::draw(Rng& rng) const {
  const auto& members = by_class_[rng.below(by_class_.size())];
  return members[rng.below(members.size())];
}

std::size_t label_index(SubLabel s, std::size_t n_classes) {
  const auto idx = static_cast<std::size_t>(s);
  if (idx >= n_classes) throw usage_error("sub-label MSI_2 on a two-class head");
  return idx;
}

template <typename T>
double validation_auroc(const HeadModel& model, const ValidationRows<T>& val) {
  std::vector<double> sums(val.group_positive.size(), 0.0);
  std::vector<std::size_t> counts(val.group_positive.size(), 0);
  detail::Workspace ws;
  for (std::size_t r = 0; r < val.features.size(); ++r) {
    const auto& probs = detail::forward_into(model.parameters(), val.features[r], ws);
    sums[val.group[r]] += patch_msi_probability(probs, model.n_classes());
    ++counts[val.group[r]];
  }
  std::vector<Scored> scored;
  scored.reserve(sums.size());
  for (std::size_t g = 0; g < sums.size(); ++g) {
    if (counts[g] == 0) continue;
    scored.push_back({sums[g] / static_cast<double>(counts[g]), val.group_positive[g]});
  }
  return auroc(scored);
}

namespace {

struct Adam {
  Parameters m, v;
  long step = 0;

  explicit Adam(const Parameters& like) : m(zeros_like(like)), v(zeros_like(like)) {}

  void update(Parameters& params, const Parameters& grad, const TrainConfig& cfg) {
    ++step;
    const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
    const auto apply = [&](std::vector<double>& p, const std::vector<double>& g,
                           std::vector<double>& mm, std::vector<double>& vv) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        mm[i] = cfg.adam_beta1 * mm[i] + (1.0 - cfg.adam_beta1) * g[i];
        vv[i] = cfg.adam_beta2 * vv[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
        const double mhat = mm[i] / c1;
        const double vhat = vv[i] / c2;
        p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
      }
    };
    for (std::size_t l = 0; l < params.size(); ++l) {
      apply(params[l].weights, grad[l].weights, m[l].weights, v[l].weights);
      apply(params[l].bias, grad[l].bias, m[l].bias, v[l].bias);
    }
  }
};

void zero(Parameters& p) {
  for (auto& l : p) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
}

}  // namespace

template <typename T>
HeadModel fit_head(const TrainingRows<T>& train, const ValidationRows<T>& val, std::size_t n_classes,
                   const TrainConfig& cfg, int fold) {
  cfg.validate();
  if (train.features.empty()) throw usage_error("training set is empty");
  if (train.features.size() != train.labels.size()) throw usage_error("training rows and labels differ in length");
  const std::size_t dim = train.features.front().size();
  const ClassBalancedSampler sampler(train.labels, n_classes);
  const std::size_t n_pos = static_cast<std::size_t>(
      std::count(val.group_positive.begin(), val.group_positive.end(), true));
  if (n_pos == 0 || n_pos == val.group_positive.size()) {
    throw degenerate_error("validation set has a single class; AUROC is undefined");
  }

  Rng init_rng(derive_seed(cfg.seed, Stream::kInit, static_cast<std::uint64_t>(fold)));
  HeadModel model = HeadModel::initialized(dim, cfg.hidden_dims, n_classes, init_rng);
  Rng rng(derive_seed(cfg.seed, Stream::kSample, static_cast<std::uint64_t>(fold)));

  Adam adam(model.parameters());
  Parameters grad = zeros_like(model.parameters());
  detail::Workspace ws;
  Parameters best = model.parameters();
  double best_auroc = -std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  std::vector<double> log;

  const std::size_t n = train.features.size();
  std::vector<std::size_t> order(n);
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.weighted_sampling) {
      for (auto& o : order) o = sampler.draw(rng);
    } else {
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.shuffle(std::span<std::size_t>(order));
    }
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < n; start += batch, ++batch_no) {
      const std::size_t stop = std::min(n, start + batch);
      zero(grad);
      double loss = 0.0;
      for (std::size_t r = start; r < stop; ++r) {
        const auto row = order[r];
        if (train.features[row].size() != dim) throw data_error("training rows differ in dimension");
        loss += detail::accumulate_sample(model.parameters(), train.features[row], train.labels[row], grad, ws);
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      loss *= inv;
      if (!std::isfinite(loss)) {
        throw numeric_error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_no));
      }
      for (auto& g : grad) {
        for (double& w : g.weights) w *= inv;
        for (double& b : g.bias) b *= inv;
      }
      adam.update(model.parameters(), grad, cfg);
    }
    if (!model.all_finite()) {
      throw numeric_error("non-finite parameters after epoch " + std::to_string(epoch));
    }
    const double a = validation_auroc(model, val);
    log.push_back(a);
    if (a > best_auroc) {
      best_auroc = a;
      best = model.parameters();
      best_epoch = epoch;
    }
  }
  model.parameters() = std::move(best);
  auto& prov = model.provenance();
  prov.config = cfg;
  prov.fold = fold;
  prov.best_epoch = best_epoch;
  prov.epoch_val_auroc = std::move(log);
  return model;
}

template HeadModel fit_head<float>(const TrainingRows<float>&, const ValidationRows<float>&,
                                   std::size_t, const TrainConfig&, int);
template HeadModel fit_head<double>(const TrainingRows<double>&, const ValidationRows<double>&,
                                    std::size_t, const TrainConfig&, int);
template double validation_auroc<float>(const HeadModel&, const ValidationRows<float>&);
template double validation_auroc<double>(const HeadModel&, const ValidationRows<double>&);

HeadModel train(const LabeledCohort& labeled, std::span<const PatientIndex> train_patients,
                std::span<const PatientIndex> val_patients, const TrainConfig& cfg, int fold) {
  const Cohort& cohort = labeled.cohort();
  if (!cohort.has_embeddings()) throw usage_error("training requires attached embeddings");
  if (train_patients.empty() || val_patients.empty()) {
    throw usage_error("training and validation patient sets must be nonempty");
  }
  const std::set<PatientIndex> train_set(train_patients.begin(), train_patients.end());
  for (PatientIndex v : val_patients) {
    if (train_set.count(v)) {
      throw usage_error("patient " + cohort.patient(v).patient_id + " is in both training and validation");
    }
  }
  const std::size_t n_classes = labeled.n_classes();
  TrainingRows<float> rows;
  for (PatientIndex pi : train_patients) {
    const auto& p = cohort.patient(pi);
    if (p.split != Split::kTrain) throw usage_error("training patient " + p.patient_id + " is not in TRAIN");
    if (labeled.excluded(pi)) {
      throw usage_error("training patient " + p.patient_id + " is excluded by the labeling");
    }
    const int label = static_cast<int>(label_index(*labeled.sublabels[pi], n_classes));
    for (std::size_t e : p.patches) {
      rows.features.emplace_back(cohort.embeddings()[e].vector);
      rows.labels.push_back(label);
    }
  }
  ValidationRows<float> val;
  for (std::size_t g = 0; g < val_patients.size(); ++g) {
    const auto& p = cohort.patient(val_patients[g]);
    if (p.split != Split::kTrain) throw usage_error("validation patient " + p.patient_id + " is not in TRAIN");
    val.group_positive.push_back(p.msi_status == MsiStatus::kMsi);
    for (std::size_t e : p.patches) {
      val.features.emplace_back(cohort.embeddings()[e].vector);
      val.group.push_back(g);
    }
  }
  std::vector<std::size_t> present(n_classes, 0);
  for (int l : rows.labels) ++present[static_cast<std::size_t>(l)];
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (present[c] == 0) {
      throw data_error("training class " + std::string(to_string(static_cast<SubLabel>(c))) +
                       " has zero patches");
    }
  }
  HeadModel model = fit_head(rows, val, n_classes, cfg, fold);
  model.provenance().labeling = labeled.spec.describe();
  return model;
}

}  // namespace bp
