// SPDX-License-Identifier: Apache-2.0
//
// Mini-batch Adam on patch-level cross-entropy with inverse-frequency class
// sampling and best-epoch checkpointing on patient-level validation AUROC.
//
// Random streams: initialization uses derive_seed(seed, kInit, fold) and
// batch sampling derive_seed(seed, kSample, fold), each an independent
// mt19937_64. A weighted epoch draws as many patches as the training set
// holds, each by picking a class uniformly and then a patch of that class
// uniformly, which is exactly sampling with weight 1/(class patch count).
#pragma once

#include <span>
#include <vector>

#include "bp/head.hpp"
#include "bp/labeling.hpp"

namespace bp {

/// Rows of a training problem. Feature spans must outlive the problem.
template <typename T>
struct TrainingRows {
  std::vector<std::span<const T>> features;
  std::vector<int> labels;
};

/// Validation rows grouped into patients. The checkpoint metric is AUROC of
/// the mean patch MSI probability per patient against patient labels.
template <typename T>
struct ValidationRows {
  std::vector<std::span<const T>> features;
  std::vector<std::size_t> group;  // index into group_labels
  std::vector<bool> group_positive;
};

class ClassBalancedSampler {
 public:
  ClassBalancedSampler(std::span<const int> labels, std::size_t n_classes);
  std::size_t draw(Rng& rng) const;

 private:
  std::vector<std::vector<std::size_t>> by_class_;
};

std::size_t label_index(SubLabel s, std::size_t n_classes);

template <typename T>
HeadModel fit_head(const TrainingRows<T>& train, const ValidationRows<T>& val,
                   std::size_t n_classes, const TrainConfig& cfg, int fold);

/// Patient-level validation AUROC of a model on grouped rows.
template <typename T>
double validation_auroc(const HeadModel& model, const ValidationRows<T>& val);

/// Trains on every patch of `train_patients` with its sub-label; validates
/// on `val_patients` against base MSI status.
HeadModel train(const LabeledCohort& labeled, std::span<const PatientIndex> train_patients,
                std::span<const PatientIndex> val_patients, const TrainConfig& cfg,
                int fold = 0);

}  // namespace bp
