// SPDX-License-Identifier: Apache-2.0
//
// Softmax classifier heads: a stack of dense layers with ReLU between them
// and a softmax on the last. Class order is [MSS, MSI_1, MSI_2]; two-class
// heads drop MSI_2.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bp/cohort.hpp"
#include "bp/rng.hpp"

namespace bp {

struct TrainConfig {
  int epochs = 15;
  int batch_size = 64;
  double learning_rate = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::vector<int> hidden_dims{32};
  std::uint64_t seed = 0;
  bool weighted_sampling = true;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Dense layer, weights stored row-major as [out][in].
struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  Layer() = default;
  Layer(std::size_t in_dim, std::size_t out_dim)
      : in(in_dim), out(out_dim), weights(in_dim * out_dim, 0.0), bias(out_dim, 0.0) {}

  double& w(std::size_t o, std::size_t i) { return weights[o * in + i]; }
  double w(std::size_t o, std::size_t i) const { return weights[o * in + i]; }

  bool operator==(const Layer&) const = default;
};

/// Parameter-shaped container, also used for gradients and Adam moments.
using Parameters = std::vector<Layer>;

struct TrainingProvenance {
  TrainConfig config;
  int fold = -1;
  int best_epoch = -1;  // 1-based; 0 means the initialization was kept
  std::vector<double> epoch_val_auroc;
  std::string labeling;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const TrainingProvenance&) const = default;
};

class HeadModel {
 public:
  HeadModel() = default;
  /// Zero-initialized parameters.
  HeadModel(std::size_t input_dim, std::span<const int> hidden_dims, std::size_t n_classes);

  /// Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases.
  static HeadModel initialized(std::size_t input_dim, std::span<const int> hidden_dims,
                               std::size_t n_classes, Rng& rng);

  std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  std::size_t n_classes() const { return layers_.empty() ? 0 : layers_.back().out; }

  Parameters& parameters() { return layers_; }
  const Parameters& parameters() const { return layers_; }

  TrainingProvenance& provenance() { return provenance_; }
  const TrainingProvenance& provenance() const { return provenance_; }

  /// Class probabilities for one input row.
  std::vector<double> forward(std::span<const double> x) const;
  std::vector<double> forward(std::span<const float> x) const;

  bool all_finite() const;

  bool operator==(const HeadModel&) const = default;

 private:
  Parameters layers_;
  TrainingProvenance provenance_;
};

struct PatchPrediction {
  std::string patch_id;
  std::vector<double> probs;
};

/// Order-preserving; throws on input dimension mismatch.
std::vector<PatchPrediction> predict(const HeadModel& model,
                                     std::span<const PatchEmbedding> patches);

struct LabeledRow {
  std::span<const double> x;
  int label = 0;
};

struct LossAndGrad {
  double loss = 0.0;
  Parameters gradients;
};

/// Mean cross-entropy over the batch with exact analytic gradients.
LossAndGrad loss_and_grad(const HeadModel& model, std::span<const LabeledRow> batch);

/// Zero-valued container with the same shape as `like`.
Parameters zeros_like(const Parameters& like);

namespace detail {

struct Workspace {
  std::vector<std::vector<double>> activations;
  std::vector<std::vector<double>> deltas;
};

/// Adds d(-log p[label])/dparams into `grad` and returns the sample loss.
template <typename T>
double accumulate_sample(const Parameters& params, std::span<const T> x, int label,
                         Parameters& grad, Workspace& ws);

/// Forward pass writing probabilities into ws.activations.back().
template <typename T>
const std::vector<double>& forward_into(const Parameters& params, std::span<const T> x,
                                        Workspace& ws);

}  // namespace detail

// Model file: JSON document; parameter arrays are base64 of little-endian
// IEEE-754 doubles, so save/load is bit-exact.
nlohmann::json model_to_json(const HeadModel& model);
HeadModel model_from_json(const nlohmann::json& j);
void save_model(const HeadModel& model, const std::filesystem::path& path);
HeadModel load_model(const std::filesystem::path& path);

}  // namespace bp
