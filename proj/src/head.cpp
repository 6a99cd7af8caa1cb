// SPDX-License-Identifier: Apache-2.0
#include "bp/head.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "bp/error.hpp"
#include "bp/util.hpp"

namespace bp {

void TrainConfig::validate() const {
  if (epochs < 1) throw usage_error("epochs must be >= 1");
  if (batch_size < 1) throw usage_error("batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw usage_error("learning_rate must be finite and non-negative");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw usage_error("Adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw usage_error("adam_epsilon must be > 0");
  for (int h : hidden_dims) {
    if (h < 1) throw usage_error("hidden layer widths must be >= 1");
  }
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"epochs", c.epochs},
                     {"batch_size", c.batch_size},
                     {"learning_rate", c.learning_rate},
                     {"adam_beta1", c.adam_beta1},
                     {"adam_beta2", c.adam_beta2},
                     {"adam_epsilon", c.adam_epsilon},
                     {"hidden_dims", c.hidden_dims},
                     {"seed", c.seed},
                     {"weighted_sampling", c.weighted_sampling},
                     {"checkpoint_metric", "patient_val_auroc"},
                     {"learning_rate_schedule", "constant"}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
  c.hidden_dims = j.value("hidden_dims", c.hidden_dims);
  c.seed = j.value("seed", c.seed);
  c.weighted_sampling = j.value("weighted_sampling", c.weighted_sampling);
}

HeadModel::HeadModel(std::size_t input_dim, std::span<const int> hidden_dims,
                     std::size_t n_classes) {
  if (input_dim == 0) throw usage_error("head input dimension must be positive");
  if (n_classes < 2) throw usage_error("head needs at least two classes");
  std::size_t in = input_dim;
  for (int h : hidden_dims) {
    if (h < 1) throw usage_error("hidden layer widths must be >= 1");
    layers_.emplace_back(in, static_cast<std::size_t>(h));
    in = static_cast<std::size_t>(h);
  }
  layers_.emplace_back(in, n_classes);
}

HeadModel HeadModel::initialized(std::size_t input_dim, std::span<const int> hidden_dims,
                                 std::size_t n_classes, Rng& rng) {
  HeadModel m(input_dim, hidden_dims, n_classes);
  for (auto& layer : m.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    for (auto& w : layer.weights) w = rng.uniform(-limit, limit);
  }
  return m;
}

bool HeadModel::all_finite() const {
  for (const auto& l : layers_) {
    for (double w : l.weights) if (!std::isfinite(w)) return false;
    for (double b : l.bias) if (!std::isfinite(b)) return false;
  }
  return true;
}

namespace detail {

template <typename T>
const std::vector<double>& forward_into(const Parameters& params, std::span<const T> x,
                                        Workspace& ws) {
  ws.activations.resize(params.size() + 1);
  auto& input = ws.activations[0];
  input.assign(x.begin(), x.end());
  for (std::size_t l = 0; l < params.size(); ++l) {
    const Layer& layer = params[l];
    const auto& a = ws.activations[l];
    auto& z = ws.activations[l + 1];
    z.resize(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* row = layer.weights.data() + o * layer.in;
      double s = layer.bias[o];
      for (std::size_t i = 0; i < layer.in; ++i) s += row[i] * a[i];
      z[o] = s;
    }
    if (l + 1 < params.size()) {
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    }
  }
  // Softmax in place, keeping the shifted logits' normalizer implicit.
  auto& out = ws.activations.back();
  const double top = *std::max_element(out.begin(), out.end());
  double norm = 0.0;
  for (double& v : out) {
    v = std::exp(v - top);
    norm += v;
  }
  for (double& v : out) v /= norm;
  return out;
}

template <typename T>
double accumulate_sample(const Parameters& params, std::span<const T> x, int label,
                         Parameters& grad, Workspace& ws) {
  const std::size_t n_layers = params.size();
  ws.activations.resize(n_layers + 1);
  ws.activations[0].assign(x.begin(), x.end());
  // Forward keeping logits for a stable loss.
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Layer& layer = params[l];
    const auto& a = ws.activations[l];
    auto& z = ws.activations[l + 1];
    z.resize(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* row = layer.weights.data() + o * layer.in;
      double s = layer.bias[o];
      for (std::size_t i = 0; i < layer.in; ++i) s += row[i] * a[i];
      z[o] = s;
    }
    if (l + 1 < n_layers) {
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    }
  }
  auto& logits = ws.activations.back();
  const double top = *std::max_element(logits.begin(), logits.end());
  double norm = 0.0;
  for (double v : logits) norm += std::exp(v - top);
  const double loss = std::log(norm) - (logits[label] - top);

  ws.deltas.resize(n_layers);
  auto& delta_out = ws.deltas[n_layers - 1];
  delta_out.resize(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    delta_out[c] = std::exp(logits[c] - top) / norm - (static_cast<int>(c) == label ? 1.0 : 0.0);
  }
  for (std::size_t l = n_layers; l-- > 0;) {
    const Layer& layer = params[l];
    Layer& g = grad[l];
    const auto& a = ws.activations[l];
    const auto& delta = ws.deltas[l];
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      double* grow = g.weights.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) grow[i] += d * a[i];
      g.bias[o] += d;
    }
    if (l == 0) break;
    auto& prev = ws.deltas[l - 1];
    prev.assign(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = layer.weights.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) prev[i] += row[i] * d;
    }
    for (std::size_t i = 0; i < layer.in; ++i) {
      if (!(a[i] > 0.0)) prev[i] = 0.0;
    }
  }
  return loss;
}

template const std::vector<double>& forward_into<float>(const Parameters&, std::span<const float>,
                                                        Workspace&);
template const std::vector<double>& forward_into<double>(const Parameters&,
                                                         std::span<const double>, Workspace&);
template double accumulate_sample<float>(const Parameters&, std::span<const float>, int,
                                         Parameters&, Workspace&);
template double accumulate_sample<double>(const Parameters&, std::span<const double>, int,
                                          Parameters&, Workspace&);

}  // namespace detail

std::vector<double> HeadModel::forward(std::span<const double> x) const {
  if (x.size() != input_dim()) throw usage_error("input dimension mismatch");
  detail::Workspace ws;
  return detail::forward_into(layers_, x, ws);
}

std::vector<double> HeadModel::forward(std::span<const float> x) const {
  if (x.size() != input_dim()) throw usage_error("input dimension mismatch");
  detail::Workspace ws;
  return detail::forward_into(layers_, x, ws);
}

std::vector<PatchPrediction> predict(const HeadModel& model,
                                     std::span<const PatchEmbedding> patches) {
  std::vector<PatchPrediction> out;
  out.reserve(patches.size());
  detail::Workspace ws;
  for (const auto& p : patches) {
    if (p.vector.size() != model.input_dim()) {
      throw data_error("patch " + p.patch_id + " has dimension " + std::to_string(p.vector.size()) +
                       ", model expects " + std::to_string(model.input_dim()));
    }
    out.push_back({p.patch_id, detail::forward_into(model.parameters(),
                                                    std::span<const float>(p.vector), ws)});
  }
  return out;
}

Parameters zeros_like(const Parameters& like) {
  Parameters out;
  out.reserve(like.size());
  for (const auto& l : like) out.emplace_back(l.in, l.out);
  return out;
}

LossAndGrad loss_and_grad(const HeadModel& model, std::span<const LabeledRow> batch) {
  if (batch.empty()) throw usage_error("loss_and_grad: empty batch");
  LossAndGrad out;
  out.gradients = zeros_like(model.parameters());
  detail::Workspace ws;
  for (const auto& row : batch) {
    if (row.label < 0 || static_cast<std::size_t>(row.label) >= model.n_classes()) {
      throw usage_error("label index " + std::to_string(row.label) + " out of range");
    }
    if (row.x.size() != model.input_dim()) throw usage_error("input dimension mismatch");
    out.loss += detail::accumulate_sample(model.parameters(), row.x, row.label, out.gradients, ws);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv;
  for (auto& g : out.gradients) {
    for (double& w : g.weights) w *= inv;
    for (double& b : g.bias) b *= inv;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {
constexpr const char* kModelFormat = "bp-head-model";
constexpr int kModelVersion = 1;
}  // namespace

nlohmann::json model_to_json(const HeadModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : model.parameters()) {
    layers.push_back({{"in", l.in},
                      {"out", l.out},
                      {"weights", encode_doubles(l.weights)},
                      {"bias", encode_doubles(l.bias)}});
  }
  std::vector<std::string> order{"MSS", "MSI_1"};
  if (model.n_classes() == 3) order.push_back("MSI_2");
  const auto& prov = model.provenance();
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"input_dim", model.input_dim()},
          {"n_classes", model.n_classes()},
          {"class_order", order},
          {"layers", layers},
          {"config", prov.config},
          {"provenance",
           {{"fold", prov.fold},
            {"best_epoch", prov.best_epoch},
            {"epoch_val_auroc", prov.epoch_val_auroc},
            {"labeling", prov.labeling},
            {"extra", prov.extra}}}};
}

HeadModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat) throw data_error("not a head model document");
    if (j.at("version").get<int>() != kModelVersion) throw data_error("unsupported model version");
    HeadModel m;
    std::size_t prev_out = 0;
    for (const auto& jl : j.at("layers")) {
      Layer l;
      l.in = jl.at("in").get<std::size_t>();
      l.out = jl.at("out").get<std::size_t>();
      l.weights = decode_doubles(jl.at("weights").get<std::string>());
      l.bias = decode_doubles(jl.at("bias").get<std::string>());
      if (l.weights.size() != l.in * l.out || l.bias.size() != l.out) {
        throw data_error("layer parameter arrays do not match their shape");
      }
      if (prev_out != 0 && l.in != prev_out) throw data_error("layer shapes do not chain");
      prev_out = l.out;
      m.parameters().push_back(std::move(l));
    }
    if (m.parameters().empty()) throw data_error("model has no layers");
    if (m.input_dim() != j.at("input_dim").get<std::size_t>() ||
        m.n_classes() != j.at("n_classes").get<std::size_t>()) {
      throw data_error("model header disagrees with its layers");
    }
    if (!m.all_finite()) throw data_error("model has non-finite parameters");
    auto& prov = m.provenance();
    prov.config = j.at("config").get<TrainConfig>();
    const auto& jp = j.at("provenance");
    prov.fold = jp.at("fold").get<int>();
    prov.best_epoch = jp.at("best_epoch").get<int>();
    prov.epoch_val_auroc = jp.at("epoch_val_auroc").get<std::vector<double>>();
    prov.labeling = jp.at("labeling").get<std::string>();
    prov.extra = jp.value("extra", nlohmann::json::object());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const HeadModel& model, const std::filesystem::path& path) {
  write_file(path, model_to_json(model).dump(1) + "\n");
}

HeadModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw data_error(path.string() + ": " + e.what());
  }
}

}  // namespace bp
