/*
 * Copyright 2026 The aeshap Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "aeshap/aenn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "aeshap/error.hpp"
#include "aeshap/random.hpp"

namespace aeshap {
namespace {

constexpr int kModelFormatVersion = 1;
constexpr double kSigmoidCeil = 1.0 - 0x1.0p-53;

enum class Activation { kLeaky, kIdentity, kSigmoid };

Activation activation_of(const LayerSpec& spec, std::size_t layer) {
  if (layer + 1 == spec.num_layers()) return Activation::kSigmoid;
  if (layer == spec.latent_layer()) return Activation::kIdentity;
  return Activation::kLeaky;
}

void apply_activation(Matrix& z, Activation act, double slope) {
  switch (act) {
    case Activation::kLeaky:
      z = z.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
      break;
    case Activation::kIdentity:
      break;
    case Activation::kSigmoid:
      z = z.unaryExpr([](double v) {
        return std::clamp(1.0 / (1.0 + std::exp(-v)), std::numeric_limits<double>::min(), kSigmoidCeil);
      });
      break;
  }
}

void check_batch(const NetworkParams& params, const Matrix& batch) {
  if (static_cast<std::size_t>(batch.cols()) != params.spec.input_dim()) {
    throw DataError("autoencoder: batch width " + std::to_string(batch.cols()) + " but network expects " +
                    std::to_string(params.spec.input_dim()));
  }
  if (!batch.allFinite()) throw DataError("autoencoder: non-finite input");
}

// Activations a_0 .. a_L; a_0 is the input.
std::vector<Matrix> forward_all(const NetworkParams& params, const Matrix& batch) {
  std::vector<Matrix> acts;
  acts.reserve(params.layers.size() + 1);
  acts.push_back(batch);
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& layer = params.layers[i];
    Matrix z = acts.back() * layer.weight;
    z.rowwise() += layer.bias;
    apply_activation(z, activation_of(params.spec, i), params.spec.leaky_slope);
    acts.push_back(std::move(z));
  }
  return acts;
}

double clamp_prob(double v) { return std::clamp(v, kBceClamp, 1.0 - kBceClamp); }

double bce(double x, double xhat) {
  const double p = clamp_prob(xhat);
  return -(x * std::log(p) + (1.0 - x) * std::log(1.0 - p));
}

nlohmann::json matrix_to_json(const Matrix& m) {
  std::vector<double> flat(m.data(), m.data() + m.size());
  return flat;
}

}  // namespace

void LayerSpec::validate() const {
  if (widths.size() < 3 || widths.size() % 2 == 0) {
    throw ConfigError("layer spec: need an odd number (>= 3) of widths around one bottleneck");
  }
  for (auto w : widths) {
    if (w == 0) throw ConfigError("layer spec: zero width");
  }
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (widths[i] != widths[widths.size() - 1 - i]) throw ConfigError("layer spec: widths must be symmetric");
  }
  if (!(latent_dim() < input_dim())) throw ConfigError("layer spec: bottleneck must be narrower than the input");
  if (!(leaky_slope > 0.0)) throw ConfigError("layer spec: leaky slope must be positive");
}

std::string LayerSpec::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < widths.size(); ++i) out << (i ? "-" : "") << widths[i];
  return out.str();
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train config: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train config: learning_rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ConfigError("train config: Adam betas must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("train config: epsilon must be positive");
}

NetworkParams NetworkParams::initialize(const LayerSpec& spec, std::uint64_t seed) {
  spec.validate();
  NetworkParams params;
  params.spec = spec;
  params.seed = seed;
  Rng rng(seed);
  for (std::size_t i = 0; i < spec.num_layers(); ++i) {
    const auto fan_in = static_cast<Eigen::Index>(spec.widths[i]);
    const auto fan_out = static_cast<Eigen::Index>(spec.widths[i + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer{Matrix(fan_in, fan_out), RowVector::Zero(fan_out)};
    for (Eigen::Index r = 0; r < fan_in; ++r) {
      for (Eigen::Index c = 0; c < fan_out; ++c) layer.weight(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
    }
    params.layers.push_back(std::move(layer));
  }
  return params;
}

void NetworkParams::validate() const {
  spec.validate();
  if (layers.size() != spec.num_layers()) throw DataError("network: layer count does not match spec");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (static_cast<std::size_t>(l.weight.rows()) != spec.widths[i] ||
        static_cast<std::size_t>(l.weight.cols()) != spec.widths[i + 1] ||
        static_cast<std::size_t>(l.bias.size()) != spec.widths[i + 1]) {
      throw DataError("network: layer " + std::to_string(i) + " shape does not chain");
    }
    if (!l.weight.allFinite() || !l.bias.allFinite()) throw NumericalError("network: non-finite parameter");
  }
}

ForwardResult forward(const NetworkParams& params, const Matrix& batch) {
  check_batch(params, batch);
  auto acts = forward_all(params, batch);
  return {std::move(acts[params.spec.latent_layer() + 1]), std::move(acts.back())};
}

Matrix reconstruct(const NetworkParams& params, const Matrix& batch) {
  check_batch(params, batch);
  Matrix a = batch;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    Matrix z = a * params.layers[i].weight;
    z.rowwise() += params.layers[i].bias;
    apply_activation(z, activation_of(params.spec, i), params.spec.leaky_slope);
    a = std::move(z);
  }
  return a;
}

Matrix bce_loss(const Matrix& x, const Matrix& reconstruction) {
  if (x.rows() != reconstruction.rows() || x.cols() != reconstruction.cols()) {
    throw DataError("bce: shape mismatch");
  }
  return x.binaryExpr(reconstruction, [](double a, double b) { return bce(a, b); });
}

RowVector bce_loss(const RowVector& x, const RowVector& reconstruction) {
  if (x.size() != reconstruction.size()) throw DataError("bce: width mismatch");
  return x.binaryExpr(reconstruction, [](double a, double b) { return bce(a, b); });
}

Vector instance_scores(const NetworkParams& params, const Matrix& batch) {
  return bce_loss(batch, reconstruct(params, batch)).rowwise().sum();
}

double batch_mean_loss(const NetworkParams& params, const Matrix& batch) {
  if (batch.rows() == 0) throw DataError("loss: empty batch");
  return instance_scores(params, batch).mean();
}

Gradients compute_gradients(const NetworkParams& params, const Matrix& batch, double* loss) {
  check_batch(params, batch);
  const auto acts = forward_all(params, batch);
  const Matrix& out = acts.back();
  const double inv_b = 1.0 / static_cast<double>(batch.rows());
  if (loss != nullptr) *loss = bce_loss(batch, out).sum() * inv_b;

  // Sigmoid + cross-entropy collapse to (x_hat - x); zero where the clamp is active.
  Matrix delta = out.binaryExpr(batch, [inv_b](double xh, double x) {
    return (xh > kBceClamp && xh < 1.0 - kBceClamp) ? (xh - x) * inv_b : 0.0;
  });

  Gradients grads;
  grads.layers.resize(params.layers.size());
  for (std::size_t i = params.layers.size(); i-- > 0;) {
    grads.layers[i].weight = acts[i].transpose() * delta;
    grads.layers[i].bias = delta.colwise().sum();
    if (i == 0) break;
    Matrix back = delta * params.layers[i].weight.transpose();
    // acts[i] is the output of layer i-1; LeakyReLU keeps the sign of its input.
    if (activation_of(params.spec, i - 1) == Activation::kLeaky) {
      const double slope = params.spec.leaky_slope;
      back = back.binaryExpr(acts[i], [slope](double g, double a) { return a > 0.0 ? g : g * slope; });
    }
    delta = std::move(back);
  }
  return grads;
}

TrainResult train(const Matrix& data, const LayerSpec& spec, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  spec.validate();
  cfg.validate();
  if (data.rows() == 0) throw DataError("train: empty training data");
  if (static_cast<std::size_t>(data.cols()) != spec.input_dim()) {
    throw ConfigError("train: data has " + std::to_string(data.cols()) + " encoded dimensions but the layer spec expects " +
                      std::to_string(spec.input_dim()));
  }

  NetworkParams params = NetworkParams::initialize(spec, cfg.seed);
  TrainResult result;
  result.initial_loss = batch_mean_loss(params, data);
  result.best_loss = result.initial_loss;
  result.params = params;
  if (!std::isfinite(result.initial_loss)) throw NumericalError("train: non-finite initial loss");

  std::vector<DenseLayer> m(params.layers.size()), v(params.layers.size());
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    m[i] = {Matrix::Zero(params.layers[i].weight.rows(), params.layers[i].weight.cols()),
            RowVector::Zero(params.layers[i].bias.size())};
    v[i] = m[i];
  }

  const auto n = static_cast<std::size_t>(data.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffler(mix_seed(cfg.seed, 1));
  std::size_t step = 0;
  std::size_t stale = 0;
  Matrix batch;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (cfg.shuffle) shuffler.shuffle(order);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      batch.resize(static_cast<Eigen::Index>(end - start), data.cols());
      for (std::size_t r = start; r < end; ++r) {
        batch.row(static_cast<Eigen::Index>(r - start)) = data.row(static_cast<Eigen::Index>(order[r]));
      }
      const Gradients g = compute_gradients(params, batch);
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      const double lr = cfg.learning_rate;
      const double eps = cfg.epsilon;
      for (std::size_t i = 0; i < params.layers.size(); ++i) {
        auto update = [&](auto& param, auto& mom, auto& vel, const auto& grad) {
          mom = cfg.beta1 * mom + (1.0 - cfg.beta1) * grad;
          vel = cfg.beta2 * vel + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
          param.array() -= lr * (mom.array() / c1) / ((vel.array() / c2).sqrt() + eps);
        };
        update(params.layers[i].weight, m[i].weight, v[i].weight, g.layers[i].weight);
        update(params.layers[i].bias, m[i].bias, v[i].bias, g.layers[i].bias);
      }
    }
    params.epoch = epoch;
    const double loss = batch_mean_loss(params, data);
    if (!std::isfinite(loss)) {
      throw NumericalError("train: loss diverged (non-finite) at epoch " + std::to_string(epoch));
    }
    result.epoch_losses.push_back(loss);
    if (on_epoch) on_epoch(epoch, loss);
    if (loss < result.best_loss) {
      const bool improved = loss < result.best_loss - cfg.min_delta;
      result.best_loss = loss;
      result.params = params;
      stale = improved ? 0 : stale + 1;
    } else {
      ++stale;
    }
    if (cfg.patience > 0 && stale >= cfg.patience) break;
  }
  return result;
}

Matrix attribute_losses(const Matrix& dimension_losses, const EncodingMap& map) {
  Matrix out(dimension_losses.rows(), static_cast<Eigen::Index>(map.num_attributes()));
  for (std::size_t j = 0; j < map.num_attributes(); ++j) {
    const Slice& s = map.slice(j);
    out.col(static_cast<Eigen::Index>(j)) =
        dimension_losses.middleCols(static_cast<Eigen::Index>(s.start), static_cast<Eigen::Index>(s.length))
            .rowwise()
            .sum();
  }
  return out;
}

ReconstructionReport reconstruct_report(const NetworkParams& params, const RowVector& row, const EncodingMap& map) {
  if (static_cast<std::size_t>(row.size()) != map.total_dims()) throw DataError("report: row width mismatch");
  Matrix batch = row;
  ReconstructionReport report;
  report.reconstruction = reconstruct(params, batch).row(0);
  report.dimension_losses = bce_loss(row, report.reconstruction);
  report.attribute_losses = attribute_losses(report.dimension_losses, map).row(0).transpose();
  report.total_loss = report.dimension_losses.sum();
  return report;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

FlagResult flag_anomalies(const NetworkParams& params, const Matrix& table, double q) {
  if (table.rows() == 0) throw DataError("flag: empty table");
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("flag: quantile must lie in (0, 1)");
  FlagResult result;
  result.scores = instance_scores(params, table);
  std::vector<double> values(result.scores.data(), result.scores.data() + result.scores.size());
  result.threshold = quantile(values, q);
  for (Eigen::Index i = 0; i < result.scores.size(); ++i) {
    if (result.scores[i] > result.threshold) result.flagged.push_back(static_cast<std::size_t>(i));
  }
  std::stable_sort(result.flagged.begin(), result.flagged.end(), [&](std::size_t a, std::size_t b) {
    return result.scores[static_cast<Eigen::Index>(a)] > result.scores[static_cast<Eigen::Index>(b)];
  });
  return result;
}

nlohmann::json to_json(const LayerSpec& spec) {
  return {{"widths", spec.widths}, {"leaky_slope", spec.leaky_slope}};
}

LayerSpec layer_spec_from_json(const nlohmann::json& doc) {
  LayerSpec spec;
  spec.widths = doc.at("widths").get<std::vector<std::size_t>>();
  spec.leaky_slope = doc.value("leaky_slope", spec.leaky_slope);
  return spec;
}

nlohmann::json to_json(const TrainConfig& cfg) {
  return {{"batch_size", cfg.batch_size}, {"learning_rate", cfg.learning_rate}, {"beta1", cfg.beta1},
          {"beta2", cfg.beta2}, {"epsilon", cfg.epsilon}, {"max_epochs", cfg.max_epochs},
          {"patience", cfg.patience}, {"min_delta", cfg.min_delta}, {"seed", cfg.seed},
          {"shuffle", cfg.shuffle}};
}

TrainConfig train_config_from_json(const nlohmann::json& doc) {
  TrainConfig cfg;
  cfg.batch_size = doc.value("batch_size", cfg.batch_size);
  cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
  cfg.beta1 = doc.value("beta1", cfg.beta1);
  cfg.beta2 = doc.value("beta2", cfg.beta2);
  cfg.epsilon = doc.value("epsilon", cfg.epsilon);
  cfg.max_epochs = doc.value("max_epochs", cfg.max_epochs);
  cfg.patience = doc.value("patience", cfg.patience);
  cfg.min_delta = doc.value("min_delta", cfg.min_delta);
  cfg.seed = doc.value("seed", cfg.seed);
  cfg.shuffle = doc.value("shuffle", cfg.shuffle);
  return cfg;
}

nlohmann::json to_json(const NetworkParams& params) {
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (const auto& l : params.layers) {
    weights.push_back(matrix_to_json(l.weight));
    biases.push_back(std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size()));
  }
  return {{"format_version", kModelFormatVersion},
          {"layer_spec", to_json(params.spec)},
          {"seed", params.seed},
          {"epoch", params.epoch},
          {"weights", weights},
          {"biases", biases}};
}

NetworkParams network_from_json(const nlohmann::json& doc) {
  if (doc.at("format_version").get<int>() != kModelFormatVersion) {
    throw DataError("model json: unsupported format_version");
  }
  NetworkParams params;
  params.spec = layer_spec_from_json(doc.at("layer_spec"));
  params.spec.validate();
  params.seed = doc.at("seed").get<std::uint64_t>();
  params.epoch = doc.at("epoch").get<std::size_t>();
  const auto& weights = doc.at("weights");
  const auto& biases = doc.at("biases");
  if (weights.size() != params.spec.num_layers() || biases.size() != params.spec.num_layers()) {
    throw DataError("model json: layer count does not match layer_spec");
  }
  for (std::size_t i = 0; i < params.spec.num_layers(); ++i) {
    const auto rows = static_cast<Eigen::Index>(params.spec.widths[i]);
    const auto cols = static_cast<Eigen::Index>(params.spec.widths[i + 1]);
    const auto w = weights[i].get<std::vector<double>>();
    const auto b = biases[i].get<std::vector<double>>();
    if (w.size() != static_cast<std::size_t>(rows * cols) || b.size() != static_cast<std::size_t>(cols)) {
      throw DataError("model json: layer " + std::to_string(i) + " has the wrong number of values");
    }
    DenseLayer layer{Matrix(rows, cols), RowVector(cols)};
    std::copy(w.begin(), w.end(), layer.weight.data());
    std::copy(b.begin(), b.end(), layer.bias.data());
    params.layers.push_back(std::move(layer));
  }
  params.validate();
  return params;
}

}  // namespace aeshap
