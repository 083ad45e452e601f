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

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aeshap/tabular.hpp"
#include "json.hpp"

namespace aeshap {

// Symmetric fully-connected autoencoder layout, e.g. 20-18-16-15-16-18-20.
// Hidden layers use LeakyReLU, the layer producing the latent code is linear
// and the output layer is a sigmoid.
struct LayerSpec {
  std::vector<std::size_t> widths;
  double leaky_slope = 0.4;

  std::size_t input_dim() const { return widths.front(); }
  std::size_t latent_dim() const { return widths[widths.size() / 2]; }
  std::size_t num_layers() const { return widths.size() - 1; }
  // Index of the linear layer whose output is the latent code.
  std::size_t latent_layer() const { return widths.size() / 2 - 1; }
  void validate() const;
  std::string to_string() const;
};

struct TrainConfig {
  std::size_t batch_size = 128;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t max_epochs = 500;
  std::size_t patience = 10;
  double min_delta = 1e-5;
  std::uint64_t seed = 0;
  bool shuffle = true;

  void validate() const;
};

struct DenseLayer {
  Matrix weight;   // fan_in x fan_out
  RowVector bias;  // fan_out
};

struct NetworkParams {
  LayerSpec spec;
  std::vector<DenseLayer> layers;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;

  // Glorot-uniform weights, zero biases.
  static NetworkParams initialize(const LayerSpec& spec, std::uint64_t seed);
  void validate() const;
};

struct ForwardResult {
  Matrix latent;
  Matrix reconstruction;
};

constexpr double kBceClamp = 1e-7;

ForwardResult forward(const NetworkParams& params, const Matrix& batch);
Matrix reconstruct(const NetworkParams& params, const Matrix& batch);

// Elementwise binary cross-entropy with the reconstruction clamped to
// [1e-7, 1 - 1e-7].
Matrix bce_loss(const Matrix& x, const Matrix& reconstruction);
RowVector bce_loss(const RowVector& x, const RowVector& reconstruction);

// Per-row instance score: sum over dimensions of the per-dimension loss.
Vector instance_scores(const NetworkParams& params, const Matrix& batch);

// Training objective: mean over rows of the per-row summed loss.
double batch_mean_loss(const NetworkParams& params, const Matrix& batch);

struct Gradients {
  std::vector<DenseLayer> layers;
};

// Analytic gradient of batch_mean_loss by backpropagation.
Gradients compute_gradients(const NetworkParams& params, const Matrix& batch, double* loss = nullptr);

struct TrainResult {
  NetworkParams params;              // best snapshot
  double initial_loss = 0.0;
  double best_loss = 0.0;
  std::vector<double> epoch_losses;  // full-data loss after each epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

TrainResult train(const Matrix& data, const LayerSpec& spec, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

struct ReconstructionReport {
  RowVector reconstruction;
  RowVector dimension_losses;  // length D
  Vector attribute_losses;     // length T
  double total_loss = 0.0;
};

ReconstructionReport reconstruct_report(const NetworkParams& params, const RowVector& row,
                                        const EncodingMap& map);

// Sums per-dimension losses (rows x D) into per-attribute losses (rows x T).
Matrix attribute_losses(const Matrix& dimension_losses, const EncodingMap& map);

struct FlagResult {
  double threshold = 0.0;
  Vector scores;                     // every row
  std::vector<std::size_t> flagged;  // rows with score > threshold, by descending score
};

FlagResult flag_anomalies(const NetworkParams& params, const Matrix& table, double quantile);

// Linear-interpolation quantile of `values`.
double quantile(std::vector<double> values, double q);

nlohmann::json to_json(const NetworkParams& params);
NetworkParams network_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const LayerSpec& spec);
LayerSpec layer_spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& doc);

}  // namespace aeshap
