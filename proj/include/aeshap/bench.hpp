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
#include <optional>
#include <string>
#include <vector>

#include "aeshap/aenn.hpp"
#include "aeshap/explainers.hpp"
#include "aeshap/metrics.hpp"
#include "aeshap/tabular.hpp"
#include "json.hpp"

namespace aeshap {

// A set of attributes that should (or, for the uninformative set, should
// not) be ranked high. `from_label` takes the perturbed attributes of each
// anomaly; `when_perturbed` restricts the set to anomalies whose label lists
// that attribute.
struct RelevanceSet {
  std::string name;
  std::vector<std::size_t> attributes;
  bool from_label = false;
  std::optional<std::size_t> when_perturbed;

  bool applies_to(const AnomalyLabel& label) const;
  std::vector<std::size_t> targets_for(const AnomalyLabel& label) const;
};

struct RelevanceSpec {
  std::vector<RelevanceSet> relevant;
  std::vector<std::size_t> uninformative;

  void validate(std::size_t num_attributes) const;
};

struct BenchmarkConfig {
  std::vector<std::uint64_t> model_seeds{0};
  std::size_t anomalies_per_run = 20;
  std::vector<std::uint64_t> explanation_seeds{101, 202, 303};  // K repeats
  double delta_quantile = 0.99;
  std::vector<Method> methods{Method::kRandom, Method::kLossShap, Method::kAShap, Method::kReshape};
  std::size_t background_size = 500;
  std::size_t top_attributes = 0;
  std::size_t top_encodings = 10;
  std::size_t n_coalitions = 0;
  bool ashap_drop_self = true;
  std::size_t stability_n = 1;
  std::size_t error_n_max = 0;  // 0 = T
  bool greedy_replacement = false;
  std::size_t greedy_top_values = 5;
  bool reserve_unseen = true;
  LayerSpec layer_spec;  // widths[0] == 0 means derive D-... from the data
  TrainConfig train;
  unsigned threads = 1;

  void validate() const;
};

struct MetricSummary {
  std::string method;
  std::string metric;
  std::string dataset;
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
  std::vector<double> values;
  bool higher_is_better = true;
};

struct CurvePoint {
  std::string method;
  std::string dataset;
  std::string curve;  // error_pct | hits_at_n:<set> | stability
  std::size_t n = 0;
  double value = 0.0;
};

struct SeedDiagnostics {
  std::uint64_t model_seed = 0;
  std::size_t epochs = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double threshold = 0.0;
  std::size_t injected = 0;
  std::size_t flagged_injected = 0;
  std::vector<std::size_t> evaluated;
};

struct MetricReport {
  std::vector<MetricSummary> metrics;
  std::vector<CurvePoint> curves;
  std::vector<SeedDiagnostics> seeds;
  std::vector<std::string> warnings;

  const MetricSummary* find(const std::string& method, const std::string& metric,
                            const std::string& dataset = "") const;
  double mean(Method method, const std::string& metric) const;
};

struct DatasetBundle {
  std::string name;
  RecordTable table;
};

// Train one model per seed, flag anomalies, explain each evaluated anomaly
// with every method and explanation seed, and aggregate the metrics.
MetricReport run_benchmark(const BenchmarkConfig& cfg, const DatasetBundle& data, const RelevanceSpec& relevance);

// Mean +- std over the pooled samples.
MetricSummary summarize(std::string method, std::string metric, std::string dataset, std::vector<double> values,
                        bool higher_is_better);

std::string metrics_csv(const MetricReport& report);
nlohmann::json metrics_json(const MetricReport& report);
std::string curves_csv(const MetricReport& report);
// Per metric, methods from best to worst.
std::string ranking_text(const MetricReport& report);

nlohmann::json to_json(const RelevanceSpec& spec);
RelevanceSpec relevance_from_json(const nlohmann::json& doc);

}  // namespace aeshap
