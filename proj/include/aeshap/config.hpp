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
#include "aeshap/bench.hpp"
#include "aeshap/explainers.hpp"
#include "aeshap/synthesis.hpp"
#include "aeshap/tabular.hpp"
#include "json.hpp"

namespace aeshap {

enum class DatasetSource { kBoolean, kAccounting, kCsv };

struct DatasetConfig {
  DatasetSource source = DatasetSource::kBoolean;
  std::string name;  // label used in reports
  BooleanSpec boolean = BooleanSpec::defaults();
  AccountingSpec accounting;
  std::string csv_path;
  std::vector<AttributeKind> kind_hints;
  char delimiter = ',';
};

struct NoiseConfig {
  std::size_t cardinality = 0;  // 0 disables the extra attribute
  std::uint64_t seed = 0;
  std::string name = "noise";
};

struct ExplainConfig {
  std::vector<Method> methods{Method::kRandom, Method::kLossShap, Method::kAShap, Method::kReshape};
  std::vector<std::size_t> anomalies;  // row ids; empty = first max_anomalies labelled rows
  std::size_t max_anomalies = 5;
  std::size_t top_attributes = 0;
  std::size_t top_encodings = 10;
  std::size_t n_coalitions = 0;
  std::size_t background_size = 500;
  std::uint64_t seed = 0;
  bool ashap_drop_self = true;
};

struct RunConfig {
  std::uint64_t master_seed = 0;
  DatasetConfig dataset;
  std::vector<InjectionPlan> injection;
  NoiseConfig noise;
  LayerSpec layer_spec;  // empty widths = derived from the encoded width
  TrainConfig train;
  ExplainConfig explain;
  BenchmarkConfig benchmark;
  RelevanceSpec relevance;
  std::string output_dir = "out";
  std::string hash;  // hex digest of the effective document
};

// Parses a run document. Every problem is reported as ConfigError naming the
// JSON path of the offending field. Seeds that are not given are derived from
// the master seed; seed_override replaces the master seed before derivation.
RunConfig parse_run_config(const nlohmann::json& doc, std::optional<std::uint64_t> seed_override = std::nullopt);
RunConfig load_run_config(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt);

// 64-bit FNV-1a over the text, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& text);

// D -> D, round(0.9 D), round(0.8 D), round(0.75 D), ... mirrored.
std::vector<std::size_t> default_widths(std::size_t input_dim);

// Fills in derived widths and checks the input width against the data.
LayerSpec resolve_layer_spec(const LayerSpec& spec, std::size_t input_dim);

std::string dataset_source_name(DatasetSource source);

}  // namespace aeshap
