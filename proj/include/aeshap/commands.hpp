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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aeshap/config.hpp"
#include "aeshap/tabular.hpp"

namespace aeshap {

struct CommandOptions {
  std::string config_path;
  std::optional<std::string> out_dir;  // overrides output.dir
  std::optional<std::uint64_t> seed;   // overrides master_seed
  unsigned threads = 1;
  std::string model_path;              // explain; default <out>/model.json
  std::vector<std::size_t> anomaly_ids;
  std::vector<std::string> methods;
};

// Builds the dataset described by the config in memory: generation or CSV
// ingestion, then every injection plan in order, then the noise attribute.
RecordTable build_dataset(const RunConfig& cfg);

// Reads data.csv, schema.json and labels.json written by gen-data.
RecordTable load_dataset(const std::string& dir);

void cmd_gen_data(const RunConfig& cfg, const std::string& out, std::ostream& log);
void cmd_train(const RunConfig& cfg, const std::string& out, std::ostream& log);
void cmd_explain(const RunConfig& cfg, const std::string& out, const CommandOptions& opts, std::ostream& log);
void cmd_evaluate(const RunConfig& cfg, const std::string& out, unsigned threads, std::ostream& log);
void cmd_report(const RunConfig& cfg, const std::string& out, std::ostream& log);

// Loads the config, takes the output lock and runs one verb. Returns the
// process exit code: 0 ok, 2 config error, 3 data error, 4 numerical failure.
int run_command(const std::string& verb, const CommandOptions& opts, std::ostream& log, std::ostream& err);

// Comment line placed at the top of CSV and text outputs.
std::string metadata_line(const RunConfig& cfg);

}  // namespace aeshap
