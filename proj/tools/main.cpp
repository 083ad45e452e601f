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

#include <iostream>

#include "CLI11.hpp"
#include "aeshap/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"aeshap: autoencoder anomaly detection with Shapley explanations"};
  app.require_subcommand(1);

  aeshap::CommandOptions opts;
  std::string out;
  std::uint64_t seed = 0;
  app.add_option("--config", opts.config_path, "run configuration (JSON)")->required();
  auto* out_opt = app.add_option("--out", out, "output directory (overrides output.dir)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides master_seed)");
  app.add_option("--threads", opts.threads, "worker threads")->check(CLI::Range(1u, 1024u));
  app.fallthrough();

  app.add_subcommand("gen-data", "generate or ingest the dataset and inject anomalies");
  app.add_subcommand("train", "train the autoencoder on the regular rows");
  auto* explain = app.add_subcommand("explain", "explain anomalies with the selected methods");
  explain->add_option("--model", opts.model_path, "model file (default <out>/model.json)");
  explain->add_option("--anomaly", opts.anomaly_ids, "row id to explain (repeatable)");
  explain->add_option("--method", opts.methods, "Random, LossSHAP, A-SHAP or RESHAPE (repeatable)");
  app.add_subcommand("evaluate", "run the benchmark and write metric reports");
  app.add_subcommand("report", "summarize metrics.json as a text table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*out_opt) opts.out_dir = out;
  if (*seed_opt) opts.seed = seed;
  return aeshap::run_command(app.get_subcommands().front()->get_name(), opts, std::cout, std::cerr);
}
