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


#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aeshap/commands.hpp"
#include "aeshap/config.hpp"
#include "aeshap/error.hpp"
#include "testing.hpp"

namespace aeshap {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json tiny_config() {
  return json::parse(R"({
    "master_seed": 7,
    "dataset": {"source": "boolean", "name": "tiny", "n_rows": 400, "n_independent": 4,
                "dependencies": [{"output": 4, "op": "AND", "inputs": [0, 1]}]},
    "injection": [{"class": "TypeA", "k": 1, "count": 12}],
    "model": {"max_epochs": 4, "learning_rate": 0.01, "batch_size": 32},
    "explain": {"max_anomalies": 1, "background_size": 10},
    "benchmark": {"model_seeds": [1], "anomalies_per_run": 3, "explanation_seeds": [1, 2],
                  "delta_quantile": 0.9, "methods": ["random", "reshape"], "background_size": 10,
                  "top_attributes": 1},
    "relevance": {"relevant": [{"name": "perturbed", "from_label": true}]}
  })");
}

std::string write_config(const fs::path& dir, const json& doc) {
  const auto path = dir / "config.json";
  std::ofstream(path) << doc.dump(2);
  return path.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& verb, const std::string& config, const fs::path& out, std::string* err_text = nullptr) {
  CommandOptions opts;
  opts.config_path = config;
  opts.out_dir = out.string();
  std::ostringstream log, err;
  const int code = run_command(verb, opts, log, err);
  if (err_text) *err_text = err.str();
  return code;
}

TEST(Config, ErrorsNameTheJsonPath) {
  auto doc = tiny_config();
  doc["dataset"]["n_rows"] = "many";
  try {
    parse_run_config(doc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("$.dataset.n_rows"), std::string::npos) << e.what();
  }
  doc = tiny_config();
  doc["model"]["bogus"] = 1;
  try {
    parse_run_config(doc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("$.model.bogus"), std::string::npos) << e.what();
  }
}

TEST(Config, DerivedSeedsAndHash) {
  const auto a = parse_run_config(tiny_config());
  const auto b = parse_run_config(tiny_config());
  const auto c = parse_run_config(tiny_config(), 8);
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_NE(a.hash, c.hash);
  EXPECT_NE(a.dataset.boolean.seed, c.dataset.boolean.seed);
  EXPECT_EQ(a.hash.size(), 16u);
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Config, AcceptsSignedJsonIntegers) {
  auto doc = tiny_config();
  doc["benchmark"]["explanation_seeds"] = {4, 4};
  doc["dataset"]["n_rows"] = 300;
  const auto cfg = parse_run_config(doc);
  EXPECT_EQ(cfg.benchmark.explanation_seeds, (std::vector<std::uint64_t>{4, 4}));
  doc["benchmark"]["explanation_seeds"] = {4, -1};
  EXPECT_THROW(parse_run_config(doc), ConfigError);
  doc = tiny_config();
  doc["dataset"]["n_rows"] = -3;
  EXPECT_THROW(parse_run_config(doc), ConfigError);
}

TEST(Config, DefaultWidths) {
  EXPECT_EQ(default_widths(20), (std::vector<std::size_t>{20, 18, 16, 15, 16, 18, 20}));
  LayerSpec given;
  given.widths = {10, 5, 10};
  try {
    resolve_layer_spec(given, 12);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("first width is 10"), std::string::npos) << e.what();
  }
}

TEST(Cli, ExitCodes) {
  const auto dir = testing::scratch_dir("cli_codes");
  EXPECT_EQ(run("gen-data", (dir / "missing.json").string(), dir / "out"), 2);
  auto doc = tiny_config();
  doc["model"]["widths"] = {9, 4, 9};
  const auto cfg = write_config(dir, doc);
  EXPECT_EQ(run("gen-data", cfg, dir / "out"), 0);
  std::string err;
  EXPECT_EQ(run("train", cfg, dir / "out", &err), 2);
  EXPECT_NE(err.find("first width is 9"), std::string::npos) << err;
  // Explaining without a trained model is a data error.
  EXPECT_EQ(run("explain", write_config(dir, tiny_config()), dir / "out"), 3);
  EXPECT_EQ(run("train", cfg, dir / "empty"), 3);
}

TEST(Cli, LockBlocksConcurrentRuns) {
  const auto dir = testing::scratch_dir("cli_lock");
  const auto cfg = write_config(dir, tiny_config());
  fs::create_directories(dir / "out");
  std::ofstream(dir / "out" / ".aeshap.lock") << "held";
  std::string err;
  EXPECT_EQ(run("gen-data", cfg, dir / "out", &err), 3);
  EXPECT_NE(err.find("locked"), std::string::npos);
  fs::remove(dir / "out" / ".aeshap.lock");
  EXPECT_EQ(run("gen-data", cfg, dir / "out"), 0);
  EXPECT_FALSE(fs::exists(dir / "out" / ".aeshap.lock"));
}

void pipeline(const std::string& cfg, const fs::path& out) {
  for (const char* verb : {"gen-data", "train", "explain", "evaluate", "report"}) {
    EXPECT_EQ(run(verb, cfg, out), 0) << verb;
  }
}

TEST(Cli, FullPipelineIsReproducible) {
  const auto dir = testing::scratch_dir("cli_pipeline");
  const auto cfg = write_config(dir, tiny_config());
  pipeline(cfg, dir / "a");
  pipeline(cfg, dir / "b");

  const auto first = dir / "a";
  for (const char* f : {"data.csv", "labels.json", "schema.json", "model.json", "train_log.csv", "metrics.csv",
                        "metrics.json", "ranking.txt", "report.txt"}) {
    ASSERT_TRUE(fs::exists(first / f)) << f;
    EXPECT_EQ(slurp(first / f), slurp(dir / "b" / f)) << f;
  }
  std::size_t json_files = 0, txt_files = 0;
  for (const auto& e : fs::directory_iterator(first / "explanations")) {
    json_files += e.path().extension() == ".json";
    txt_files += e.path().extension() == ".txt";
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / "explanations" / e.path().filename()));
  }
  EXPECT_EQ(json_files, 4u);
  EXPECT_EQ(txt_files, 4u);

  const auto meta = metadata_line(load_run_config(cfg));
  EXPECT_EQ(slurp(first / "metrics.csv").rfind(meta, 0), 0u);
  EXPECT_EQ(slurp(first / "ranking.txt").rfind(meta, 0), 0u);
  const auto metrics = json::parse(slurp(first / "metrics.json"));
  EXPECT_EQ(metrics.at("meta").at("master_seed"), 7);
  const auto ranking = slurp(first / "ranking.txt");
  EXPECT_NE(ranking.find("mrr_r:perturbed (higher is better)"), std::string::npos) << ranking;
  EXPECT_TRUE(fs::exists(first / "curves" / "error_pct.csv"));
  // Reloading the written dataset gives back the generated table.
  const auto loaded = load_dataset(first.string());
  EXPECT_EQ(loaded.num_rows(), 400u);
  EXPECT_EQ(loaded.labels, build_dataset(load_run_config(cfg)).labels);
}

TEST(Cli, SeedOverrideChangesOutputs) {
  const auto dir = testing::scratch_dir("cli_seed");
  const auto cfg = write_config(dir, tiny_config());
  CommandOptions opts;
  opts.config_path = cfg;
  opts.out_dir = (dir / "s9").string();
  opts.seed = 9;
  std::ostringstream log, err;
  ASSERT_EQ(run_command("gen-data", opts, log, err), 0) << err.str();
  ASSERT_EQ(run("gen-data", cfg, dir / "s7"), 0);
  EXPECT_NE(slurp(dir / "s9" / "data.csv"), slurp(dir / "s7" / "data.csv"));
}

#ifdef AESHAP_CLI_PATH
TEST(Cli, BinaryReportsExitCodes) {
  const auto dir = testing::scratch_dir("cli_binary");
  const std::string exe = AESHAP_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(raw);
  };
  EXPECT_EQ(status(exe + " gen-data --config " + (dir / "nope.json").string()), 2);
  EXPECT_EQ(status(exe + " --bogus"), 2);
  const auto cfg = write_config(dir, tiny_config());
  EXPECT_EQ(status(exe + " gen-data --config " + cfg + " --out " + (dir / "out").string()), 0);
}
#endif

}  // namespace
}  // namespace aeshap
