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

#include "aeshap/commands.hpp"

#include <cerrno>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "aeshap/aenn.hpp"
#include "aeshap/bench.hpp"
#include "aeshap/csv.hpp"
#include "aeshap/error.hpp"
#include "aeshap/explainers.hpp"
#include "aeshap/random.hpp"
#include "aeshap/shap.hpp"
#include "aeshap/synthesis.hpp"

namespace fs = std::filesystem;

namespace aeshap {
namespace {

using nlohmann::json;

constexpr const char* kLockName = ".aeshap.lock";

class OutputLock {
 public:
  explicit OutputLock(const std::string& dir) : path_((fs::path(dir) / kLockName).string()) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("output: cannot create directory '" + dir + "': " + ec.message());
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr) {
      if (errno == EEXIST) throw DataError("output: '" + dir + "' is locked by another run (" + path_ + ")");
      throw DataError("output: directory '" + dir + "' is not writable");
    }
    std::fclose(f);
  }
  ~OutputLock() { std::remove(path_.c_str()); }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::string path_;
};

json meta(const RunConfig& cfg) {
  return {{"config_hash", cfg.hash}, {"master_seed", cfg.master_seed}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("output: cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("output: write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

// Drops leading '#' metadata lines.
std::string strip_metadata(const std::string& text) {
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] == '#') {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) return {};
    pos = nl + 1;
  }
  return text.substr(pos);
}

std::string method_slug(Method m) {
  std::string s = method_name(m);
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string curve_file(const std::string& curve) {
  std::string s = curve;
  for (auto& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') c = '_';
  }
  return s + ".csv";
}

Matrix rows_of(const Matrix& values, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace

std::string metadata_line(const RunConfig& cfg) {
  return "# aeshap config_hash=" + cfg.hash + " master_seed=" + std::to_string(cfg.master_seed) + "\n";
}

RecordTable build_dataset(const RunConfig& cfg) {
  RecordTable table;
  std::vector<Dependency> deps;
  switch (cfg.dataset.source) {
    case DatasetSource::kBoolean:
      table = generate_boolean(cfg.dataset.boolean);
      deps = cfg.dataset.boolean.dependencies;
      break;
    case DatasetSource::kAccounting:
      table = generate_accounting(cfg.dataset.accounting);
      break;
    case DatasetSource::kCsv:
      table = load_csv(cfg.dataset.csv_path, cfg.dataset.kind_hints, cfg.dataset.delimiter);
      break;
  }
  for (std::size_t i = 0; i < cfg.injection.size(); ++i) {
    const auto& plan = cfg.injection[i];
    try {
      plan.validate(table.num_attributes());
    } catch (const ConfigError& e) {
      throw ConfigError("config $.injection[" + std::to_string(i) + "]: " + e.what());
    }
    table = plan.anomaly_class == InjectionClass::kTypeA ? inject_type_a(table, plan, deps)
                                                         : inject_type_b(table, plan);
  }
  if (cfg.noise.cardinality > 0) {
    table = add_noise_attribute(table, cfg.noise.cardinality, cfg.noise.seed, cfg.noise.name);
  }
  return table;
}

RecordTable load_dataset(const std::string& dir) {
  const fs::path base(dir);
  if (!fs::exists(base / "data.csv")) {
    throw DataError("missing dataset '" + (base / "data.csv").string() + "' (run gen-data first)");
  }
  RecordTable table;
  const json schema_doc = read_json(base / "schema.json");
  table.schema = schema_from_json(schema_doc.at("attributes"));

  std::ifstream in(base / "data.csv", std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  std::istringstream body(strip_metadata(buf.str()));
  auto raw = csv::read(body);
  if (raw.empty()) throw DataError("data.csv has no header row");
  const auto header = raw.front();
  raw.erase(raw.begin());
  if (header.size() != table.schema.size()) throw DataError("data.csv header does not match schema.json");
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] != table.schema[j].name) {
      throw DataError("data.csv column " + std::to_string(j) + " is '" + header[j] + "' but schema.json says '" +
                      table.schema[j].name + "'");
    }
  }
  for (std::size_t r = 0; r < raw.size(); ++r) {
    if (raw[r].size() != header.size()) throw DataError("data.csv: ragged row " + std::to_string(r + 2));
  }
  table.rows = parse_records(raw, table.schema);
  table.labels = labels_from_json(read_json(base / "labels.json"), table.rows.size());
  table.validate();
  return table;
}

void cmd_gen_data(const RunConfig& cfg, const std::string& out, std::ostream& log) {
  const RecordTable table = build_dataset(cfg);
  const fs::path base(out);

  std::ostringstream data;
  data << metadata_line(cfg);
  csv::Row row;
  for (const auto& a : table.schema) row.push_back(a.name);
  csv::write_row(data, row);
  for (const auto& rec : table.rows) {
    row.clear();
    for (const auto& cell : rec) row.push_back(cell_text(cell));
    csv::write_row(data, row);
  }
  write_text(base / "data.csv", data.str());

  json labels = labels_to_json(table.labels);
  labels["meta"] = meta(cfg);
  write_json(base / "labels.json", labels);
  write_json(base / "schema.json", {{"meta", meta(cfg)}, {"attributes", schema_to_json(table.schema)}});
  log << "gen-data: " << table.num_rows() << " rows, " << table.num_attributes() << " attributes, "
      << table.anomalous_rows().size() << " anomalies -> " << out << "\n";
}

void cmd_train(const RunConfig& cfg, const std::string& out, std::ostream& log) {
  const RecordTable table = load_dataset(out);
  const EncodedTable encoded = encode(table, cfg.benchmark.reserve_unseen);
  const LayerSpec spec = resolve_layer_spec(cfg.layer_spec, encoded.map.total_dims());
  const auto normal = table.normal_rows();
  if (normal.empty()) throw DataError("train: no regular rows");

  std::ostringstream epochs;
  epochs << metadata_line(cfg);
  csv::write_row(epochs, {"epoch", "loss"});
  const TrainResult result = train(rows_of(encoded.values, normal), spec, cfg.train, [&](std::size_t e, double loss) {
    csv::write_row(epochs, {std::to_string(e), csv::format_number(loss)});
  });

  json model = to_json(result.params);
  model["meta"] = meta(cfg);
  model["initial_loss"] = result.initial_loss;
  model["best_loss"] = result.best_loss;
  write_json(fs::path(out) / "model.json", model);
  write_text(fs::path(out) / "train_log.csv", epochs.str());
  log << "train: " << spec.to_string() << ", " << result.epoch_losses.size() << " epochs, loss "
      << result.initial_loss << " -> " << result.best_loss << "\n";
}

void cmd_explain(const RunConfig& cfg, const std::string& out, const CommandOptions& opts, std::ostream& log) {
  const RecordTable table = load_dataset(out);
  const EncodedTable encoded = encode(table, cfg.benchmark.reserve_unseen);
  const std::string model_path = opts.model_path.empty() ? (fs::path(out) / "model.json").string() : opts.model_path;
  NetworkParams model;
  try {
    model = network_from_json(read_json(model_path));
  } catch (const json::exception& e) {
    throw DataError("model '" + model_path + "' is malformed: " + e.what());
  }
  if (model.spec.input_dim() != encoded.map.total_dims()) {
    throw DataError("model input width " + std::to_string(model.spec.input_dim()) + " does not match the " +
                    std::to_string(encoded.map.total_dims()) + " encoded dims of the dataset");
  }

  std::vector<Method> methods = cfg.explain.methods;
  if (!opts.methods.empty()) {
    methods.clear();
    for (const auto& m : opts.methods) methods.push_back(parse_method(m));
  }
  std::vector<std::size_t> ids = !opts.anomaly_ids.empty() ? opts.anomaly_ids : cfg.explain.anomalies;
  if (ids.empty()) {
    const auto injected = table.anomalous_rows();
    ids.assign(injected.begin(), injected.begin() + static_cast<long>(std::min(injected.size(), cfg.explain.max_anomalies)));
  }
  for (auto id : ids) {
    if (id >= table.num_rows()) {
      throw DataError("unknown anomaly id " + std::to_string(id) + " (dataset has " +
                      std::to_string(table.num_rows()) + " rows)");
    }
  }

  const BackgroundSet background =
      BackgroundSet::sample(encoded.values, table.normal_rows(), cfg.explain.background_size, cfg.explain.seed);
  const fs::path dir = fs::path(out) / "explanations";
  fs::create_directories(dir);
  for (auto id : ids) {
    for (auto method : methods) {
      ExplanationRequest req;
      req.method = method;
      req.row = encoded.values.row(static_cast<Eigen::Index>(id));
      req.model = &model;
      req.map = &encoded.map;
      req.background = &background;
      req.seed = mix_seed(cfg.explain.seed, id);
      req.top_attributes = cfg.explain.top_attributes;
      req.top_encodings = cfg.explain.top_encodings;
      req.n_coalitions = cfg.explain.n_coalitions;
      req.ashap_drop_self = cfg.explain.ashap_drop_self;
      req.anomaly_id = std::to_string(id);
      const Explanation e = explain(req);
      json doc = to_json(e, table.schema);
      doc["meta"] = meta(cfg);
      const std::string stem = "anomaly_" + std::to_string(id) + "_" + method_slug(method);
      write_json(dir / (stem + ".json"), doc);
      write_text(dir / (stem + ".txt"), metadata_line(cfg) + render_table(e, table.schema));
    }
  }
  log << "explain: " << ids.size() << " anomalies x " << methods.size() << " methods -> " << dir.string() << "\n";
}

void cmd_evaluate(const RunConfig& cfg, const std::string& out, unsigned threads, std::ostream& log) {
  DatasetBundle bundle{cfg.dataset.name, load_dataset(out)};
  BenchmarkConfig bench = cfg.benchmark;
  bench.threads = threads;
  const EncodingMap map(bundle.table.schema, bench.reserve_unseen);
  bench.layer_spec = resolve_layer_spec(bench.layer_spec, map.total_dims());
  const MetricReport report = run_benchmark(bench, bundle, cfg.relevance);

  const fs::path base(out);
  write_text(base / "metrics.csv", metadata_line(cfg) + metrics_csv(report));
  json doc = metrics_json(report);
  doc["meta"] = meta(cfg);
  write_json(base / "metrics.json", doc);
  write_text(base / "ranking.txt", metadata_line(cfg) + ranking_text(report));

  const fs::path curves = base / "curves";
  fs::create_directories(curves);
  std::map<std::string, std::vector<const CurvePoint*>> by_curve;
  for (const auto& c : report.curves) by_curve[c.curve].push_back(&c);
  for (const auto& [name, points] : by_curve) {
    std::ostringstream csv_out;
    csv_out << metadata_line(cfg);
    csv::write_row(csv_out, {"method", "dataset", "n", "value"});
    for (const auto* p : points) {
      csv::write_row(csv_out, {p->method, p->dataset, std::to_string(p->n), csv::format_number(p->value)});
    }
    write_text(curves / curve_file(name), csv_out.str());
  }
  for (const auto& w : report.warnings) log << "warning: " << w << "\n";
  log << "evaluate: " << report.metrics.size() << " metric rows -> " << out << "\n";
}

void cmd_report(const RunConfig& cfg, const std::string& out, std::ostream& log) {
  const json doc = read_json(fs::path(out) / "metrics.json");
  MetricReport report;
  for (const auto& m : doc.at("metrics")) {
    MetricSummary s;
    s.method = m.at("method").get<std::string>();
    s.metric = m.at("metric").get<std::string>();
    s.dataset = m.at("dataset").get<std::string>();
    s.mean = m.at("mean").get<double>();
    s.std = m.at("std").get<double>();
    s.n = m.at("n").get<std::size_t>();
    s.higher_is_better = m.at("higher_is_better").get<bool>();
    report.metrics.push_back(std::move(s));
  }
  std::ostringstream text;
  text << metadata_line(cfg);
  text << std::left << std::setw(10) << "method" << std::setw(28) << "metric" << std::right << std::setw(10) << "mean"
       << std::setw(10) << "std" << std::setw(8) << "n" << "\n";
  for (const auto& m : report.metrics) {
    text << std::left << std::setw(10) << m.method << std::setw(28) << m.metric << std::right << std::fixed
         << std::setprecision(4) << std::setw(10) << m.mean << std::setw(10) << m.std << std::setw(8) << m.n << "\n";
  }
  text << "\n" << ranking_text(report);
  write_text(fs::path(out) / "report.txt", text.str());
  log << text.str();
}

int run_command(const std::string& verb, const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  try {
    const RunConfig cfg = load_run_config(opts.config_path, opts.seed);
    const std::string out = opts.out_dir ? *opts.out_dir : cfg.output_dir;
    OutputLock lock(out);
    if (verb == "gen-data") {
      cmd_gen_data(cfg, out, log);
    } else if (verb == "train") {
      cmd_train(cfg, out, log);
    } else if (verb == "explain") {
      cmd_explain(cfg, out, opts, log);
    } else if (verb == "evaluate") {
      cmd_evaluate(cfg, out, opts.threads, log);
    } else if (verb == "report") {
      cmd_report(cfg, out, log);
    } else {
      throw ConfigError("unknown command '" + verb + "'");
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const nlohmann::json::exception& e) {
    err << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace aeshap
