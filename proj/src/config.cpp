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

#include "aeshap/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "aeshap/error.hpp"
#include "aeshap/random.hpp"

namespace aeshap {
namespace {

using nlohmann::json;

// Seed stream tags for values derived from the master seed.
enum SeedTag : std::uint64_t {
  kDatasetSeed = 1,
  kNoiseSeed = 2,
  kTrainSeed = 3,
  kExplainSeed = 4,
  kModelSeeds = 5,
  kExplanationSeeds = 6,
  kInjectionSeeds = 100,
};

// Reads fields of one JSON object; every error carries the full path.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) fail("", "expected an object");
  }

  bool has(const std::string& key) const { return doc_.contains(key); }
  std::string path(const std::string& key) const { return path_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError("config " + (key.empty() ? path_ : path(key)) + ": " + what);
  }

  template <class T>
  T get(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    return require<T>(key);
  }

  template <class T>
  T require(const std::string& key) const {
    if (!has(key)) fail(key, "missing required field");
    const json& v = doc_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(key, "expected true or false");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0 && !v.is_number_unsigned())) {
        fail(key, "expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(key, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(key, "expected a string");
    } else {
      if (!v.is_array()) fail(key, "expected an array");
      for (const auto& item : v) {
        using Item = typename T::value_type;
        if constexpr (std::is_same_v<Item, std::string>) {
          if (!item.is_string()) fail(key, "expected an array of strings");
        } else {
          if (!item.is_number_integer() || (!item.is_number_unsigned() && item.get<std::int64_t>() < 0)) {
            fail(key, "expected an array of non-negative integers");
          }
        }
      }
    }
    return v.get<T>();
  }

  Section child(const std::string& key) const {
    static const json kEmpty = json::object();
    return Section(has(key) ? doc_.at(key) : kEmpty, path(key));
  }

  const json& raw(const std::string& key) const { return doc_.at(key); }

  void only(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : doc_.items()) {
      if (!allowed.count(key)) fail(key, "unknown field");
    }
  }

 private:
  const json& doc_;
  std::string path_;
};

DatasetConfig parse_dataset(const Section& s, std::uint64_t master) {
  s.only({"source", "name", "n_rows", "seed", "n_independent", "p_true", "dependencies", "noise_rate", "path",
          "kinds", "delimiter"});
  DatasetConfig d;
  const auto source = s.get<std::string>("source", "boolean");
  const auto seed = s.get<std::uint64_t>("seed", mix_seed(master, kDatasetSeed));
  if (source == "boolean") {
    d.source = DatasetSource::kBoolean;
    d.boolean.n_rows = s.get<std::size_t>("n_rows", d.boolean.n_rows);
    d.boolean.seed = seed;
    d.boolean.n_independent = s.get<std::size_t>("n_independent", d.boolean.n_independent);
    d.boolean.p_true = s.get<double>("p_true", d.boolean.p_true);
    if (s.has("dependencies")) {
      const json& deps = s.raw("dependencies");
      if (!deps.is_array()) s.fail("dependencies", "expected an array");
      d.boolean.dependencies.clear();
      for (std::size_t i = 0; i < deps.size(); ++i) {
        Section dep(deps[i], s.path("dependencies") + "[" + std::to_string(i) + "]");
        dep.only({"output", "op", "inputs"});
        Dependency parsed;
        parsed.output = dep.require<std::size_t>("output");
        try {
          parsed.op = parse_bool_op(dep.require<std::string>("op"));
        } catch (const ConfigError& e) {
          dep.fail("op", e.what());
        }
        parsed.inputs = dep.require<std::vector<std::size_t>>("inputs");
        d.boolean.dependencies.push_back(std::move(parsed));
      }
    }
    try {
      d.boolean.validate();
    } catch (const ConfigError& e) {
      s.fail("", e.what());
    }
  } else if (source == "accounting") {
    d.source = DatasetSource::kAccounting;
    d.accounting.n_rows = s.get<std::size_t>("n_rows", d.accounting.n_rows);
    d.accounting.seed = seed;
    d.accounting.noise_rate = s.get<double>("noise_rate", d.accounting.noise_rate);
    if (!(d.accounting.noise_rate >= 0.0 && d.accounting.noise_rate <= 1.0)) {
      s.fail("noise_rate", "must lie in [0, 1]");
    }
    if (d.accounting.n_rows < 1) s.fail("n_rows", "must be >= 1");
  } else if (source == "csv") {
    d.source = DatasetSource::kCsv;
    d.csv_path = s.require<std::string>("path");
    for (const auto& k : s.require<std::vector<std::string>>("kinds")) {
      try {
        d.kind_hints.push_back(parse_kind(k));
      } catch (const std::exception& e) {
        s.fail("kinds", e.what());
      }
    }
    const auto delim = s.get<std::string>("delimiter", ",");
    if (delim.size() != 1) s.fail("delimiter", "must be a single character");
    d.delimiter = delim[0];
  } else {
    s.fail("source", "expected boolean, accounting or csv, got '" + source + "'");
  }
  d.name = s.get<std::string>("name", source);
  return d;
}

InjectionPlan parse_injection(const Section& s, std::uint64_t derived_seed) {
  s.only({"class", "k", "count", "seed", "top_n_pool", "min_hamming", "max_attempts", "targets"});
  InjectionPlan p;
  const auto cls = s.get<std::string>("class", "TypeA");
  if (cls == "TypeA") {
    p.anomaly_class = InjectionClass::kTypeA;
  } else if (cls == "TypeB") {
    p.anomaly_class = InjectionClass::kTypeB;
  } else {
    s.fail("class", "expected TypeA or TypeB, got '" + cls + "'");
  }
  p.k = s.get<std::size_t>("k", p.k);
  p.count = s.get<std::size_t>("count", p.count);
  p.seed = s.get<std::uint64_t>("seed", derived_seed);
  p.top_n_pool = s.get<std::size_t>("top_n_pool", p.top_n_pool);
  p.min_hamming = s.get<std::size_t>("min_hamming", p.min_hamming);
  p.max_attempts = s.get<std::size_t>("max_attempts", p.max_attempts);
  p.targets = s.get<std::vector<std::size_t>>("targets", p.targets);
  if (p.k < 1) s.fail("k", "must be >= 1");
  if (p.max_attempts < 1) s.fail("max_attempts", "must be >= 1");
  return p;
}

std::vector<Method> parse_methods(const Section& s, const std::string& key, std::vector<Method> fallback) {
  if (!s.has(key)) return fallback;
  std::vector<Method> out;
  for (const auto& name : s.require<std::vector<std::string>>(key)) {
    try {
      out.push_back(parse_method(name));
    } catch (const ConfigError& e) {
      s.fail(key, e.what());
    }
  }
  if (out.empty()) s.fail(key, "must name at least one method");
  return out;
}

std::vector<std::uint64_t> seed_list(const Section& s, const std::string& key, std::vector<std::uint64_t> fallback) {
  if (!s.has(key)) return fallback;
  auto seeds = s.require<std::vector<std::uint64_t>>(key);
  if (seeds.empty()) s.fail(key, "must not be empty");
  return seeds;
}

RelevanceSpec parse_relevance(const Section& s) {
  s.only({"relevant", "uninformative"});
  RelevanceSpec spec;
  if (s.has("relevant")) {
    const json& sets = s.raw("relevant");
    if (!sets.is_array()) s.fail("relevant", "expected an array");
    for (std::size_t i = 0; i < sets.size(); ++i) {
      Section item(sets[i], s.path("relevant") + "[" + std::to_string(i) + "]");
      item.only({"name", "attributes", "from_label", "when_perturbed"});
      RelevanceSet set;
      set.name = item.require<std::string>("name");
      set.attributes = item.get<std::vector<std::size_t>>("attributes", {});
      set.from_label = item.get<bool>("from_label", false);
      if (item.has("when_perturbed")) set.when_perturbed = item.require<std::size_t>("when_perturbed");
      if (!set.from_label && set.attributes.empty()) item.fail("attributes", "must list at least one attribute");
      spec.relevant.push_back(std::move(set));
    }
  }
  spec.uninformative = s.get<std::vector<std::size_t>>("uninformative", {});
  return spec;
}

}  // namespace

std::string dataset_source_name(DatasetSource source) {
  switch (source) {
    case DatasetSource::kBoolean: return "boolean";
    case DatasetSource::kAccounting: return "accounting";
    case DatasetSource::kCsv: return "csv";
  }
  return "unknown";
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::size_t> default_widths(std::size_t input_dim) {
  if (input_dim < 2) throw ConfigError("model: cannot derive layer widths for " + std::to_string(input_dim) + " dims");
  auto scaled = [&](double f) {
    const auto w = static_cast<std::size_t>(std::lround(f * static_cast<double>(input_dim)));
    return std::clamp<std::size_t>(w, 1, input_dim - 1);
  };
  const std::size_t h1 = scaled(0.9), h2 = std::min(h1, scaled(0.8)), z = std::min(h2, scaled(0.75));
  return {input_dim, h1, h2, z, h2, h1, input_dim};
}

LayerSpec resolve_layer_spec(const LayerSpec& spec, std::size_t input_dim) {
  LayerSpec out = spec;
  if (out.widths.empty()) {
    out.widths = default_widths(input_dim);
  } else if (out.widths.front() == 0 || out.widths.back() == 0) {
    out.widths.front() = out.widths.back() = input_dim;
  }
  if (out.widths.front() != input_dim) {
    throw ConfigError("model.layer_spec: first width is " + std::to_string(out.widths.front()) +
                      " but the encoded data has " + std::to_string(input_dim) + " dims");
  }
  out.validate();
  return out;
}

RunConfig parse_run_config(const nlohmann::json& input, std::optional<std::uint64_t> seed_override) {
  json doc = input;
  const Section root(doc, "$");
  root.only({"master_seed", "dataset", "injection", "noise", "model", "explain", "benchmark", "relevance", "output"});

  RunConfig cfg;
  cfg.master_seed = seed_override ? *seed_override : root.get<std::uint64_t>("master_seed", 0);
  doc["master_seed"] = cfg.master_seed;
  cfg.hash = fnv1a_hex(doc.dump());
  const std::uint64_t m = cfg.master_seed;

  cfg.dataset = parse_dataset(root.child("dataset"), m);

  if (root.has("injection")) {
    const json& plans = doc.at("injection");
    if (!plans.is_array()) root.fail("injection", "expected an array of plans");
    for (std::size_t i = 0; i < plans.size(); ++i) {
      cfg.injection.push_back(
          parse_injection(Section(plans[i], "$.injection[" + std::to_string(i) + "]"), mix_seed(m, kInjectionSeeds + i)));
    }
  }

  const Section noise = root.child("noise");
  noise.only({"cardinality", "seed", "name"});
  cfg.noise.cardinality = noise.get<std::size_t>("cardinality", 0);
  cfg.noise.seed = noise.get<std::uint64_t>("seed", mix_seed(m, kNoiseSeed));
  cfg.noise.name = noise.get<std::string>("name", cfg.noise.name);

  const Section model = root.child("model");
  model.only({"widths", "leaky_slope", "batch_size", "learning_rate", "beta1", "beta2", "epsilon", "max_epochs",
              "patience", "min_delta", "seed", "shuffle"});
  cfg.layer_spec.widths = model.get<std::vector<std::size_t>>("widths", {});
  cfg.layer_spec.leaky_slope = model.get<double>("leaky_slope", cfg.layer_spec.leaky_slope);
  TrainConfig& t = cfg.train;
  t.batch_size = model.get<std::size_t>("batch_size", t.batch_size);
  t.learning_rate = model.get<double>("learning_rate", t.learning_rate);
  t.beta1 = model.get<double>("beta1", t.beta1);
  t.beta2 = model.get<double>("beta2", t.beta2);
  t.epsilon = model.get<double>("epsilon", t.epsilon);
  t.max_epochs = model.get<std::size_t>("max_epochs", t.max_epochs);
  t.patience = model.get<std::size_t>("patience", t.patience);
  t.min_delta = model.get<double>("min_delta", t.min_delta);
  t.seed = model.get<std::uint64_t>("seed", mix_seed(m, kTrainSeed));
  t.shuffle = model.get<bool>("shuffle", t.shuffle);
  try {
    t.validate();
  } catch (const ConfigError& e) {
    model.fail("", e.what());
  }

  const Section ex = root.child("explain");
  ex.only({"methods", "anomalies", "max_anomalies", "top_attributes", "top_encodings", "n_coalitions",
           "background_size", "seed", "ashap_drop_self"});
  ExplainConfig& e = cfg.explain;
  e.methods = parse_methods(ex, "methods", e.methods);
  e.anomalies = ex.get<std::vector<std::size_t>>("anomalies", {});
  e.max_anomalies = ex.get<std::size_t>("max_anomalies", e.max_anomalies);
  e.top_attributes = ex.get<std::size_t>("top_attributes", e.top_attributes);
  e.top_encodings = ex.get<std::size_t>("top_encodings", e.top_encodings);
  e.n_coalitions = ex.get<std::size_t>("n_coalitions", e.n_coalitions);
  e.background_size = ex.get<std::size_t>("background_size", e.background_size);
  e.seed = ex.get<std::uint64_t>("seed", mix_seed(m, kExplainSeed));
  e.ashap_drop_self = ex.get<bool>("ashap_drop_self", e.ashap_drop_self);
  if (e.top_encodings < 1) ex.fail("top_encodings", "must be >= 1");
  if (e.background_size < 1) ex.fail("background_size", "must be >= 1");

  // Benchmark inherits explanation parameters unless it overrides them.
  const Section bs = root.child("benchmark");
  bs.only({"model_seeds", "anomalies_per_run", "explanation_seeds", "delta_quantile", "methods", "background_size",
           "top_attributes", "top_encodings", "n_coalitions", "ashap_drop_self", "stability_n", "error_n_max",
           "greedy_replacement", "greedy_top_values", "reserve_unseen"});
  BenchmarkConfig& b = cfg.benchmark;
  b.model_seeds = seed_list(bs, "model_seeds", {mix_seed(m, kModelSeeds)});
  b.explanation_seeds = seed_list(bs, "explanation_seeds",
                                  {mix_seed(m, kExplanationSeeds), mix_seed(m, kExplanationSeeds + 1),
                                   mix_seed(m, kExplanationSeeds + 2)});
  b.anomalies_per_run = bs.get<std::size_t>("anomalies_per_run", b.anomalies_per_run);
  b.delta_quantile = bs.get<double>("delta_quantile", b.delta_quantile);
  b.methods = parse_methods(bs, "methods", e.methods);
  b.background_size = bs.get<std::size_t>("background_size", e.background_size);
  b.top_attributes = bs.get<std::size_t>("top_attributes", e.top_attributes);
  b.top_encodings = bs.get<std::size_t>("top_encodings", e.top_encodings);
  b.n_coalitions = bs.get<std::size_t>("n_coalitions", e.n_coalitions);
  b.ashap_drop_self = bs.get<bool>("ashap_drop_self", e.ashap_drop_self);
  b.stability_n = bs.get<std::size_t>("stability_n", b.stability_n);
  b.error_n_max = bs.get<std::size_t>("error_n_max", b.error_n_max);
  b.greedy_replacement = bs.get<bool>("greedy_replacement", b.greedy_replacement);
  b.greedy_top_values = bs.get<std::size_t>("greedy_top_values", b.greedy_top_values);
  b.reserve_unseen = bs.get<bool>("reserve_unseen", b.reserve_unseen);
  b.layer_spec = cfg.layer_spec;
  b.train = cfg.train;
  try {
    b.validate();
  } catch (const ConfigError& err) {
    bs.fail("", err.what());
  }

  cfg.relevance = parse_relevance(root.child("relevance"));

  const Section out = root.child("output");
  out.only({"dir"});
  cfg.output_dir = out.get<std::string>("dir", cfg.output_dir);
  return cfg;
}

RunConfig load_run_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(doc, seed_override);
}

}  // namespace aeshap
