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

#include "aeshap/synthesis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "aeshap/error.hpp"
#include "aeshap/random.hpp"

namespace aeshap {
namespace {

double as_bit(const Cell& c) { return std::get<double>(c); }

std::vector<std::size_t> pick_attributes(Rng& rng, const std::vector<std::size_t>& candidates,
                                         std::size_t k) {
  auto picks = rng.sample_without_replacement(candidates.size(), k);
  std::vector<std::size_t> out;
  for (auto p : picks) out.push_back(candidates[p]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> candidate_attributes(const InjectionPlan& plan, std::size_t num_attributes) {
  if (!plan.targets.empty()) return plan.targets;
  std::vector<std::size_t> all(num_attributes);
  for (std::size_t j = 0; j < num_attributes; ++j) all[j] = j;
  return all;
}

std::size_t draw_weighted(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return i;
  }
  return weights.size() - 1;
}

}  // namespace

BooleanSpec BooleanSpec::defaults() {
  BooleanSpec spec;
  spec.dependencies = {
      {15, BoolOp::kNot, {7}},
      {16, BoolOp::kAnd, {1, 2}},
      {17, BoolOp::kOr, {3, 4}},
      {18, BoolOp::kXor, {5, 6}},
      {19, BoolOp::kCopy, {8}},
  };
  return spec;
}

void BooleanSpec::validate() const {
  const std::size_t t = num_attributes();
  if (n_rows == 0) throw ConfigError("boolean spec: n_rows must be positive (empty request)");
  if (!(p_true > 0.0 && p_true < 1.0)) throw ConfigError("boolean spec: p_true must lie in (0, 1)");
  std::set<std::size_t> outputs;
  for (const auto& d : dependencies) {
    if (d.output >= t) throw ConfigError("boolean spec: dependency output out of range");
    if (!outputs.insert(d.output).second) throw ConfigError("boolean spec: duplicate dependency output");
  }
  for (const auto& d : dependencies) {
    const bool unary = d.op == BoolOp::kNot || d.op == BoolOp::kCopy;
    if (unary ? d.inputs.size() != 1 : d.inputs.size() < 2) {
      throw ConfigError("boolean spec: wrong arity for " + bool_op_name(d.op));
    }
    for (auto in : d.inputs) {
      if (in >= t) throw ConfigError("boolean spec: dependency input out of range");
      if (outputs.count(in)) throw ConfigError("boolean spec: dependency inputs must be independent attributes");
    }
  }
}

void InjectionPlan::validate(std::size_t num_attributes) const {
  if (k < 1 || k > num_attributes) throw ConfigError("injection plan: k must lie in [1, T]");
  if (count < 1) throw ConfigError("injection plan: count must be positive");
  for (auto t : targets) {
    if (t >= num_attributes) throw ConfigError("injection plan: target attribute out of range");
  }
  if (!targets.empty() && k > targets.size()) throw ConfigError("injection plan: k exceeds target pool");
  if (anomaly_class == InjectionClass::kTypeB) {
    if (min_hamming < k) throw ConfigError("injection plan: min_hamming must be >= k");
    if (top_n_pool < 2) throw ConfigError("injection plan: top_n_pool must be >= 2");
    if (max_attempts < 1) throw ConfigError("injection plan: max_attempts must be positive");
  }
}

bool evaluate_dependency(const Dependency& dep, const Record& row) {
  const auto bit = [&](std::size_t i) { return as_bit(row[i]) > 0.5; };
  switch (dep.op) {
    case BoolOp::kAnd: {
      bool v = true;
      for (auto i : dep.inputs) v = v && bit(i);
      return v;
    }
    case BoolOp::kOr: {
      bool v = false;
      for (auto i : dep.inputs) v = v || bit(i);
      return v;
    }
    case BoolOp::kXor: {
      bool v = false;
      for (auto i : dep.inputs) v = v != bit(i);
      return v;
    }
    case BoolOp::kNot:
      return !bit(dep.inputs.front());
    case BoolOp::kCopy:
      return bit(dep.inputs.front());
  }
  return false;
}

RecordTable generate_boolean(const BooleanSpec& spec) {
  spec.validate();
  const std::size_t t = spec.num_attributes();
  std::vector<bool> is_output(t, false);
  for (const auto& d : spec.dependencies) is_output[d.output] = true;

  RecordTable table;
  for (std::size_t j = 0; j < t; ++j) {
    table.schema.push_back(AttributeSchema::numerical("a" + std::to_string(j + 1), 0.0, 1.0));
  }
  Rng rng(spec.seed);
  table.rows.reserve(spec.n_rows);
  for (std::size_t r = 0; r < spec.n_rows; ++r) {
    Record row(t, Cell{0.0});
    for (std::size_t j = 0; j < t; ++j) {
      if (!is_output[j]) row[j] = rng.bernoulli(spec.p_true) ? 1.0 : 0.0;
    }
    for (const auto& d : spec.dependencies) row[d.output] = evaluate_dependency(d, row) ? 1.0 : 0.0;
    table.rows.push_back(std::move(row));
  }
  table.labels.assign(spec.n_rows, AnomalyLabel{});
  return table;
}

RecordTable generate_accounting(const AccountingSpec& spec) {
  if (spec.n_rows == 0) throw ConfigError("accounting spec: n_rows must be positive (empty request)");
  Rng rng(spec.seed);

  const std::array<std::string, 4> companies{"C10", "C20", "C30", "C40"};
  const std::array<double, 4> company_w{0.4, 0.3, 0.2, 0.1};
  const std::array<std::string, 6> doc_types{"SA", "KR", "DR", "KZ", "DZ", "AB"};
  const std::array<double, 6> doc_w{0.35, 0.2, 0.18, 0.12, 0.1, 0.05};
  // Two admissible posting keys per document type, first one dominant.
  const std::array<std::array<std::string, 2>, 6> keys_by_doc{{
      {"40", "50"}, {"31", "40"}, {"01", "50"}, {"25", "50"}, {"15", "40"}, {"40", "50"}}};
  const std::map<std::string, std::array<std::string, 2>> accounts_by_key{
      {"01", {"140000", "800000"}}, {"15", {"140000", "113100"}}, {"25", {"160000", "113100"}},
      {"31", {"160000", "400000"}}, {"40", {"400000", "113100"}}, {"50", {"800000", "175000"}}};
  const std::map<std::string, std::string> tax_by_account{
      {"113100", "V0"}, {"140000", "A1"}, {"160000", "V1"}, {"175000", "A0"}, {"400000", "V2"},
      {"800000", "A1"}};
  const std::array<std::array<std::string, 2>, 6> users_by_doc{{
      {"U01", "U02"}, {"U03", "U04"}, {"U05", "U06"}, {"U07", "U08"}, {"U09", "U10"}, {"U11", "U12"}}};
  const std::array<double, 6> base_amount{1200.0, 5400.0, 800.0, 15000.0, 2500.0, 300.0};
  const std::map<std::string, double> fx{{"EUR", 1.0}, {"USD", 1.1}, {"CHF", 0.95}};

  std::set<std::string> all_accounts, all_taxes, all_keys, all_users;
  for (const auto& [k, v] : accounts_by_key) {
    all_keys.insert(k);
    all_accounts.insert(v.begin(), v.end());
  }
  for (const auto& [a, t] : tax_by_account) all_taxes.insert(t);
  for (const auto& pair : users_by_doc) all_users.insert(pair.begin(), pair.end());
  const std::vector<std::string> account_list(all_accounts.begin(), all_accounts.end());
  const std::vector<std::string> tax_list(all_taxes.begin(), all_taxes.end());
  const std::vector<std::string> key_list(all_keys.begin(), all_keys.end());
  const std::vector<std::string> user_list(all_users.begin(), all_users.end());

  auto noisy = [&](const std::string& clean, const std::vector<std::string>& pool) {
    return rng.bernoulli(spec.noise_rate) ? pool[rng.index(pool.size())] : clean;
  };

  std::vector<Record> rows;
  rows.reserve(spec.n_rows);
  for (std::size_t r = 0; r < spec.n_rows; ++r) {
    const std::size_t c = draw_weighted(rng, company_w);
    const std::size_t d = draw_weighted(rng, doc_w);
    const std::string key = noisy(keys_by_doc[d][rng.bernoulli(0.8) ? 0 : 1], key_list);
    const std::string account = noisy(accounts_by_key.at(key)[rng.bernoulli(0.75) ? 0 : 1], account_list);
    std::string currency = c == 0 ? "EUR" : c == 1 ? "USD" : c == 2 ? "CHF" : (rng.bernoulli(0.5) ? "EUR" : "USD");
    const std::string tax = noisy(tax_by_account.at(account), tax_list);
    const std::string user = noisy(users_by_doc[d][rng.bernoulli(0.85) ? 0 : 1], user_list);
    const double local = std::round(base_amount[d] * (0.8 + 0.4 * rng.uniform()) * 100.0) / 100.0;
    const double document = std::round(local * fx.at(currency) * 100.0) / 100.0;
    rows.push_back(Record{companies[c], doc_types[d], key, account, currency, user, tax, local, document});
  }

  const std::vector<std::string> names{"company_code", "document_type", "posting_key", "account",
                                       "currency", "user", "tax_code", "amount_local", "amount_document"};
  RecordTable table;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (j < 7) {
      std::set<std::string> distinct;
      for (const auto& row : rows) distinct.insert(std::get<std::string>(row[j]));
      table.schema.push_back(AttributeSchema::categorical(names[j], {distinct.begin(), distinct.end()}));
    } else {
      double lo = INFINITY, hi = -INFINITY;
      for (const auto& row : rows) {
        lo = std::min(lo, std::get<double>(row[j]));
        hi = std::max(hi, std::get<double>(row[j]));
      }
      table.schema.push_back(AttributeSchema::numerical(names[j], lo, hi));
    }
  }
  table.rows = std::move(rows);
  table.labels.assign(table.rows.size(), AnomalyLabel{});
  return table;
}

RecordTable inject_type_a(const RecordTable& table, const InjectionPlan& plan,
                          const std::vector<Dependency>& dependencies) {
  if (plan.anomaly_class != InjectionClass::kTypeA) throw ConfigError("inject_type_a: plan is not TypeA");
  const std::size_t t = table.num_attributes();
  plan.validate(t);
  auto normal = table.normal_rows();
  if (plan.count > normal.size()) {
    throw ConfigError("inject_type_a: count " + std::to_string(plan.count) + " exceeds the " +
                      std::to_string(normal.size()) + " available rows");
  }
  const auto candidates = candidate_attributes(plan, t);

  std::vector<bool> is_output(t, false);
  for (const auto& d : dependencies) {
    if (d.output < t) is_output[d.output] = true;
  }

  // Pre-injection value sets, used to guarantee unprecedented tokens.
  std::vector<std::set<std::string>> seen(t);
  for (std::size_t j = 0; j < t; ++j) {
    if (!table.schema[j].is_categorical()) continue;
    for (const auto& row : table.rows) seen[j].insert(std::get<std::string>(row[j]));
  }

  Rng rng(plan.seed);
  RecordTable out = table;
  const auto picks = rng.sample_without_replacement(normal.size(), plan.count);
  for (auto p : picks) {
    const std::size_t r = normal[p];
    const auto attrs = pick_attributes(rng, candidates, plan.k);
    for (auto j : attrs) {
      const AttributeSchema& a = table.schema[j];
      Cell& cell = out.rows[r][j];
      if (is_output[j]) {
        cell = std::get<double>(cell) > 0.5 ? 0.0 : 1.0;
      } else if (a.is_categorical()) {
        std::string token;
        do {
          token = std::string(1, static_cast<char>('A' + rng.index(26))) + std::to_string(10 + rng.index(90));
        } while (seen[j].count(token) > 0);
        seen[j].insert(token);  // unique per injected row as well
        cell = token;
      } else {
        const double span = a.max - a.min;
        const double offset = span * (0.25 + rng.uniform());
        cell = rng.bernoulli(0.5) ? a.max + offset : a.min - offset;
      }
    }
    out.labels[r] = AnomalyLabel{AnomalyClass::kTypeA, plan.k, attrs};
  }
  return out;
}

RecordTable inject_type_b(const RecordTable& table, const InjectionPlan& plan) {
  if (plan.anomaly_class != InjectionClass::kTypeB) throw ConfigError("inject_type_b: plan is not TypeB");
  const std::size_t t = table.num_attributes();
  plan.validate(t);
  auto normal = table.normal_rows();
  if (plan.count > normal.size()) throw ConfigError("inject_type_b: count exceeds available rows");

  // Top-n most frequent values per attribute; ties broken by text order.
  std::vector<std::vector<Cell>> pools(t);
  for (std::size_t j = 0; j < t; ++j) {
    std::map<std::string, std::pair<std::size_t, Cell>> freq;
    for (const auto& row : table.rows) {
      auto& entry = freq.try_emplace(cell_text(row[j]), 0, row[j]).first->second;
      ++entry.first;
    }
    std::vector<std::pair<std::string, std::pair<std::size_t, Cell>>> ranked(freq.begin(), freq.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second.first > b.second.first; });
    for (std::size_t i = 0; i < ranked.size() && i < plan.top_n_pool; ++i) {
      pools[j].push_back(ranked[i].second.second);
    }
    if (pools[j].size() < 2) {
      throw DataError("inject_type_b: attribute '" + table.schema[j].name +
                      "' has fewer than two values in its top-n pool");
    }
  }

  Rng rng(plan.seed);
  RecordTable out = table;
  const auto picks = rng.sample_without_replacement(normal.size(), plan.count);
  for (auto p : picks) {
    const std::size_t r = normal[p];
    bool placed = false;
    Record candidate(t);
    for (std::size_t attempt = 0; attempt < plan.max_attempts && !placed; ++attempt) {
      for (std::size_t j = 0; j < t; ++j) candidate[j] = pools[j][rng.index(pools[j].size())];
      placed = true;
      for (const auto& original : table.rows) {
        std::size_t distance = 0;
        for (std::size_t j = 0; j < t && distance < plan.min_hamming; ++j) {
          if (!(candidate[j] == original[j])) ++distance;
        }
        if (distance < plan.min_hamming) {
          placed = false;
          break;
        }
      }
    }
    if (!placed) {
      throw DataError("inject_type_b: no combination at Hamming distance >= " +
                      std::to_string(plan.min_hamming) + " found within " +
                      std::to_string(plan.max_attempts) + " attempts");
    }
    std::vector<std::size_t> changed;
    for (std::size_t j = 0; j < t; ++j) {
      if (!(candidate[j] == table.rows[r][j])) changed.push_back(j);
    }
    out.rows[r] = candidate;
    out.labels[r] = AnomalyLabel{AnomalyClass::kTypeB, plan.k, changed};
  }
  return out;
}

RecordTable add_noise_attribute(const RecordTable& table, std::size_t cardinality, std::uint64_t seed,
                                const std::string& name) {
  if (cardinality < 2) throw ConfigError("noise attribute: cardinality must be >= 2");
  std::vector<std::string> tokens;
  for (std::size_t i = 1; i <= cardinality; ++i) tokens.push_back("N" + std::to_string(i));
  std::vector<std::string> vocabulary = tokens;
  std::sort(vocabulary.begin(), vocabulary.end());

  RecordTable out = table;
  out.schema.push_back(AttributeSchema::categorical(name, vocabulary));
  Rng rng(seed);
  for (auto& row : out.rows) row.emplace_back(tokens[rng.index(cardinality)]);
  return out;
}

std::string bool_op_name(BoolOp op) {
  switch (op) {
    case BoolOp::kAnd: return "AND";
    case BoolOp::kOr: return "OR";
    case BoolOp::kXor: return "XOR";
    case BoolOp::kNot: return "NOT";
    case BoolOp::kCopy: return "COPY";
  }
  return "?";
}

BoolOp parse_bool_op(const std::string& name) {
  if (name == "AND") return BoolOp::kAnd;
  if (name == "OR") return BoolOp::kOr;
  if (name == "XOR") return BoolOp::kXor;
  if (name == "NOT") return BoolOp::kNot;
  if (name == "COPY") return BoolOp::kCopy;
  throw ConfigError("unknown boolean operator '" + name + "'");
}

nlohmann::json to_json(const BooleanSpec& spec) {
  nlohmann::json deps = nlohmann::json::array();
  for (const auto& d : spec.dependencies) {
    deps.push_back({{"output", d.output}, {"op", bool_op_name(d.op)}, {"inputs", d.inputs}});
  }
  return {{"n_independent", spec.n_independent}, {"dependencies", deps}, {"n_rows", spec.n_rows},
          {"seed", spec.seed}, {"p_true", spec.p_true}};
}

BooleanSpec boolean_spec_from_json(const nlohmann::json& doc) {
  BooleanSpec spec = BooleanSpec::defaults();
  spec.n_independent = doc.value("n_independent", spec.n_independent);
  spec.n_rows = doc.value("n_rows", spec.n_rows);
  spec.seed = doc.value("seed", spec.seed);
  spec.p_true = doc.value("p_true", spec.p_true);
  if (doc.contains("dependencies")) {
    spec.dependencies.clear();
    for (const auto& d : doc.at("dependencies")) {
      spec.dependencies.push_back({d.at("output").get<std::size_t>(), parse_bool_op(d.at("op").get<std::string>()),
                                   d.at("inputs").get<std::vector<std::size_t>>()});
    }
  }
  return spec;
}

nlohmann::json to_json(const InjectionPlan& plan) {
  return {{"class", plan.anomaly_class == InjectionClass::kTypeA ? "TypeA" : "TypeB"},
          {"k", plan.k},
          {"count", plan.count},
          {"seed", plan.seed},
          {"top_n_pool", plan.top_n_pool},
          {"min_hamming", plan.min_hamming},
          {"max_attempts", plan.max_attempts},
          {"targets", plan.targets}};
}

InjectionPlan injection_plan_from_json(const nlohmann::json& doc) {
  InjectionPlan plan;
  const auto cls = doc.value("class", std::string("TypeA"));
  if (cls == "TypeA") {
    plan.anomaly_class = InjectionClass::kTypeA;
  } else if (cls == "TypeB") {
    plan.anomaly_class = InjectionClass::kTypeB;
  } else {
    throw ConfigError("unknown anomaly class '" + cls + "'");
  }
  plan.k = doc.value("k", plan.k);
  plan.count = doc.value("count", plan.count);
  plan.seed = doc.value("seed", plan.seed);
  plan.top_n_pool = doc.value("top_n_pool", plan.top_n_pool);
  plan.min_hamming = doc.value("min_hamming", plan.min_hamming);
  plan.max_attempts = doc.value("max_attempts", plan.max_attempts);
  plan.targets = doc.value("targets", plan.targets);
  return plan;
}

}  // namespace aeshap
