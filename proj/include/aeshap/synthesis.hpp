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
#include <string>
#include <vector>

#include "aeshap/tabular.hpp"
#include "json.hpp"

namespace aeshap {

enum class BoolOp { kAnd, kOr, kXor, kNot, kCopy };

struct Dependency {
  std::size_t output = 0;             // attribute index (0-based)
  BoolOp op = BoolOp::kAnd;
  std::vector<std::size_t> inputs;    // independent attribute indices
};

struct BooleanSpec {
  std::size_t n_independent = 15;
  std::vector<Dependency> dependencies;
  std::size_t n_rows = 10000;
  std::uint64_t seed = 0;
  double p_true = 0.5;

  // 15 independent attributes and AND(a2,a3)->a17, OR(a4,a5)->a18,
  // XOR(a6,a7)->a19, NOT(a8)->a16, COPY(a9)->a20 (1-indexed names).
  static BooleanSpec defaults();

  std::size_t num_attributes() const { return n_independent + dependencies.size(); }
  void validate() const;
};

// Seven categorical and two numerical columns with the kind of dependencies
// found in ERP journal entries (document type drives posting key and user,
// posting key drives account, account drives tax code, company drives
// currency, document type and currency drive the amounts).
struct AccountingSpec {
  std::size_t n_rows = 5000;
  std::uint64_t seed = 0;
  double noise_rate = 0.02;  // probability that a dependent cell ignores its parent
};

enum class InjectionClass { kTypeA, kTypeB };

struct InjectionPlan {
  InjectionClass anomaly_class = InjectionClass::kTypeA;
  std::size_t k = 1;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  std::size_t top_n_pool = 3;        // TypeB
  std::size_t min_hamming = 1;       // TypeB
  std::size_t max_attempts = 10000;  // TypeB, per anomaly
  std::vector<std::size_t> targets;  // candidate attributes; empty = all

  void validate(std::size_t num_attributes) const;
};

RecordTable generate_boolean(const BooleanSpec& spec);
RecordTable generate_accounting(const AccountingSpec& spec);

bool evaluate_dependency(const Dependency& dep, const Record& row);

// Overwrites k attributes of `count` normal rows with unprecedented values.
// Attributes listed as dependency outputs are flipped instead.
RecordTable inject_type_a(const RecordTable& table, const InjectionPlan& plan,
                          const std::vector<Dependency>& dependencies = {});

// Replaces `count` normal rows by combinations of frequent values that lie
// at least `min_hamming` attributes away from every pre-existing row.
RecordTable inject_type_b(const RecordTable& table, const InjectionPlan& plan);

RecordTable add_noise_attribute(const RecordTable& table, std::size_t cardinality, std::uint64_t seed,
                                const std::string& name = "noise");

std::string bool_op_name(BoolOp op);
BoolOp parse_bool_op(const std::string& name);

nlohmann::json to_json(const BooleanSpec& spec);
BooleanSpec boolean_spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const InjectionPlan& plan);
InjectionPlan injection_plan_from_json(const nlohmann::json& doc);

}  // namespace aeshap
