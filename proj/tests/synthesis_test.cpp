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

#include <cmath>
#include <map>
#include <set>

#include "aeshap/error.hpp"
#include "aeshap/synthesis.hpp"
#include "testing.hpp"

namespace aeshap {
namespace {

bool bit(const Cell& c) { return std::get<double>(c) > 0.5; }

// Reference semantics written out per operator, independent of the library.
bool reference_dependency(const Dependency& d, const Record& row) {
  const auto& in = d.inputs;
  switch (d.op) {
    case BoolOp::kAnd: return bit(row[in[0]]) && bit(row[in[1]]);
    case BoolOp::kOr: return bit(row[in[0]]) || bit(row[in[1]]);
    case BoolOp::kXor: return bit(row[in[0]]) != bit(row[in[1]]);
    case BoolOp::kNot: return !bit(row[in[0]]);
    case BoolOp::kCopy: return bit(row[in[0]]);
  }
  return false;
}

double mutual_information_bits(const std::vector<std::string>& x, const std::vector<std::string>& y) {
  std::map<std::string, double> px, py;
  std::map<std::pair<std::string, std::string>, double> pxy;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    px[x[i]] += 1.0 / n;
    py[y[i]] += 1.0 / n;
    pxy[{x[i], y[i]}] += 1.0 / n;
  }
  double mi = 0.0;
  for (const auto& [key, p] : pxy) mi += p * std::log2(p / (px[key.first] * py[key.second]));
  return mi;
}

TEST(Boolean, DefaultSpecHasTwentyAttributes) {
  BooleanSpec spec = BooleanSpec::defaults();
  spec.n_rows = 10;
  const auto t = generate_boolean(spec);
  EXPECT_EQ(t.num_attributes(), 20u);
  EXPECT_EQ(t.schema[16].name, "a17");
  EXPECT_EQ(encode(t, true).map.total_dims(), 20u);
}

TEST(Boolean, EveryRowSatisfiesEveryDependency) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    BooleanSpec spec = BooleanSpec::defaults();
    spec.n_rows = 2000;
    spec.seed = seed;
    const auto t = generate_boolean(spec);
    for (const auto& row : t.rows) {
      for (const auto& d : spec.dependencies) {
        ASSERT_EQ(bit(row[d.output]), reference_dependency(d, row));
      }
    }
  }
}

TEST(Boolean, AndAndOrDependenciesUseDocumentedAttributes) {
  BooleanSpec spec = BooleanSpec::defaults();
  spec.n_rows = 500;
  const auto t = generate_boolean(spec);
  for (const auto& row : t.rows) {
    EXPECT_EQ(bit(row[16]), bit(row[1]) && bit(row[2]));
    EXPECT_EQ(bit(row[17]), bit(row[3]) || bit(row[4]));
  }
}

TEST(Boolean, IndependentBitsAreFair) {
  BooleanSpec spec = BooleanSpec::defaults();
  spec.n_rows = 20000;
  const auto t = generate_boolean(spec);
  for (std::size_t j = 0; j < 15; ++j) {
    double ones = 0;
    for (const auto& row : t.rows) ones += std::get<double>(row[j]);
    // 5 sigma for a fair coin at this N.
    EXPECT_NEAR(ones / 20000.0, 0.5, 5 * 0.5 / std::sqrt(20000.0)) << "attribute " << j;
  }
}

TEST(Boolean, InvalidSpecsAreRejected) {
  BooleanSpec spec = BooleanSpec::defaults();
  spec.n_rows = 0;
  EXPECT_THROW(generate_boolean(spec), ConfigError);
  spec = BooleanSpec::defaults();
  spec.dependencies.push_back({16, BoolOp::kOr, {0, 1}});
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = BooleanSpec::defaults();
  spec.dependencies[1].inputs = {15, 2};  // input is another output
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = BooleanSpec::defaults();
  spec.dependencies[0].inputs = {1, 2};
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Boolean, SameSeedSameTable) {
  BooleanSpec spec = BooleanSpec::defaults();
  spec.n_rows = 300;
  spec.seed = 77;
  EXPECT_EQ(generate_boolean(spec).rows, generate_boolean(spec).rows);
  auto other = spec;
  other.seed = 78;
  EXPECT_NE(generate_boolean(spec).rows, generate_boolean(other).rows);
}

TEST(TypeA, BooleanInjectionViolatesTargetDependency) {
  BooleanSpec spec = BooleanSpec::defaults();
  spec.n_rows = 1000;
  const auto clean = generate_boolean(spec);
  InjectionPlan plan;
  plan.count = 50;
  plan.targets = {16};
  plan.seed = 3;
  const auto t = inject_type_a(clean, plan, spec.dependencies);
  EXPECT_EQ(t.anomalous_rows().size(), 50u);
  for (auto r : t.anomalous_rows()) {
    EXPECT_EQ(t.labels[r].perturbed, std::vector<std::size_t>{16});
    EXPECT_NE(bit(t.rows[r][16]), bit(t.rows[r][1]) && bit(t.rows[r][2]));
  }
  for (auto r : t.normal_rows()) EXPECT_EQ(t.rows[r], clean.rows[r]);
}

TEST(TypeA, InjectedTokensNeverOccurBeforeInjection) {
  AccountingSpec aspec;
  aspec.n_rows = 2000;
  const auto clean = generate_accounting(aspec);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    InjectionPlan plan;
    plan.k = 2;
    plan.count = 40;
    plan.seed = seed;
    const auto t = inject_type_a(clean, plan);
    for (auto r : t.anomalous_rows()) {
      ASSERT_EQ(t.labels[r].perturbed.size(), 2u);
      for (auto j : t.labels[r].perturbed) {
        const auto& a = t.schema[j];
        if (a.is_categorical()) {
          const auto token = std::get<std::string>(t.rows[r][j]);
          // Brute-force scan of the original column.
          for (const auto& row : clean.rows) ASSERT_NE(std::get<std::string>(row[j]), token);
        } else {
          const double v = std::get<double>(t.rows[r][j]);
          EXPECT_TRUE(v < a.min || v > a.max);
        }
      }
    }
    EXPECT_NO_THROW(t.validate());
  }
}

TEST(TypeA, ErrorsOnImpossiblePlans) {
  const auto t = testing::small_table(10, 1);
  InjectionPlan plan;
  plan.count = 11;
  EXPECT_THROW(inject_type_a(t, plan), ConfigError);
  plan.count = 1;
  plan.k = 4;
  EXPECT_THROW(inject_type_a(t, plan), ConfigError);
}

TEST(TypeB, RowsKeepHammingFloorAndUseObservedValues) {
  const auto clean = testing::small_table(400, 8);
  InjectionPlan plan;
  plan.anomaly_class = InjectionClass::kTypeB;
  plan.k = 2;
  plan.min_hamming = 2;
  plan.top_n_pool = 3;
  plan.count = 10;
  plan.seed = 4;
  // Numeric weights are nearly unique, so whole-row copies are the only risk.
  const auto t = inject_type_b(clean, plan);
  ASSERT_EQ(t.anomalous_rows().size(), 10u);
  for (auto r : t.anomalous_rows()) {
    for (const auto& original : clean.rows) {
      std::size_t d = 0;
      for (std::size_t j = 0; j < 3; ++j) d += t.rows[r][j] == original[j] ? 0 : 1;
      ASSERT_GE(d, plan.min_hamming);
    }
    for (std::size_t j = 0; j < 3; ++j) {
      bool seen = false;
      for (const auto& original : clean.rows) seen = seen || original[j] == t.rows[r][j];
      EXPECT_TRUE(seen);
    }
  }
}

TEST(TypeB, ExhaustedBudgetIsReported) {
  RecordTable t;
  t.schema = {AttributeSchema::categorical("x", {"a", "b"}), AttributeSchema::categorical("y", {"a", "b"})};
  for (const char* x : {"a", "b"}) {
    for (const char* y : {"a", "b"}) t.rows.push_back({std::string(x), std::string(y)});
  }
  t.labels.assign(4, AnomalyLabel{});
  InjectionPlan plan;
  plan.anomaly_class = InjectionClass::kTypeB;
  plan.k = 1;
  plan.min_hamming = 1;
  plan.max_attempts = 50;
  // Every combination already exists.
  EXPECT_THROW(inject_type_b(t, plan), DataError);
}

TEST(Noise, AppendsIndependentUniformColumn) {
  BooleanSpec spec = BooleanSpec::defaults();
  spec.n_rows = 10000;
  const auto base = generate_boolean(spec);
  const auto t = add_noise_attribute(base, 2, 5);
  ASSERT_EQ(t.num_attributes(), base.num_attributes() + 1);
  EXPECT_EQ(t.schema.back().vocabulary, (std::vector<std::string>{"N1", "N2"}));
  std::vector<std::string> noise;
  for (const auto& row : t.rows) noise.push_back(std::get<std::string>(row.back()));
  for (std::size_t j = 0; j < base.num_attributes(); ++j) {
    std::vector<std::string> col;
    for (const auto& row : t.rows) col.push_back(cell_text(row[j]));
    EXPECT_LT(mutual_information_bits(noise, col), 0.01) << "column " << j;
  }
  EXPECT_EQ(add_noise_attribute(base, 2, 5).rows, t.rows);
  EXPECT_THROW(add_noise_attribute(base, 1, 5), ConfigError);
}

TEST(Accounting, GeneratesValidTable) {
  AccountingSpec spec;
  spec.n_rows = 500;
  const auto t = generate_accounting(spec);
  EXPECT_EQ(t.num_attributes(), 9u);
  EXPECT_NO_THROW(t.validate());
  EXPECT_EQ(generate_accounting(spec).rows, t.rows);
}

TEST(SynthesisJson, SpecsRoundTrip) {
  BooleanSpec spec = BooleanSpec::defaults();
  spec.n_rows = 123;
  spec.seed = 9;
  const auto back = boolean_spec_from_json(to_json(spec));
  EXPECT_EQ(back.n_rows, 123u);
  EXPECT_EQ(back.dependencies.size(), 5u);
  EXPECT_EQ(back.dependencies[1].op, BoolOp::kAnd);
  InjectionPlan plan;
  plan.anomaly_class = InjectionClass::kTypeB;
  plan.targets = {1, 2};
  const auto p = injection_plan_from_json(to_json(plan));
  EXPECT_EQ(p.anomaly_class, InjectionClass::kTypeB);
  EXPECT_EQ(p.targets, plan.targets);
}

}  // namespace
}  // namespace aeshap
