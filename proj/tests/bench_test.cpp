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

#include <set>

#include "aeshap/bench.hpp"
#include "aeshap/error.hpp"
#include "aeshap/synthesis.hpp"
#include "testing.hpp"

namespace aeshap {
namespace {

DatasetBundle small_bundle() {
  InjectionPlan plan;
  plan.k = 1;
  plan.count = 15;
  plan.seed = 4;
  DatasetBundle b;
  b.name = "small";
  b.table = add_noise_attribute(inject_type_a(testing::small_table(300, 2), plan), 2, 5);
  return b;
}

BenchmarkConfig small_config() {
  BenchmarkConfig c;
  c.model_seeds = {1};
  c.anomalies_per_run = 5;
  c.explanation_seeds = {1, 2};
  c.delta_quantile = 0.9;
  c.methods = {Method::kRandom, Method::kReshape};
  c.background_size = 10;
  c.top_attributes = 1;
  c.layer_spec.widths = {0, 8, 5, 8, 0};
  c.train.max_epochs = 5;
  c.train.learning_rate = 0.01;
  c.train.batch_size = 32;
  return c;
}

RelevanceSpec small_relevance() {
  RelevanceSpec r;
  RelevanceSet perturbed;
  perturbed.name = "perturbed";
  perturbed.from_label = true;
  r.relevant.push_back(perturbed);
  r.uninformative = {3};
  return r;
}

TEST(Relevance, TargetsFollowLabels) {
  AnomalyLabel label;
  label.anomaly_class = AnomalyClass::kTypeA;
  label.k = 1;
  label.perturbed = {2};
  RelevanceSet s;
  s.from_label = true;
  EXPECT_TRUE(s.applies_to(label));
  EXPECT_EQ(s.targets_for(label), (std::vector<std::size_t>{2}));
  RelevanceSet fixed;
  fixed.attributes = {0, 1};
  fixed.when_perturbed = 5;
  EXPECT_FALSE(fixed.applies_to(label));
  fixed.when_perturbed = 2;
  EXPECT_TRUE(fixed.applies_to(label));
  EXPECT_EQ(fixed.targets_for(label), (std::vector<std::size_t>{0, 1}));
  RelevanceSpec spec;
  spec.uninformative = {9};
  EXPECT_THROW(spec.validate(4), ConfigError);
}

TEST(Summary, PopulationStd) {
  const auto s = summarize("A", "m", "d", {1, 3}, true);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.std, 1.0);
  EXPECT_EQ(s.n, 2u);
}

TEST(Benchmark, ReportShape) {
  const auto report = run_benchmark(small_config(), small_bundle(), small_relevance());
  const std::vector<std::string> metrics{"mrr_r:perturbed", "hits_auc:perturbed", "mrr_u", "stability_s1",
                                         "error_reduction"};
  EXPECT_EQ(report.metrics.size(), 2u * metrics.size());
  for (auto m : {Method::kRandom, Method::kReshape}) {
    for (const auto& name : metrics) {
      const auto* s = report.find(method_name(m), name, "small");
      ASSERT_NE(s, nullptr) << method_name(m) << " " << name;
      EXPECT_GT(s->n, 0u);
    }
    const double mrr = report.mean(m, "mrr_r:perturbed");
    EXPECT_GT(mrr, 0.0);
    EXPECT_LE(mrr, 1.0);
    const double auc = report.mean(m, "hits_auc:perturbed");
    EXPECT_GE(auc, 1.0);
    EXPECT_LE(auc, 4.0);
  }
  ASSERT_EQ(report.seeds.size(), 1u);
  EXPECT_EQ(report.seeds[0].evaluated.size(), 5u);
  std::set<std::string> curves;
  for (const auto& c : report.curves) curves.insert(c.curve);
  EXPECT_TRUE(curves.count("error_pct"));
  EXPECT_TRUE(curves.count("hits_at_n:perturbed"));
  EXPECT_TRUE(curves.count("stability"));
  for (const auto& c : report.curves) {
    if (c.curve == "error_pct" && c.n == 0) EXPECT_DOUBLE_EQ(c.value, 1.0);
  }
}

TEST(Benchmark, DeterministicAcrossThreadCounts) {
  auto cfg = small_config();
  const auto data = small_bundle();
  const auto serial = run_benchmark(cfg, data, small_relevance());
  cfg.threads = 3;
  const auto parallel = run_benchmark(cfg, data, small_relevance());
  EXPECT_EQ(metrics_csv(serial), metrics_csv(parallel));
  EXPECT_EQ(curves_csv(serial), curves_csv(parallel));
  EXPECT_EQ(metrics_json(serial).dump(), metrics_json(parallel).dump());
}

TEST(Benchmark, RankingTextOrdersMethods) {
  MetricReport r;
  r.metrics.push_back(summarize("A", "mrr_r:x", "d", {0.2}, true));
  r.metrics.push_back(summarize("B", "mrr_r:x", "d", {0.7}, true));
  r.metrics.push_back(summarize("A", "mrr_u", "d", {0.2}, false));
  r.metrics.push_back(summarize("B", "mrr_u", "d", {0.7}, false));
  const auto text = ranking_text(r);
  EXPECT_NE(text.find("mrr_r:x (higher is better): B 0.7000 > A 0.2000"), std::string::npos) << text;
  EXPECT_NE(text.find("mrr_u (lower is better): A 0.2000 > B 0.7000"), std::string::npos) << text;
}

TEST(Benchmark, RejectsWidthMismatch) {
  auto cfg = small_config();
  cfg.layer_spec.widths = {5, 3, 5};
  EXPECT_THROW(run_benchmark(cfg, small_bundle(), small_relevance()), ConfigError);
}

TEST(Relevance, JsonRoundTrip) {
  auto spec = small_relevance();
  RelevanceSet s;
  s.name = "dep";
  s.attributes = {1};
  s.when_perturbed = 0;
  spec.relevant.push_back(s);
  const auto back = relevance_from_json(to_json(spec));
  ASSERT_EQ(back.relevant.size(), 2u);
  EXPECT_EQ(back.relevant[1].when_perturbed, std::optional<std::size_t>(0));
  EXPECT_EQ(back.uninformative, spec.uninformative);
}

}  // namespace
}  // namespace aeshap
