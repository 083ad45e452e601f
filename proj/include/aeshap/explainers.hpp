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

#include "aeshap/aenn.hpp"
#include "aeshap/shap.hpp"
#include "aeshap/tabular.hpp"
#include "json.hpp"

namespace aeshap {

enum class Method { kRandom, kLossShap, kAShap, kReshape };

std::string method_name(Method m);
Method parse_method(const std::string& name);
const std::vector<Method>& all_methods();

struct ExplanationRequest {
  Method method = Method::kReshape;
  RowVector row;
  const NetworkParams* model = nullptr;
  const EncodingMap* map = nullptr;
  const BackgroundSet* background = nullptr;
  std::uint64_t seed = 0;
  std::size_t top_attributes = 0;  // RESHAPE l; 0 means every attribute
  std::size_t top_encodings = 10;  // A-SHAP e, clamped to D
  std::size_t n_coalitions = 0;    // 0 means default_coalition_budget
  // A-SHAP: leave the attribute owning an explained encoding out of that
  // run's contribution to the attribute scores.
  bool ashap_drop_self = true;
  std::string anomaly_id;

  void validate() const;
};

struct AttributeWeight {
  std::size_t attribute = 0;
  double phi = 0.0;
};

struct Explanation {
  Method method = Method::kRandom;
  std::string anomaly_id;
  std::uint64_t seed = 0;
  std::vector<double> scores;         // length T, higher = more explanatory
  std::vector<double> signed_totals;  // length T, summed signed attribution
  std::vector<AttributeWeight> contributing;  // descending phi
  std::vector<AttributeWeight> offsetting;    // ascending phi
  std::vector<Attribution> runs;
  std::vector<std::size_t> explained;  // per run: attribute (RESHAPE) or encoding (A-SHAP)
};

Explanation explain(const ExplanationRequest& request);
Explanation explain_random(const ExplanationRequest& request);
Explanation explain_loss_shap(const ExplanationRequest& request);
Explanation explain_a_shap(const ExplanationRequest& request);
Explanation explain_reshape(const ExplanationRequest& request);

// Attributes by descending score; ties by attribute index.
std::vector<std::size_t> ranked_attributes(const Explanation& explanation);
std::vector<std::size_t> ranked_attributes(const std::vector<double>& scores);

nlohmann::json to_json(const Explanation& explanation, const Schema& schema);
// Contributing then offsetting attributes with their attribution values.
std::string render_table(const Explanation& explanation, const Schema& schema);

}  // namespace aeshap
