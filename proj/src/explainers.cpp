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

#include "aeshap/explainers.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "aeshap/error.hpp"
#include "aeshap/random.hpp"

namespace aeshap {
namespace {

std::size_t num_attributes(const ExplanationRequest& r) { return r.map->num_attributes(); }

// Per-dimension reconstruction losses of every composite row.
Matrix composite_losses(const NetworkParams& model, const Matrix& batch) {
  return bce_loss(batch, reconstruct(model, batch));
}

std::size_t budget(const ExplanationRequest& r, std::size_t players) {
  return r.n_coalitions > 0 ? r.n_coalitions : default_coalition_budget(players);
}

void split_by_sign(Explanation& e) {
  e.contributing.clear();
  e.offsetting.clear();
  for (std::size_t j = 0; j < e.signed_totals.size(); ++j) {
    const double v = e.signed_totals[j];
    if (v > 0.0) e.contributing.push_back({j, v});
    if (v < 0.0) e.offsetting.push_back({j, v});
  }
  std::stable_sort(e.contributing.begin(), e.contributing.end(),
                   [](const auto& a, const auto& b) { return a.phi > b.phi; });
  std::stable_sort(e.offsetting.begin(), e.offsetting.end(),
                   [](const auto& a, const auto& b) { return a.phi < b.phi; });
}

// Accumulates one run into per-attribute |phi| and signed sums.
void accumulate(const Attribution& run, std::vector<double>& magnitude, std::vector<double>& signed_sum,
                long skip_attribute = -1) {
  for (std::size_t p = 0; p < run.phi.size(); ++p) {
    const std::size_t attr = run.player_ids[p];
    if (static_cast<long>(attr) == skip_attribute) continue;
    magnitude[attr] += std::abs(run.phi[p]);
    signed_sum[attr] += run.phi[p];
  }
}

Explanation start(const ExplanationRequest& r) {
  Explanation e;
  e.method = r.method;
  e.anomaly_id = r.anomaly_id;
  e.seed = r.seed;
  e.scores.assign(num_attributes(r), 0.0);
  e.signed_totals.assign(num_attributes(r), 0.0);
  return e;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::kRandom: return "Random";
    case Method::kLossShap: return "LossSHAP";
    case Method::kAShap: return "A-SHAP";
    case Method::kReshape: return "RESHAPE";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  std::string key;
  for (char c : name) {
    if (c != '-' && c != '_') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "random") return Method::kRandom;
  if (key == "lossshap") return Method::kLossShap;
  if (key == "ashap") return Method::kAShap;
  if (key == "reshape") return Method::kReshape;
  throw ConfigError("unknown method '" + name + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::kRandom, Method::kLossShap, Method::kAShap, Method::kReshape};
  return methods;
}

void ExplanationRequest::validate() const {
  if (map == nullptr) throw ConfigError("explain: missing encoding map");
  if (static_cast<std::size_t>(row.size()) != map->total_dims()) throw DataError("explain: row width mismatch");
  if (method == Method::kRandom) return;
  if (model == nullptr || background == nullptr) throw ConfigError("explain: missing model or background set");
  if (model->spec.input_dim() != map->total_dims()) throw ConfigError("explain: model width does not match encoding");
  if (top_attributes > map->num_attributes()) {
    throw ConfigError("explain: l = " + std::to_string(top_attributes) + " exceeds T = " +
                      std::to_string(map->num_attributes()));
  }
  if (top_encodings == 0) throw ConfigError("explain: e must be >= 1");
}

Explanation explain_random(const ExplanationRequest& r) {
  r.validate();
  Explanation e = start(r);
  const std::size_t t = num_attributes(r);
  std::vector<std::size_t> order(t);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(r.seed);
  rng.shuffle(order);
  for (std::size_t i = 0; i < t; ++i) {
    e.scores[order[i]] = static_cast<double>(t - i);
    e.signed_totals[order[i]] = static_cast<double>(t - i);
  }
  split_by_sign(e);
  return e;
}

Explanation explain_loss_shap(const ExplanationRequest& r) {
  r.validate();
  Explanation e = start(r);
  const NetworkParams& model = *r.model;
  const auto players = PlayerGrouping::attributes(*r.map);
  MultiPayoff payoff{[&model](const Matrix& batch) {
                       Matrix out = composite_losses(model, batch).rowwise().sum();
                       return out;
                     },
                     1};
  auto runs = sampled_shapley(r.row, players, payoff, *r.background, budget(r, players.size()), r.seed);
  runs.front().description = "instance reconstruction error";
  accumulate(runs.front(), e.scores, e.signed_totals);
  // Instance-level explanation: the signed attribution itself is the score.
  e.scores = e.signed_totals;
  e.runs = std::move(runs);
  e.explained = {0};
  split_by_sign(e);
  return e;
}

Explanation explain_a_shap(const ExplanationRequest& r) {
  r.validate();
  Explanation e = start(r);
  const NetworkParams& model = *r.model;
  const EncodingMap& map = *r.map;
  const auto dims = map.total_dims();

  const ReconstructionReport report = reconstruct_report(model, r.row, map);
  std::vector<std::size_t> order(dims);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.dimension_losses[static_cast<Eigen::Index>(a)] > report.dimension_losses[static_cast<Eigen::Index>(b)];
  });
  order.resize(std::min(r.top_encodings, dims));

  const auto players = PlayerGrouping::attributes(map);
  const std::vector<std::size_t> selected = order;
  MultiPayoff payoff{[&model, selected](const Matrix& batch) {
                       const Matrix losses = composite_losses(model, batch);
                       Matrix out(batch.rows(), static_cast<Eigen::Index>(selected.size()));
                       for (std::size_t k = 0; k < selected.size(); ++k) {
                         out.col(static_cast<Eigen::Index>(k)) = losses.col(static_cast<Eigen::Index>(selected[k]));
                       }
                       return out;
                     },
                     selected.size()};
  e.runs = sampled_shapley(r.row, players, payoff, *r.background, budget(r, players.size()), r.seed);
  for (std::size_t k = 0; k < selected.size(); ++k) {
    const std::size_t owner = map.attribute_of_dim(selected[k]);
    e.runs[k].description = "loss of encoding " + std::to_string(selected[k]);
    accumulate(e.runs[k], e.scores, e.signed_totals, r.ashap_drop_self ? static_cast<long>(owner) : -1);
  }
  e.explained = selected;
  split_by_sign(e);
  return e;
}

Explanation explain_reshape(const ExplanationRequest& r) {
  r.validate();
  Explanation e = start(r);
  const NetworkParams& model = *r.model;
  const EncodingMap& map = *r.map;
  const std::size_t t = num_attributes(r);
  const std::size_t l = r.top_attributes == 0 ? t : r.top_attributes;

  // Step 1: attributes by descending attribute loss, ties by index.
  const ReconstructionReport report = reconstruct_report(model, r.row, map);
  std::vector<std::size_t> order(t);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.attribute_losses[static_cast<Eigen::Index>(a)] > report.attribute_losses[static_cast<Eigen::Index>(b)];
  });
  order.resize(l);

  // Step 2: one attribution run per selected attribute, payoff = its loss.
  const auto players = PlayerGrouping::attributes(map);
  const std::vector<std::size_t> selected = order;
  const EncodingMap map_copy = map;
  MultiPayoff payoff{[&model, selected, map_copy](const Matrix& batch) {
                       const Matrix losses = attribute_losses(composite_losses(model, batch), map_copy);
                       Matrix out(batch.rows(), static_cast<Eigen::Index>(selected.size()));
                       for (std::size_t k = 0; k < selected.size(); ++k) {
                         out.col(static_cast<Eigen::Index>(k)) = losses.col(static_cast<Eigen::Index>(selected[k]));
                       }
                       return out;
                     },
                     selected.size()};
  e.runs = sampled_shapley(r.row, players, payoff, *r.background, budget(r, players.size()), r.seed);

  // Step 3: rank by summed magnitude, classify by summed sign.
  for (std::size_t k = 0; k < selected.size(); ++k) {
    e.runs[k].description = "loss of attribute " + std::to_string(selected[k]);
    accumulate(e.runs[k], e.scores, e.signed_totals);
  }
  e.explained = selected;
  split_by_sign(e);
  return e;
}

Explanation explain(const ExplanationRequest& request) {
  switch (request.method) {
    case Method::kRandom: return explain_random(request);
    case Method::kLossShap: return explain_loss_shap(request);
    case Method::kAShap: return explain_a_shap(request);
    case Method::kReshape: return explain_reshape(request);
  }
  throw ConfigError("explain: unknown method");
}

std::vector<std::size_t> ranked_attributes(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<std::size_t> ranked_attributes(const Explanation& explanation) {
  return ranked_attributes(explanation.scores);
}

nlohmann::json to_json(const Explanation& e, const Schema& schema) {
  auto weights = [&](const std::vector<AttributeWeight>& list) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& w : list) {
      out.push_back({{"attribute", w.attribute}, {"name", schema.at(w.attribute).name}, {"phi", w.phi}});
    }
    return out;
  };
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t k = 0; k < e.runs.size(); ++k) {
    nlohmann::json run = to_json(e.runs[k]);
    run["explained"] = e.explained.at(k);
    runs.push_back(std::move(run));
  }
  return {{"method", method_name(e.method)},
          {"anomaly_id", e.anomaly_id},
          {"scores", e.scores},
          {"ranking", ranked_attributes(e)},
          {"contributing", weights(e.contributing)},
          {"offsetting", weights(e.offsetting)},
          {"runs", runs},
          {"seed", e.seed}};
}

std::string render_table(const Explanation& e, const Schema& schema) {
  std::size_t width = 12;
  for (const auto& a : schema) width = std::max(width, a.name.size());
  std::ostringstream out;
  out << "method: " << method_name(e.method) << "  anomaly: " << e.anomaly_id << "  seed: " << e.seed << "\n";
  auto section = [&](const char* title, const std::vector<AttributeWeight>& list) {
    out << "\n" << std::left << std::setw(static_cast<int>(width) + 2) << title << "phi\n";
    if (list.empty()) out << "(none)\n";
    for (const auto& w : list) {
      out << std::left << std::setw(static_cast<int>(width) + 2) << schema.at(w.attribute).name
          << std::setprecision(6) << std::fixed << w.phi << "\n";
    }
  };
  section("contributing", e.contributing);
  section("offsetting", e.offsetting);
  return out.str();
}

}  // namespace aeshap
