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
#include <functional>
#include <string>
#include <vector>

#include "aeshap/tabular.hpp"
#include "json.hpp"

namespace aeshap {

// Each player owns a set of encoded dimensions. Players are toggled
// atomically; dimensions owned by no player always keep the instance value.
struct PlayerGrouping {
  std::vector<std::vector<std::size_t>> players;
  std::vector<std::size_t> ids;  // caller-side identity of each player (e.g. attribute index)

  std::size_t size() const { return players.size(); }
  void validate(std::size_t dims) const;

  static PlayerGrouping singletons(std::size_t dims);
  // One player per attribute slice, optionally leaving one attribute out.
  static PlayerGrouping attributes(const EncodingMap& map, long excluded_attribute = -1);
};

struct BackgroundSet {
  Matrix rows;  // eta x D
  std::uint64_t seed = 0;

  // eta rows drawn without replacement from `candidates` (all rows if
  // eta >= candidates.size()).
  static BackgroundSet sample(const Matrix& data, const std::vector<std::size_t>& candidates,
                              std::size_t eta, std::uint64_t seed);
  void validate(std::size_t dims) const;
};

// A pure scalar payoff of one full encoded row.
struct PayoffSpec {
  std::function<double(const RowVector&)> evaluator;
  std::string description;
};

// Several payoffs evaluated together over a batch of composite rows; returns
// a (rows x outputs) matrix. Lets attribution runs that differ only in the
// payoff share one set of coalition evaluations.
struct MultiPayoff {
  std::function<Matrix(const Matrix&)> evaluate;
  std::size_t outputs = 1;
};

MultiPayoff as_multi(const PayoffSpec& payoff);

struct Attribution {
  std::vector<double> phi;
  std::vector<std::size_t> player_ids;
  double base_value = 0.0;
  double explained_value = 0.0;
  double efficiency_residual = 0.0;
  std::size_t n_coalitions = 0;
  std::uint64_t seed = 0;
  std::string description;
};

// Mean payoff over background composites; `on_set[j]` keeps player j at the
// instance value.
double masked_payoff(const RowVector& instance, const std::vector<bool>& on_set, const PlayerGrouping& players,
                     const PayoffSpec& payoff, const BackgroundSet& bg);

constexpr std::size_t kMaxExactPlayers = 20;

// Exact enumeration over all 2^M coalitions.
Attribution exact_shapley(const RowVector& instance, const PlayerGrouping& players, const PayoffSpec& payoff,
                          const BackgroundSet& bg);
std::vector<Attribution> exact_shapley(const RowVector& instance, const PlayerGrouping& players,
                                       const MultiPayoff& payoff, const BackgroundSet& bg);

// Kernel-weighted least squares under the efficiency constraint. With
// n_coalitions >= 2^M - 2 every proper coalition is enumerated and the
// result equals the exact values.
Attribution sampled_shapley(const RowVector& instance, const PlayerGrouping& players, const PayoffSpec& payoff,
                            const BackgroundSet& bg, std::size_t n_coalitions, std::uint64_t seed);
std::vector<Attribution> sampled_shapley(const RowVector& instance, const PlayerGrouping& players,
                                         const MultiPayoff& payoff, const BackgroundSet& bg,
                                         std::size_t n_coalitions, std::uint64_t seed);

// min(2^M - 2, 2048).
std::size_t default_coalition_budget(std::size_t n_players);

// Shapley weight |S|!(M-|S|-1)!/M! for |S| = 0 .. M-1.
std::vector<double> shapley_weights(std::size_t n_players);

// Kernel weight (M-1) / (C(M,s) s (M-s)) of one coalition of size s, 0 < s < M.
double shapley_kernel(std::size_t n_players, std::size_t size);

nlohmann::json to_json(const Attribution& a);

}  // namespace aeshap
