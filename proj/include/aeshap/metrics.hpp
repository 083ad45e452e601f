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

#include <cstddef>
#include <vector>

#include "aeshap/aenn.hpp"
#include "aeshap/tabular.hpp"

namespace aeshap {

using Ranking = std::vector<std::size_t>;

// 1-based position of the first member of `targets` in `ranking`.
std::size_t first_rank(const Ranking& ranking, const std::vector<std::size_t>& targets);

// Mean reciprocal rank of the first target; one target set per ranking or a
// shared one.
double mrr(const std::vector<Ranking>& rankings, const std::vector<std::vector<std::size_t>>& targets);
double mrr(const std::vector<Ranking>& rankings, const std::vector<std::size_t>& targets);

double hits_at_n(const std::vector<Ranking>& rankings, const std::vector<std::vector<std::size_t>>& targets,
                 std::size_t n);
double hits_at_n(const std::vector<Ranking>& rankings, const std::vector<std::size_t>& targets, std::size_t n);

// Discrete area under the Hits@n curve: sum of Hits@n for n = 1..T.
double hits_auc(const std::vector<Ranking>& rankings, const std::vector<std::vector<std::size_t>>& targets);
double hits_auc(const std::vector<Ranking>& rankings, const std::vector<std::size_t>& targets);

// Root-mean of the population variance of rank, across K runs, of the
// attributes holding ranks 1..n in the first run.
double stability_index(const std::vector<Ranking>& runs, std::size_t n);

// Replacement values used to turn an anomalous record into a regular one.
// candidates[j] lists encoded slices for attribute j, best first (mode for
// categorical attributes, median for numerical ones).
struct ReplacementTable {
  EncodingMap map;
  std::vector<std::vector<RowVector>> candidates;

  // From the none-labeled rows of `table`; keeps up to `top_values` frequent
  // values per attribute for the greedy variant.
  static ReplacementTable from_table(const RecordTable& table, const EncodingMap& map, std::size_t top_values = 1);
  // Every attribute is replaced by the instance's own value (a no-op).
  static ReplacementTable from_instance(const RowVector& row, const EncodingMap& map);
};

// error%_n for n = 0..n_max: reconstruction error after replacing the top-n
// ranked attributes, relative to the original. error%_0 = 1. With `greedy`,
// each replacement picks the candidate that minimises the error.
std::vector<double> error_reduction_curve(const NetworkParams& model, const RowVector& row, const Ranking& ranking,
                                          const ReplacementTable& replacements, std::size_t n_max,
                                          bool greedy = false);

}  // namespace aeshap
