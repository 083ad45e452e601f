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

#include "aeshap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "aeshap/error.hpp"

namespace aeshap {
namespace {

void check_targets(const std::vector<Ranking>& rankings, const std::vector<std::vector<std::size_t>>& targets) {
  if (rankings.empty()) throw DataError("metrics: no rankings");
  if (targets.size() != rankings.size()) throw DataError("metrics: one target set per ranking expected");
}

std::vector<std::vector<std::size_t>> broadcast(const std::vector<Ranking>& rankings,
                                                const std::vector<std::size_t>& targets) {
  return std::vector<std::vector<std::size_t>>(rankings.size(), targets);
}

double loss_of(const NetworkParams& model, const RowVector& row) {
  const Matrix batch = row;
  return instance_scores(model, batch)[0];
}

}  // namespace

std::size_t first_rank(const Ranking& ranking, const std::vector<std::size_t>& targets) {
  if (targets.empty()) throw DataError("metrics: empty target set");
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (std::find(targets.begin(), targets.end(), ranking[i]) != targets.end()) return i + 1;
  }
  throw DataError("metrics: no target attribute occurs in the ranking");
}

double mrr(const std::vector<Ranking>& rankings, const std::vector<std::vector<std::size_t>>& targets) {
  check_targets(rankings, targets);
  double total = 0.0;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    total += 1.0 / static_cast<double>(first_rank(rankings[i], targets[i]));
  }
  return total / static_cast<double>(rankings.size());
}

double mrr(const std::vector<Ranking>& rankings, const std::vector<std::size_t>& targets) {
  return mrr(rankings, broadcast(rankings, targets));
}

double hits_at_n(const std::vector<Ranking>& rankings, const std::vector<std::vector<std::size_t>>& targets,
                 std::size_t n) {
  check_targets(rankings, targets);
  if (n < 1) throw DataError("hits@n: n must be >= 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    if (n > rankings[i].size()) throw DataError("hits@n: n exceeds the number of attributes");
    if (first_rank(rankings[i], targets[i]) <= n) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

double hits_at_n(const std::vector<Ranking>& rankings, const std::vector<std::size_t>& targets, std::size_t n) {
  return hits_at_n(rankings, broadcast(rankings, targets), n);
}

double hits_auc(const std::vector<Ranking>& rankings, const std::vector<std::vector<std::size_t>>& targets) {
  check_targets(rankings, targets);
  const std::size_t t = rankings.front().size();
  double area = 0.0;
  for (std::size_t n = 1; n <= t; ++n) area += hits_at_n(rankings, targets, n);
  return area;
}

double hits_auc(const std::vector<Ranking>& rankings, const std::vector<std::size_t>& targets) {
  return hits_auc(rankings, broadcast(rankings, targets));
}

double stability_index(const std::vector<Ranking>& runs, std::size_t n) {
  if (runs.size() < 2) throw DataError("stability: need at least two runs");
  const std::size_t t = runs.front().size();
  if (n < 1 || n > t) throw DataError("stability: n must lie in [1, T]");
  const double k = static_cast<double>(runs.size());
  double sum_var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t attr = runs.front()[i];
    double mean = 0.0;
    std::vector<double> ranks;
    for (const auto& run : runs) {
      if (run.size() != t) throw DataError("stability: runs rank different attribute counts");
      const double r = static_cast<double>(first_rank(run, {attr}));
      ranks.push_back(r);
      mean += r;
    }
    mean /= k;
    double var = 0.0;
    for (double r : ranks) var += (r - mean) * (r - mean);
    sum_var += var / k;
  }
  return std::sqrt(sum_var / static_cast<double>(n));
}

ReplacementTable ReplacementTable::from_table(const RecordTable& table, const EncodingMap& map,
                                              std::size_t top_values) {
  const auto normal = table.normal_rows();
  if (normal.empty()) throw DataError("replacement: no regular rows to derive statistics from");
  if (top_values < 1) top_values = 1;
  ReplacementTable out;
  out.map = map;
  out.candidates.resize(table.num_attributes());
  for (std::size_t j = 0; j < table.num_attributes(); ++j) {
    const AttributeSchema& a = table.schema[j];
    const Slice& s = map.slice(j);
    auto encode_value = [&](const Cell& cell) {
      RowVector slice = RowVector::Zero(static_cast<Eigen::Index>(s.length));
      if (a.is_categorical()) {
        const long idx = a.index_of(std::get<std::string>(cell));
        if (idx < 0) throw DataError("replacement: unseen value among regular rows");
        slice[idx] = 1.0;
      } else {
        slice[0] = std::clamp((std::get<double>(cell) - a.min) / (a.max - a.min), 0.0, 1.0);
      }
      return slice;
    };
    std::vector<Cell> ordered;
    if (a.is_categorical()) {
      std::map<std::string, std::size_t> freq;
      for (auto r : normal) ++freq[std::get<std::string>(table.rows[r][j])];
      std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
      std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
      for (std::size_t i = 0; i < ranked.size() && i < top_values; ++i) ordered.emplace_back(ranked[i].first);
    } else {
      std::vector<double> values;
      for (auto r : normal) values.push_back(std::get<double>(table.rows[r][j]));
      ordered.emplace_back(quantile(values, 0.5));
      // Extra greedy candidates: the most frequent exact values.
      std::map<double, std::size_t> freq;
      for (double v : values) ++freq[v];
      std::vector<std::pair<double, std::size_t>> ranked(freq.begin(), freq.end());
      std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
      for (std::size_t i = 0; i < ranked.size() && ordered.size() < top_values; ++i) ordered.emplace_back(ranked[i].first);
    }
    if (ordered.empty()) throw DataError("replacement: empty column statistics for '" + a.name + "'");
    for (const auto& c : ordered) out.candidates[j].push_back(encode_value(c));
  }
  return out;
}

ReplacementTable ReplacementTable::from_instance(const RowVector& row, const EncodingMap& map) {
  ReplacementTable out;
  out.map = map;
  out.candidates.resize(map.num_attributes());
  for (std::size_t j = 0; j < map.num_attributes(); ++j) {
    const Slice& s = map.slice(j);
    out.candidates[j].push_back(row.segment(static_cast<Eigen::Index>(s.start), static_cast<Eigen::Index>(s.length)));
  }
  return out;
}

std::vector<double> error_reduction_curve(const NetworkParams& model, const RowVector& row, const Ranking& ranking,
                                          const ReplacementTable& replacements, std::size_t n_max, bool greedy) {
  const EncodingMap& map = replacements.map;
  if (static_cast<std::size_t>(row.size()) != map.total_dims()) throw DataError("error%: row width mismatch");
  if (n_max > ranking.size()) throw DataError("error%: n_max exceeds the ranking length");
  const double original = loss_of(model, row);
  std::vector<double> curve{1.0};
  RowVector current = row;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const std::size_t attr = ranking[n - 1];
    const auto& options = replacements.candidates.at(attr);
    if (options.empty()) throw DataError("error%: no replacement value for attribute " + std::to_string(attr));
    const Slice& s = map.slice(attr);
    const auto start = static_cast<Eigen::Index>(s.start);
    const auto length = static_cast<Eigen::Index>(s.length);
    if (!greedy) {
      current.segment(start, length) = options.front();
    } else {
      RowVector best_row = current;
      double best = INFINITY;
      for (const auto& option : options) {
        RowVector trial = current;
        trial.segment(start, length) = option;
        const double l = loss_of(model, trial);
        if (l < best) {
          best = l;
          best_row = trial;
        }
      }
      current = best_row;
    }
    curve.push_back(original > 0.0 ? loss_of(model, current) / original : 1.0);
  }
  return curve;
}

}  // namespace aeshap
