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

#include "aeshap/shap.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <map>

#include "aeshap/error.hpp"
#include "aeshap/random.hpp"

namespace aeshap {
namespace {

using Mask = std::vector<char>;

constexpr double kDamping = 1e-10;
constexpr Eigen::Index kChunkRows = 16384;

double log_choose(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

void check_inputs(const RowVector& instance, const PlayerGrouping& players, const BackgroundSet& bg) {
  const auto dims = static_cast<std::size_t>(instance.size());
  players.validate(dims);
  bg.validate(dims);
}

// Payoff means over the background for each coalition mask (C x outputs).
Matrix evaluate_coalitions(const RowVector& instance, const PlayerGrouping& players, const MultiPayoff& payoff,
                           const BackgroundSet& bg, const std::vector<Mask>& masks) {
  const Eigen::Index eta = bg.rows.rows();
  const Eigen::Index dims = instance.size();

  Matrix base = bg.rows;
  std::vector<bool> owned(static_cast<std::size_t>(dims), false);
  for (const auto& p : players.players) {
    for (auto d : p) owned[d] = true;
  }
  for (Eigen::Index d = 0; d < dims; ++d) {
    if (!owned[static_cast<std::size_t>(d)]) base.col(d).setConstant(instance[d]);
  }

  Matrix values(static_cast<Eigen::Index>(masks.size()), static_cast<Eigen::Index>(payoff.outputs));
  const std::size_t per_chunk = static_cast<std::size_t>(std::max<Eigen::Index>(1, kChunkRows / eta));
  Matrix batch;
  for (std::size_t first = 0; first < masks.size(); first += per_chunk) {
    const std::size_t last = std::min(masks.size(), first + per_chunk);
    batch.resize(static_cast<Eigen::Index>(last - first) * eta, dims);
    for (std::size_t c = first; c < last; ++c) {
      auto block = batch.middleRows(static_cast<Eigen::Index>(c - first) * eta, eta);
      block = base;
      for (std::size_t j = 0; j < players.size(); ++j) {
        if (!masks[c][j]) continue;
        for (auto d : players.players[j]) {
          block.col(static_cast<Eigen::Index>(d)).setConstant(instance[static_cast<Eigen::Index>(d)]);
        }
      }
    }
    const Matrix out = payoff.evaluate(batch);
    if (out.rows() != batch.rows() || static_cast<std::size_t>(out.cols()) != payoff.outputs) {
      throw DataError("shap: payoff returned a matrix of the wrong shape");
    }
    for (std::size_t c = first; c < last; ++c) {
      const Eigen::Index offset = static_cast<Eigen::Index>(c - first) * eta;
      const bool full = std::all_of(masks[c].begin(), masks[c].end(), [](char on) { return on != 0; });
      // Every composite of the full coalition is the instance itself.
      values.row(static_cast<Eigen::Index>(c)) =
          full ? RowVector(out.row(offset)) : RowVector(out.middleRows(offset, eta).colwise().mean());
    }
  }
  if (!values.allFinite()) throw NumericalError("shap: payoff produced a non-finite value");
  return values;
}

std::vector<Attribution> finish(const PlayerGrouping& players, const Matrix& phi, const RowVector& base,
                                const RowVector& full, std::size_t n_coalitions, std::uint64_t seed) {
  std::vector<Attribution> out(static_cast<std::size_t>(phi.cols()));
  for (Eigen::Index p = 0; p < phi.cols(); ++p) {
    Attribution& a = out[static_cast<std::size_t>(p)];
    a.phi.resize(static_cast<std::size_t>(phi.rows()));
    for (Eigen::Index j = 0; j < phi.rows(); ++j) a.phi[static_cast<std::size_t>(j)] = phi(j, p);
    a.player_ids = players.ids;
    a.base_value = base[p];
    a.explained_value = full[p];
    double total = 0.0;
    for (double v : a.phi) total += v;
    a.efficiency_residual = a.explained_value - a.base_value - total;
    a.n_coalitions = n_coalitions;
    a.seed = seed;
  }
  return out;
}

}  // namespace

void PlayerGrouping::validate(std::size_t dims) const {
  if (players.empty()) throw DataError("shap: no players");
  if (!ids.empty() && ids.size() != players.size()) throw DataError("shap: player ids do not match players");
  std::vector<bool> seen(dims, false);
  for (const auto& p : players) {
    if (p.empty()) throw DataError("shap: empty player");
    for (auto d : p) {
      if (d >= dims) throw DataError("shap: player dimension out of range");
      if (seen[d]) throw DataError("shap: players overlap");
      seen[d] = true;
    }
  }
}

PlayerGrouping PlayerGrouping::singletons(std::size_t dims) {
  PlayerGrouping g;
  for (std::size_t d = 0; d < dims; ++d) {
    g.players.push_back({d});
    g.ids.push_back(d);
  }
  return g;
}

PlayerGrouping PlayerGrouping::attributes(const EncodingMap& map, long excluded_attribute) {
  PlayerGrouping g;
  for (std::size_t j = 0; j < map.num_attributes(); ++j) {
    if (static_cast<long>(j) == excluded_attribute) continue;
    const Slice& s = map.slice(j);
    std::vector<std::size_t> dims(s.length);
    for (std::size_t k = 0; k < s.length; ++k) dims[k] = s.start + k;
    g.players.push_back(std::move(dims));
    g.ids.push_back(j);
  }
  return g;
}

BackgroundSet BackgroundSet::sample(const Matrix& data, const std::vector<std::size_t>& candidates,
                                    std::size_t eta, std::uint64_t seed) {
  if (eta == 0 || candidates.empty()) throw DataError("background: empty background set");
  BackgroundSet bg;
  bg.seed = seed;
  std::vector<std::size_t> picks;
  if (eta >= candidates.size()) {
    picks = candidates;
  } else {
    Rng rng(seed);
    for (auto p : rng.sample_without_replacement(candidates.size(), eta)) picks.push_back(candidates[p]);
    std::sort(picks.begin(), picks.end());
  }
  bg.rows.resize(static_cast<Eigen::Index>(picks.size()), data.cols());
  for (std::size_t i = 0; i < picks.size(); ++i) {
    bg.rows.row(static_cast<Eigen::Index>(i)) = data.row(static_cast<Eigen::Index>(picks[i]));
  }
  return bg;
}

void BackgroundSet::validate(std::size_t dims) const {
  if (rows.rows() == 0) throw DataError("shap: empty background set");
  if (static_cast<std::size_t>(rows.cols()) != dims) throw DataError("shap: background width mismatch");
}

MultiPayoff as_multi(const PayoffSpec& payoff) {
  return {[payoff](const Matrix& batch) {
            Matrix out(batch.rows(), 1);
            for (Eigen::Index r = 0; r < batch.rows(); ++r) out(r, 0) = payoff.evaluator(batch.row(r));
            return out;
          },
          1};
}

double masked_payoff(const RowVector& instance, const std::vector<bool>& on_set, const PlayerGrouping& players,
                     const PayoffSpec& payoff, const BackgroundSet& bg) {
  check_inputs(instance, players, bg);
  if (on_set.size() != players.size()) throw DataError("shap: coalition size does not match player count");
  Mask mask(on_set.begin(), on_set.end());
  return evaluate_coalitions(instance, players, as_multi(payoff), bg, {mask})(0, 0);
}

std::vector<double> shapley_weights(std::size_t n_players) {
  std::vector<double> w(n_players);
  for (std::size_t s = 0; s < n_players; ++s) {
    w[s] = std::exp(std::lgamma(static_cast<double>(s) + 1.0) +
                    std::lgamma(static_cast<double>(n_players - s - 1) + 1.0) -
                    std::lgamma(static_cast<double>(n_players) + 1.0));
  }
  return w;
}

double shapley_kernel(std::size_t n_players, std::size_t size) {
  const double m = static_cast<double>(n_players);
  const double s = static_cast<double>(size);
  return (m - 1.0) / (std::exp(log_choose(n_players, size)) * s * (m - s));
}

std::size_t default_coalition_budget(std::size_t n_players) {
  if (n_players >= 12) return 2048;
  return std::min<std::size_t>((std::size_t{1} << n_players) - 2, 2048);
}

std::vector<Attribution> exact_shapley(const RowVector& instance, const PlayerGrouping& players,
                                       const MultiPayoff& payoff, const BackgroundSet& bg) {
  check_inputs(instance, players, bg);
  const std::size_t m = players.size();
  if (m > kMaxExactPlayers) {
    throw ConfigError("exact_shapley: " + std::to_string(m) + " players exceed the enumeration guard of " +
                      std::to_string(kMaxExactPlayers));
  }
  const std::size_t n_masks = std::size_t{1} << m;
  std::vector<Mask> masks(n_masks, Mask(m, 0));
  for (std::size_t s = 0; s < n_masks; ++s) {
    for (std::size_t j = 0; j < m; ++j) masks[s][j] = static_cast<char>((s >> j) & 1u);
  }
  const Matrix v = evaluate_coalitions(instance, players, payoff, bg, masks);
  const auto weights = shapley_weights(m);

  Matrix phi = Matrix::Zero(static_cast<Eigen::Index>(m), v.cols());
  for (std::size_t s = 0; s < n_masks; ++s) {
    const auto size = static_cast<std::size_t>(__builtin_popcountll(s));
    if (size == m) continue;
    for (std::size_t j = 0; j < m; ++j) {
      if ((s >> j) & 1u) continue;
      phi.row(static_cast<Eigen::Index>(j)) +=
          weights[size] * (v.row(static_cast<Eigen::Index>(s | (std::size_t{1} << j))) -
                           v.row(static_cast<Eigen::Index>(s)));
    }
  }
  return finish(players, phi, v.row(0), v.row(static_cast<Eigen::Index>(n_masks - 1)), n_masks, 0);
}

Attribution exact_shapley(const RowVector& instance, const PlayerGrouping& players, const PayoffSpec& payoff,
                          const BackgroundSet& bg) {
  auto out = exact_shapley(instance, players, as_multi(payoff), bg);
  out.front().description = payoff.description;
  return out.front();
}

std::vector<Attribution> sampled_shapley(const RowVector& instance, const PlayerGrouping& players,
                                         const MultiPayoff& payoff, const BackgroundSet& bg,
                                         std::size_t n_coalitions, std::uint64_t seed) {
  check_inputs(instance, players, bg);
  const std::size_t m = players.size();
  if (m < 2) throw ConfigError("sampled_shapley: need at least two players");
  if (n_coalitions < 2 * m) {
    throw ConfigError("sampled_shapley: n_coalitions must be >= 2 * players (" + std::to_string(2 * m) + ")");
  }

  // Coalitions (excluding empty and full) with their regression weights.
  std::vector<Mask> masks;
  std::vector<double> weights;
  const bool enumerate = m < 63 && n_coalitions >= (std::size_t{1} << m) - 2;
  if (enumerate) {
    const std::size_t n_masks = std::size_t{1} << m;
    for (std::size_t s = 1; s + 1 < n_masks; ++s) {
      Mask mask(m, 0);
      for (std::size_t j = 0; j < m; ++j) mask[j] = static_cast<char>((s >> j) & 1u);
      masks.push_back(std::move(mask));
      weights.push_back(shapley_kernel(m, static_cast<std::size_t>(__builtin_popcountll(s))));
    }
  } else {
    // Sizes follow the kernel mass per size, members are uniform within a
    // size, so each draw already carries kernel probability: duplicates just
    // accumulate counts.
    std::vector<double> size_mass(m, 0.0);
    double total = 0.0;
    for (std::size_t s = 1; s < m; ++s) {
      size_mass[s] = 1.0 / static_cast<double>(s * (m - s));
      total += size_mass[s];
    }
    Rng rng(seed);
    std::map<Mask, double> counts;
    for (std::size_t draw = 0; draw < n_coalitions; ++draw) {
      double u = rng.uniform() * total;
      std::size_t size = m - 1;
      for (std::size_t s = 1; s < m; ++s) {
        u -= size_mass[s];
        if (u < 0.0) {
          size = s;
          break;
        }
      }
      Mask mask(m, 0);
      for (auto j : rng.sample_without_replacement(m, size)) mask[j] = 1;
      counts[mask] += 1.0;
    }
    for (auto& [mask, count] : counts) {
      masks.push_back(mask);
      weights.push_back(count);
    }
  }

  const std::size_t n_proper = masks.size();
  masks.push_back(Mask(m, 0));
  masks.push_back(Mask(m, 1));
  const Matrix v = evaluate_coalitions(instance, players, payoff, bg, masks);
  const RowVector v_empty = v.row(static_cast<Eigen::Index>(n_proper));
  const RowVector v_full = v.row(static_cast<Eigen::Index>(n_proper + 1));
  const RowVector delta = v_full - v_empty;

  // Eliminate the last player through the efficiency constraint:
  //   y - z_last * delta = sum_{j<last} (z_j - z_last) phi_j
  const auto rows = static_cast<Eigen::Index>(n_proper);
  const auto free = static_cast<Eigen::Index>(m - 1);
  Matrix design(rows, free);
  Matrix target(rows, v.cols());
  double weight_sum = 0.0;
  for (double w : weights) weight_sum += w;
  Vector w(rows);
  for (Eigen::Index c = 0; c < rows; ++c) {
    const auto& mask = masks[static_cast<std::size_t>(c)];
    const double last = mask[m - 1];
    for (Eigen::Index j = 0; j < free; ++j) design(c, j) = mask[static_cast<std::size_t>(j)] - last;
    target.row(c) = v.row(c) - v_empty - last * delta;
    w[c] = weights[static_cast<std::size_t>(c)] / weight_sum;
  }
  for (Eigen::Index j = 0; j < free; ++j) {
    if ((design.col(j).array() == design(0, j)).all()) {
      throw NumericalError("sampled_shapley: singular regression system (player " + std::to_string(j) +
                           " never varies); increase n_coalitions above " + std::to_string(n_coalitions));
    }
  }

  Matrix normal = design.transpose() * w.asDiagonal() * design;
  normal.diagonal().array() += kDamping;
  const Matrix rhs = design.transpose() * w.asDiagonal() * target;
  Eigen::LDLT<Matrix> solver(normal);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("sampled_shapley: regression solve failed; increase n_coalitions");
  }
  const Matrix beta = solver.solve(rhs);

  Matrix phi(static_cast<Eigen::Index>(m), v.cols());
  phi.topRows(free) = beta;
  phi.row(free) = delta - beta.colwise().sum();
  return finish(players, phi, v_empty, v_full, n_proper, seed);
}

Attribution sampled_shapley(const RowVector& instance, const PlayerGrouping& players, const PayoffSpec& payoff,
                            const BackgroundSet& bg, std::size_t n_coalitions, std::uint64_t seed) {
  auto out = sampled_shapley(instance, players, as_multi(payoff), bg, n_coalitions, seed);
  out.front().description = payoff.description;
  return out.front();
}

nlohmann::json to_json(const Attribution& a) {
  return {{"players", a.player_ids},       {"phi", a.phi},
          {"base_value", a.base_value},    {"explained_value", a.explained_value},
          {"residual", a.efficiency_residual}, {"n_coalitions", a.n_coalitions},
          {"seed", a.seed},                {"payoff", a.description}};
}

}  // namespace aeshap
