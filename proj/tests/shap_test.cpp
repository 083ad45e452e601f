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

#include <algorithm>
#include <cmath>
#include <set>

#include "aeshap/error.hpp"
#include "aeshap/shap.hpp"
#include "oracles.hpp"
#include "testing.hpp"

namespace aeshap {
namespace {

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

TEST(ShapleyWeights, SumToOneOverAllCoalitions) {
  for (std::size_t m = 1; m <= 16; ++m) {
    const auto w = shapley_weights(m);
    ASSERT_EQ(w.size(), m);
    double total = 0.0;
    double binom = 1.0;  // C(m-1, s)
    for (std::size_t s = 0; s < m; ++s) {
      total += binom * w[s];
      binom = binom * static_cast<double>(m - 1 - s) / static_cast<double>(s + 1);
    }
    EXPECT_NEAR(total, 1.0, 1e-12) << "m=" << m;
  }
}

TEST(ShapleyKernel, MatchesClosedForm) {
  EXPECT_NEAR(shapley_kernel(4, 1), 3.0 / (4.0 * 1 * 3), 1e-15);
  EXPECT_NEAR(shapley_kernel(4, 2), 3.0 / (6.0 * 2 * 2), 1e-15);
  EXPECT_NEAR(shapley_kernel(10, 5), 9.0 / (252.0 * 25), 1e-15);
  EXPECT_EQ(default_coalition_budget(3), 6u);
  EXPECT_EQ(default_coalition_budget(11), 2046u);
  EXPECT_EQ(default_coalition_budget(15), 2048u);
}

TEST(ExactShapley, MatchesPermutationOracle) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t m = 1 + seed % 7;
    const auto v = oracle::random_game(m, seed);
    const auto g = oracle::masked_game(v, m);
    const auto a = exact_shapley(g.instance, g.players, g.payoff, g.background);
    const auto ref = oracle::permutation_shapley(v, m);
    ASSERT_EQ(a.phi.size(), m);
    for (std::size_t j = 0; j < m; ++j) EXPECT_NEAR(a.phi[j], ref[j], 1e-10) << "seed " << seed;
    EXPECT_NEAR(a.base_value, v.front(), 1e-12);
    EXPECT_NEAR(a.explained_value, v.back(), 1e-12);
  }
}

TEST(SampledShapley, FullEnumerationMatchesExact) {
  // 100 seeded games of up to ten players.
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t m = 2 + seed % 9;
    const auto v = oracle::random_game(m, 1000 + seed);
    const auto g = oracle::masked_game(v, m);
    const auto ref = oracle::subset_shapley(v, m);
    const auto exact = exact_shapley(g.instance, g.players, g.payoff, g.background);
    const auto sampled = sampled_shapley(g.instance, g.players, g.payoff, g.background,
                                         std::max((std::size_t{1} << m) - 2, 2 * m), seed);
    for (std::size_t j = 0; j < m; ++j) {
      EXPECT_NEAR(exact.phi[j], ref[j], 1e-9) << "seed " << seed;
      EXPECT_NEAR(sampled.phi[j], ref[j], 1e-8) << "seed " << seed;
    }
  }
}

TEST(SampledShapley, EfficiencyHoldsUnderSubsampling) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t m = 12;
    const auto v = oracle::random_game(m, 50 + seed);
    const auto g = oracle::masked_game(v, m);
    const auto a = sampled_shapley(g.instance, g.players, g.payoff, g.background, 300, seed);
    EXPECT_NEAR(sum(a.phi), v.back() - v.front(), 1e-9);
    EXPECT_LE(std::abs(a.efficiency_residual), 1e-9);
    const auto b = sampled_shapley(g.instance, g.players, g.payoff, g.background, 300, seed);
    EXPECT_EQ(a.phi, b.phi);
  }
}

TEST(ExactShapley, AxiomsOnRandomGames) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t m = 3 + seed % 6;
    auto v = oracle::random_game(m, 7 * seed + 3);
    // Make the last player null.
    const std::size_t null = m - 1;
    for (std::size_t s = 0; s < v.size(); ++s) {
      if (s >> null & 1) v[s] = v[s & ~(std::size_t{1} << null)];
    }
    // Make players 0 and 1 symmetric: v depends on them only through their count.
    for (std::size_t s = 0; s < v.size(); ++s) {
      if ((s & 3) == 2) v[s] = v[(s & ~std::size_t{3}) | 1];
    }
    const auto g = oracle::masked_game(v, m);
    const auto a = exact_shapley(g.instance, g.players, g.payoff, g.background);
    EXPECT_NEAR(sum(a.phi), v.back() - v.front(), 1e-10);
    EXPECT_NEAR(a.phi[null], 0.0, 1e-10);
    EXPECT_NEAR(a.phi[0], a.phi[1], 1e-10);
  }
}

TEST(ExactShapley, LinearPayoffWithBackgroundAverage) {
  // For f(x) = w.x the attribution of dim j is w_j (x_j - mean background_j).
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t d = 6;
    Rng rng(seed);
    RowVector w(d);
    for (auto& x : w) x = rng.normal();
    BackgroundSet bg;
    bg.rows = testing::random_unit_matrix(9, d, seed + 1);
    const RowVector x = testing::random_unit_matrix(1, d, seed + 2).row(0);
    PayoffSpec f{[w](const RowVector& r) { return r.dot(w); }, "linear"};
    const auto a = exact_shapley(x, PlayerGrouping::singletons(d), f, bg);
    const RowVector mean = bg.rows.colwise().mean();
    for (std::size_t j = 0; j < d; ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      EXPECT_NEAR(a.phi[j], w[i] * (x[i] - mean[i]), 1e-12);
    }
  }
}

TEST(MaskedPayoff, GroupedPlayersMoveTogether) {
  PlayerGrouping g;
  g.players = {{0, 1}, {3}};
  g.ids = {0, 1};
  BackgroundSet bg;
  bg.rows = Matrix::Zero(1, 4);
  RowVector x(4);
  x << 1, 2, 3, 4;
  PayoffSpec f{[](const RowVector& r) { return r[0] + 10 * r[1] + 100 * r[2] + 1000 * r[3]; }, "digits"};
  // Dim 2 is unowned and keeps the instance value.
  EXPECT_DOUBLE_EQ(masked_payoff(x, {false, false}, g, f, bg), 300.0);
  EXPECT_DOUBLE_EQ(masked_payoff(x, {true, false}, g, f, bg), 321.0);
  EXPECT_DOUBLE_EQ(masked_payoff(x, {false, true}, g, f, bg), 4300.0);
}

TEST(MultiPayoff, SharedEvaluationsMatchSeparateRuns) {
  const std::size_t d = 5;
  BackgroundSet bg;
  bg.rows = testing::random_unit_matrix(4, d, 8);
  const RowVector x = testing::random_unit_matrix(1, d, 9).row(0);
  PayoffSpec f0{[](const RowVector& r) { return r.prod(); }, "prod"};
  PayoffSpec f1{[](const RowVector& r) { return std::sin(r.sum()); }, "sin"};
  MultiPayoff multi;
  multi.outputs = 2;
  multi.evaluate = [&](const Matrix& rows) {
    Matrix out(rows.rows(), 2);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      out(i, 0) = f0.evaluator(rows.row(i));
      out(i, 1) = f1.evaluator(rows.row(i));
    }
    return out;
  };
  const auto players = PlayerGrouping::singletons(d);
  const auto both = exact_shapley(x, players, multi, bg);
  const auto a0 = exact_shapley(x, players, f0, bg);
  const auto a1 = exact_shapley(x, players, f1, bg);
  for (std::size_t j = 0; j < d; ++j) {
    EXPECT_NEAR(both[0].phi[j], a0.phi[j], 1e-12);
    EXPECT_NEAR(both[1].phi[j], a1.phi[j], 1e-12);
  }
  const auto s = sampled_shapley(x, players, multi, bg, 10, 4);
  const auto s1 = sampled_shapley(x, players, f1, bg, 10, 4);
  for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(s[1].phi[j], s1.phi[j], 1e-12);
}

TEST(Grouping, AttributesFollowSlices) {
  const auto enc = encode(testing::small_table(20, 1), true);
  const auto all = PlayerGrouping::attributes(enc.map);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all.ids, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(all.players[0].size(), enc.map.slice(0).length);
  const auto without = PlayerGrouping::attributes(enc.map, 1);
  EXPECT_EQ(without.ids, (std::vector<std::size_t>{0, 2}));
  EXPECT_NO_THROW(without.validate(enc.map.total_dims()));
  PlayerGrouping overlap;
  overlap.players = {{0, 1}, {1}};
  overlap.ids = {0, 1};
  EXPECT_THROW(overlap.validate(3), std::exception);
}

TEST(Background, SampleWithoutReplacement) {
  const Matrix data = testing::random_unit_matrix(30, 3, 1);
  std::vector<std::size_t> cand{2, 4, 6, 8, 10, 12};
  const auto bg = BackgroundSet::sample(data, cand, 4, 77);
  ASSERT_EQ(bg.rows.rows(), 4);
  std::set<std::size_t> used;
  for (Eigen::Index i = 0; i < 4; ++i) {
    bool found = false;
    for (auto c : cand) {
      if (bg.rows.row(i) == data.row(static_cast<Eigen::Index>(c))) {
        used.insert(c);
        found = true;
      }
    }
    EXPECT_TRUE(found);
  }
  EXPECT_EQ(used.size(), 4u);
  EXPECT_EQ(BackgroundSet::sample(data, cand, 50, 1).rows.rows(), 6);
  EXPECT_EQ(BackgroundSet::sample(data, cand, 4, 77).rows, bg.rows);
}

TEST(ExactShapley, RejectsTooManyPlayers) {
  BackgroundSet bg;
  bg.rows = Matrix::Zero(1, kMaxExactPlayers + 1);
  PayoffSpec f{[](const RowVector&) { return 0.0; }, "zero"};
  EXPECT_THROW(exact_shapley(RowVector::Zero(kMaxExactPlayers + 1),
                             PlayerGrouping::singletons(kMaxExactPlayers + 1), f, bg),
               std::exception);
}

}  // namespace
}  // namespace aeshap
