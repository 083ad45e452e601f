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
#include <filesystem>
#include <string>
#include <vector>

#include "aeshap/aenn.hpp"
#include "aeshap/random.hpp"
#include "aeshap/tabular.hpp"

namespace aeshap::testing {

// Three attributes: color {blue, green, red}, size {L, M, S}, weight [0, 10].
inline RecordTable small_table(std::size_t n, std::uint64_t seed) {
  RecordTable t;
  t.schema = {AttributeSchema::categorical("color", {"blue", "green", "red"}),
              AttributeSchema::categorical("size", {"L", "M", "S"}),
              AttributeSchema::numerical("weight", 0.0, 10.0)};
  Rng rng(seed);
  const char* colors[] = {"blue", "green", "red"};
  const char* sizes[] = {"L", "M", "S"};
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = rng.index(3);
    t.rows.push_back({std::string(colors[c]), std::string(sizes[(c + (rng.bernoulli(0.1) ? 1 : 0)) % 3]),
                      10.0 * rng.uniform()});
  }
  t.labels.assign(n, AnomalyLabel{});
  return t;
}

inline NetworkParams random_model(const std::vector<std::size_t>& widths, std::uint64_t seed) {
  LayerSpec spec;
  spec.widths = widths;
  return NetworkParams::initialize(spec, seed);
}

inline Matrix random_unit_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform();
  }
  return m;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("aeshap_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace aeshap::testing
