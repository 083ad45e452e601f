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
#include <limits>
#include <sstream>

#include "aeshap/csv.hpp"
#include "aeshap/random.hpp"

namespace aeshap::csv {
namespace {

TEST(Csv, ReadsQuotedFieldsAndLineBreaks) {
  std::istringstream in("a,b,c\r\n\"x,1\",\"say \"\"hi\"\"\",\"two\nlines\"\n3,,4\n");
  const auto rows = read(in);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][0], "x,1");
  EXPECT_EQ(rows[1][1], "say \"hi\"");
  EXPECT_EQ(rows[1][2], "two\nlines");
  EXPECT_EQ(rows[2][1], "");
}

TEST(Csv, CustomDelimiter) {
  std::istringstream in("a;b\n1;2\n");
  const auto rows = read(in, ';');
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][1], "2");
}

TEST(Csv, WriteThenReadRoundTrips) {
  Rng rng(3);
  const std::string alphabet = "ab,\"\n ;x";
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Row> rows(1 + rng.index(4));
    const std::size_t width = 1 + rng.index(4);
    for (auto& row : rows) {
      for (std::size_t j = 0; j < width; ++j) {
        std::string cell;
        for (std::size_t k = rng.index(6); k > 0; --k) cell += alphabet[rng.index(alphabet.size())];
        row.push_back(cell);
      }
    }
    // An all-empty single-cell row is indistinguishable from a blank line.
    if (width == 1) {
      for (auto& row : rows) row[0] = "v" + row[0];
    }
    std::ostringstream out;
    for (const auto& row : rows) write_row(out, row);
    std::istringstream back(out.str());
    EXPECT_EQ(read(back), rows) << "trial " << trial;
  }
}

TEST(Csv, NumbersRoundTripExactly) {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<double>(rng.index(20)) - 10.0);
    double back = 0.0;
    ASSERT_TRUE(parse_number(format_number(v), back));
    EXPECT_EQ(back, v);
  }
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(3.0), "3");
}

TEST(Csv, ParseNumberIsStrict) {
  double v = 0.0;
  EXPECT_FALSE(parse_number("1.5x", v));
  EXPECT_FALSE(parse_number("", v));
  EXPECT_FALSE(parse_number("nan", v));
  EXPECT_FALSE(parse_number("inf", v));
  EXPECT_TRUE(parse_number("-2.5e3", v));
  EXPECT_EQ(v, -2500.0);
}

}  // namespace
}  // namespace aeshap::csv
