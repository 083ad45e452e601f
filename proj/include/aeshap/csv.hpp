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

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace aeshap::csv {

using Row = std::vector<std::string>;

// RFC-4180 reader: quoted fields may contain the delimiter, doubled quotes
// and line breaks. CRLF and LF line endings are both accepted. A trailing
// empty line is ignored.
std::vector<Row> read(std::istream& in, char delimiter = ',');
std::vector<Row> read_file(const std::string& path, char delimiter = ',');

void write_row(std::ostream& out, const Row& row, char delimiter = ',');

// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

// Strict full-token parse; rejects trailing garbage and non-finite results.
bool parse_number(std::string_view token, double& value);

}  // namespace aeshap::csv
