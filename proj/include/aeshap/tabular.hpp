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

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace aeshap {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

enum class AttributeKind { kCategorical, kNumerical };

struct AttributeSchema {
  std::string name;
  AttributeKind kind = AttributeKind::kCategorical;
  std::vector<std::string> vocabulary;  // categorical only, sorted
  double min = 0.0;                     // numerical only
  double max = 1.0;

  static AttributeSchema categorical(std::string name, std::vector<std::string> vocabulary);
  static AttributeSchema numerical(std::string name, double min, double max);

  bool is_categorical() const { return kind == AttributeKind::kCategorical; }

  // Position of `token` in the vocabulary, or -1.
  long index_of(const std::string& token) const;

  // Throws DataError on an empty/duplicate vocabulary or min >= max.
  void validate() const;
};

using Schema = std::vector<AttributeSchema>;

// A cell holds a category token or a number, matching its attribute kind.
using Cell = std::variant<std::string, double>;
using Record = std::vector<Cell>;

enum class AnomalyClass { kNone, kTypeA, kTypeB };

struct AnomalyLabel {
  AnomalyClass anomaly_class = AnomalyClass::kNone;
  std::size_t k = 0;
  std::vector<std::size_t> perturbed;  // TypeA: overwritten attribute indices

  bool is_anomaly() const { return anomaly_class != AnomalyClass::kNone; }
  bool operator==(const AnomalyLabel&) const = default;
};

struct RecordTable {
  Schema schema;
  std::vector<Record> rows;
  std::vector<AnomalyLabel> labels;

  std::size_t num_rows() const { return rows.size(); }
  std::size_t num_attributes() const { return schema.size(); }
  std::vector<std::size_t> normal_rows() const;
  std::vector<std::size_t> anomalous_rows() const;

  // Checks row widths, cell kinds, label count and vocabulary membership
  // (out-of-vocabulary tokens only on TypeA-perturbed attributes).
  void validate() const;
};

struct Slice {
  std::size_t start = 0;
  std::size_t length = 0;
};

// Contiguous per-attribute slices of the encoded dimension axis.
class EncodingMap {
 public:
  EncodingMap() = default;
  EncodingMap(const Schema& schema, bool reserve_unseen);

  const std::vector<Slice>& slices() const { return slices_; }
  const Slice& slice(std::size_t attribute) const { return slices_.at(attribute); }
  std::size_t total_dims() const { return total_dims_; }
  std::size_t num_attributes() const { return slices_.size(); }
  bool reserve_unseen() const { return reserve_unseen_; }
  std::size_t attribute_of_dim(std::size_t dim) const { return owner_.at(dim); }

 private:
  std::vector<Slice> slices_;
  std::vector<std::size_t> owner_;
  std::size_t total_dims_ = 0;
  bool reserve_unseen_ = false;
};

struct AttributeRange {
  std::size_t attribute = 0;
  std::size_t start = 0;
  std::size_t length = 0;
};

struct EncodedTable {
  Matrix values;  // N x D, entries in [0, 1]
  EncodingMap map;
};

// Builds the schema from raw string rows. Vocabularies are the sorted
// distinct tokens; numeric bounds are the observed extrema.
Schema build_schema(const std::vector<std::vector<std::string>>& rows,
                    const std::vector<AttributeKind>& kind_hints,
                    const std::vector<std::string>& names = {});

// Converts raw string rows into typed records under `schema`.
std::vector<Record> parse_records(const std::vector<std::vector<std::string>>& rows,
                                  const Schema& schema);

EncodedTable encode(const RecordTable& table, bool reserve_unseen);
void encode_record(const Record& record, const Schema& schema, const EncodingMap& map,
                   Eigen::Ref<RowVector> out);
// Argmax per categorical slice and inverse min-max per numerical slice. The
// reserved unseen dimension decodes to the token "<unseen>".
Record decode_row(const Eigen::Ref<const RowVector>& row, const Schema& schema,
                  const EncodingMap& map);

std::vector<AttributeRange> attribute_slices(const EncodingMap& map);

RecordTable load_csv(const std::string& path, const std::vector<AttributeKind>& kind_hints,
                     char delimiter = ',');
void write_csv(const RecordTable& table, const std::string& path, char delimiter = ',');
std::string cell_text(const Cell& cell);

nlohmann::json schema_to_json(const Schema& schema);
Schema schema_from_json(const nlohmann::json& doc);

nlohmann::json labels_to_json(const std::vector<AnomalyLabel>& labels);
std::vector<AnomalyLabel> labels_from_json(const nlohmann::json& doc, std::size_t num_rows);

AttributeKind parse_kind(const std::string& text);

}  // namespace aeshap
