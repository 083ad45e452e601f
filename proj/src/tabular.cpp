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

#include "aeshap/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "aeshap/csv.hpp"
#include "aeshap/error.hpp"

namespace aeshap {

AttributeSchema AttributeSchema::categorical(std::string name, std::vector<std::string> vocabulary) {
  AttributeSchema a;
  a.name = std::move(name);
  a.kind = AttributeKind::kCategorical;
  a.vocabulary = std::move(vocabulary);
  a.validate();
  return a;
}

AttributeSchema AttributeSchema::numerical(std::string name, double min, double max) {
  AttributeSchema a;
  a.name = std::move(name);
  a.kind = AttributeKind::kNumerical;
  a.min = min;
  a.max = max;
  a.validate();
  return a;
}

long AttributeSchema::index_of(const std::string& token) const {
  auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), token);
  if (it == vocabulary.end() || *it != token) return -1;
  return static_cast<long>(it - vocabulary.begin());
}

void AttributeSchema::validate() const {
  if (is_categorical()) {
    if (vocabulary.empty()) throw DataError("attribute '" + name + "': empty vocabulary");
    for (std::size_t i = 0; i < vocabulary.size(); ++i) {
      if (vocabulary[i].empty()) throw DataError("attribute '" + name + "': empty category token");
      if (i > 0 && !(vocabulary[i - 1] < vocabulary[i])) {
        throw DataError("attribute '" + name + "': vocabulary must be sorted and unique");
      }
    }
  } else {
    if (!std::isfinite(min) || !std::isfinite(max)) {
      throw DataError("attribute '" + name + "': non-finite bounds");
    }
    if (!(min < max)) throw DataError("attribute '" + name + "': constant numerical column");
  }
}

std::vector<std::size_t> RecordTable::normal_rows() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i].is_anomaly()) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> RecordTable::anomalous_rows() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].is_anomaly()) out.push_back(i);
  }
  return out;
}

void RecordTable::validate() const {
  if (labels.size() != rows.size()) throw DataError("table: label count differs from row count");
  for (const auto& a : schema) a.validate();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Record& row = rows[r];
    if (row.size() != schema.size()) {
      throw DataError("table: row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                      " cells, expected " + std::to_string(schema.size()));
    }
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const AttributeSchema& a = schema[j];
      if (a.is_categorical()) {
        const auto* token = std::get_if<std::string>(&row[j]);
        if (token == nullptr) throw DataError("table: numeric cell in categorical '" + a.name + "'");
        if (a.index_of(*token) < 0) {
          const auto& lab = labels[r];
          const bool allowed = lab.anomaly_class == AnomalyClass::kTypeA &&
                               std::find(lab.perturbed.begin(), lab.perturbed.end(), j) !=
                                   lab.perturbed.end();
          if (!allowed) {
            throw DataError("table: row " + std::to_string(r) + " has unknown token '" + *token +
                            "' in '" + a.name + "'");
          }
        }
      } else {
        const auto* value = std::get_if<double>(&row[j]);
        if (value == nullptr) throw DataError("table: text cell in numerical '" + a.name + "'");
        if (!std::isfinite(*value)) throw DataError("table: non-finite value in '" + a.name + "'");
      }
    }
  }
}

EncodingMap::EncodingMap(const Schema& schema, bool reserve_unseen) : reserve_unseen_(reserve_unseen) {
  if (schema.empty()) throw DataError("encoding: empty schema");
  std::size_t offset = 0;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& a = schema[j];
    std::size_t length = 1;
    if (a.is_categorical()) length = a.vocabulary.size() + (reserve_unseen ? 1 : 0);
    slices_.push_back({offset, length});
    owner_.insert(owner_.end(), length, j);
    offset += length;
  }
  total_dims_ = offset;
}

Schema build_schema(const std::vector<std::vector<std::string>>& rows,
                    const std::vector<AttributeKind>& kind_hints,
                    const std::vector<std::string>& names) {
  if (rows.empty()) throw DataError("schema: no rows");
  const std::size_t width = kind_hints.size();
  if (!names.empty() && names.size() != width) throw DataError("schema: names/kind_hints length mismatch");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw DataError("schema: row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                      " cells but " + std::to_string(width) + " kind hints");
    }
  }
  Schema schema;
  for (std::size_t j = 0; j < width; ++j) {
    std::string name = names.empty() ? "a" + std::to_string(j + 1) : names[j];
    if (kind_hints[j] == AttributeKind::kCategorical) {
      std::set<std::string> distinct;
      for (const auto& row : rows) {
        if (row[j].empty()) throw DataError("schema: empty cell in column '" + name + "'");
        distinct.insert(row[j]);
      }
      schema.push_back(AttributeSchema::categorical(name, {distinct.begin(), distinct.end()}));
    } else {
      double lo = INFINITY, hi = -INFINITY;
      for (const auto& row : rows) {
        double v;
        if (!csv::parse_number(row[j], v)) {
          throw DataError("schema: non-numeric token '" + row[j] + "' in column '" + name + "'");
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (!(lo < hi)) throw DataError("schema: constant numerical column '" + name + "'");
      schema.push_back(AttributeSchema::numerical(name, lo, hi));
    }
  }
  return schema;
}

std::vector<Record> parse_records(const std::vector<std::vector<std::string>>& rows,
                                  const Schema& schema) {
  std::vector<Record> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != schema.size()) {
      throw DataError("records: ragged row " + std::to_string(r + 1));
    }
    Record rec;
    rec.reserve(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (schema[j].is_categorical()) {
        if (rows[r][j].empty()) throw DataError("records: missing value in '" + schema[j].name + "'");
        rec.emplace_back(rows[r][j]);
      } else {
        double v;
        if (!csv::parse_number(rows[r][j], v)) {
          throw DataError("records: non-numeric token '" + rows[r][j] + "' in '" + schema[j].name + "'");
        }
        rec.emplace_back(v);
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void encode_record(const Record& record, const Schema& schema, const EncodingMap& map,
                   Eigen::Ref<RowVector> out) {
  out.setZero();
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& a = schema[j];
    const Slice& s = map.slice(j);
    if (a.is_categorical()) {
      const auto& token = std::get<std::string>(record[j]);
      const long idx = a.index_of(token);
      if (idx >= 0) {
        out[static_cast<Eigen::Index>(s.start + idx)] = 1.0;
      } else if (map.reserve_unseen()) {
        out[static_cast<Eigen::Index>(s.start + s.length - 1)] = 1.0;
      } else {
        throw DataError("encode: unseen token '" + token + "' in '" + a.name + "'");
      }
    } else {
      const double v = std::get<double>(record[j]);
      if (!std::isfinite(v)) throw DataError("encode: non-finite value in '" + a.name + "'");
      out[static_cast<Eigen::Index>(s.start)] = std::clamp((v - a.min) / (a.max - a.min), 0.0, 1.0);
    }
  }
}

EncodedTable encode(const RecordTable& table, bool reserve_unseen) {
  EncodedTable out{Matrix(), EncodingMap(table.schema, reserve_unseen)};
  const auto n = static_cast<Eigen::Index>(table.num_rows());
  out.values.resize(n, static_cast<Eigen::Index>(out.map.total_dims()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Record& rec = table.rows[static_cast<std::size_t>(i)];
    if (rec.size() != table.schema.size()) throw DataError("encode: row width mismatch");
    encode_record(rec, table.schema, out.map, out.values.row(i));
  }
  return out;
}

Record decode_row(const Eigen::Ref<const RowVector>& row, const Schema& schema, const EncodingMap& map) {
  Record rec;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& a = schema[j];
    const Slice& s = map.slice(j);
    if (a.is_categorical()) {
      Eigen::Index best = 0;
      row.segment(static_cast<Eigen::Index>(s.start), static_cast<Eigen::Index>(s.length)).maxCoeff(&best);
      if (static_cast<std::size_t>(best) < a.vocabulary.size()) {
        rec.emplace_back(a.vocabulary[static_cast<std::size_t>(best)]);
      } else {
        rec.emplace_back(std::string("<unseen>"));
      }
    } else {
      rec.emplace_back(a.min + row[static_cast<Eigen::Index>(s.start)] * (a.max - a.min));
    }
  }
  return rec;
}

std::vector<AttributeRange> attribute_slices(const EncodingMap& map) {
  if (map.num_attributes() == 0) throw DataError("encoding: empty schema");
  std::vector<AttributeRange> out;
  for (std::size_t j = 0; j < map.num_attributes(); ++j) {
    out.push_back({j, map.slice(j).start, map.slice(j).length});
  }
  return out;
}

AttributeKind parse_kind(const std::string& text) {
  if (text == "categorical") return AttributeKind::kCategorical;
  if (text == "numerical") return AttributeKind::kNumerical;
  throw ConfigError("unknown attribute kind '" + text + "'");
}

RecordTable load_csv(const std::string& path, const std::vector<AttributeKind>& kind_hints, char delimiter) {
  auto raw = csv::read_file(path, delimiter);
  if (raw.empty()) throw DataError("csv: '" + path + "' has no header row");
  std::vector<std::string> header = std::move(raw.front());
  raw.erase(raw.begin());
  if (header.size() != kind_hints.size()) {
    throw DataError("csv: header has " + std::to_string(header.size()) + " columns but " +
                    std::to_string(kind_hints.size()) + " kind hints were given");
  }
  for (std::size_t r = 0; r < raw.size(); ++r) {
    if (raw[r].size() != header.size()) {
      throw DataError("csv: ragged row " + std::to_string(r + 2) + " in '" + path + "' (" +
                      std::to_string(raw[r].size()) + " cells, header has " +
                      std::to_string(header.size()) + ")");
    }
  }
  RecordTable table;
  table.schema = build_schema(raw, kind_hints, header);
  table.rows = parse_records(raw, table.schema);
  table.labels.assign(table.rows.size(), AnomalyLabel{});
  return table;
}

std::string cell_text(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  return csv::format_number(std::get<double>(cell));
}

void write_csv(const RecordTable& table, const std::string& path, char delimiter) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("csv: cannot write '" + path + "'");
  csv::Row header;
  for (const auto& a : table.schema) header.push_back(a.name);
  csv::write_row(out, header, delimiter);
  csv::Row line;
  for (const auto& rec : table.rows) {
    line.clear();
    for (const auto& cell : rec) line.push_back(cell_text(cell));
    csv::write_row(out, line, delimiter);
  }
  if (!out) throw DataError("csv: write failed for '" + path + "'");
}

nlohmann::json schema_to_json(const Schema& schema) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& a : schema) {
    nlohmann::json item{{"name", a.name}};
    if (a.is_categorical()) {
      item["kind"] = "categorical";
      item["vocabulary"] = a.vocabulary;
    } else {
      item["kind"] = "numerical";
      item["range"] = {a.min, a.max};
    }
    doc.push_back(std::move(item));
  }
  return doc;
}

Schema schema_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw DataError("schema json: expected an array");
  Schema schema;
  for (const auto& item : doc) {
    const auto kind = parse_kind(item.at("kind").get<std::string>());
    const auto name = item.at("name").get<std::string>();
    if (kind == AttributeKind::kCategorical) {
      schema.push_back(AttributeSchema::categorical(name, item.at("vocabulary").get<std::vector<std::string>>()));
    } else {
      const auto& range = item.at("range");
      schema.push_back(AttributeSchema::numerical(name, range.at(0).get<double>(), range.at(1).get<double>()));
    }
  }
  return schema;
}

nlohmann::json labels_to_json(const std::vector<AnomalyLabel>& labels) {
  nlohmann::json anomalies = nlohmann::json::array();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& l = labels[i];
    if (!l.is_anomaly()) continue;
    anomalies.push_back({{"row", i},
                         {"class", l.anomaly_class == AnomalyClass::kTypeA ? "TypeA" : "TypeB"},
                         {"k", l.k},
                         {"perturbed", l.perturbed}});
  }
  return {{"num_rows", labels.size()}, {"anomalies", anomalies}};
}

std::vector<AnomalyLabel> labels_from_json(const nlohmann::json& doc, std::size_t num_rows) {
  if (doc.at("num_rows").get<std::size_t>() != num_rows) {
    throw DataError("labels json: row count does not match the data file");
  }
  std::vector<AnomalyLabel> labels(num_rows);
  for (const auto& item : doc.at("anomalies")) {
    const auto row = item.at("row").get<std::size_t>();
    if (row >= num_rows) throw DataError("labels json: row index out of range");
    const auto cls = item.at("class").get<std::string>();
    AnomalyLabel& l = labels[row];
    if (cls == "TypeA") {
      l.anomaly_class = AnomalyClass::kTypeA;
    } else if (cls == "TypeB") {
      l.anomaly_class = AnomalyClass::kTypeB;
    } else {
      throw DataError("labels json: unknown class '" + cls + "'");
    }
    l.k = item.at("k").get<std::size_t>();
    l.perturbed = item.at("perturbed").get<std::vector<std::size_t>>();
  }
  return labels;
}

}  // namespace aeshap
