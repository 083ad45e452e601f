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

#include "aeshap/bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "aeshap/csv.hpp"
#include "aeshap/error.hpp"
#include "aeshap/parallel.hpp"
#include "aeshap/random.hpp"

namespace aeshap {
namespace {

struct AnomalyOutcome {
  // [method][repeat]
  std::vector<std::vector<Ranking>> rankings;
  std::vector<std::vector<std::vector<double>>> error_curves;
};

bool higher_is_better(const std::string& metric) {
  return metric.rfind("mrr_r", 0) == 0 || metric.rfind("hits_auc", 0) == 0;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

bool RelevanceSet::applies_to(const AnomalyLabel& label) const {
  if (from_label && label.perturbed.empty()) return false;
  if (!when_perturbed) return true;
  return std::find(label.perturbed.begin(), label.perturbed.end(), *when_perturbed) != label.perturbed.end();
}

std::vector<std::size_t> RelevanceSet::targets_for(const AnomalyLabel& label) const {
  return from_label ? label.perturbed : attributes;
}

void RelevanceSpec::validate(std::size_t num_attributes) const {
  for (const auto& set : relevant) {
    if (set.name.empty()) throw ConfigError("relevance: set without a name");
    if (!set.from_label && set.attributes.empty()) throw ConfigError("relevance: set '" + set.name + "' is empty");
    for (auto a : set.attributes) {
      if (a >= num_attributes) throw ConfigError("relevance: set '" + set.name + "' references attribute out of range");
    }
    if (set.when_perturbed && *set.when_perturbed >= num_attributes) {
      throw ConfigError("relevance: set '" + set.name + "' filter attribute out of range");
    }
  }
  for (auto a : uninformative) {
    if (a >= num_attributes) throw ConfigError("relevance: uninformative attribute out of range");
  }
}

void BenchmarkConfig::validate() const {
  if (model_seeds.empty()) throw ConfigError("benchmark: model_seeds must not be empty");
  if (explanation_seeds.empty()) throw ConfigError("benchmark: explanation_seeds must not be empty");
  if (anomalies_per_run < 1) throw ConfigError("benchmark: anomalies_per_run must be >= 1");
  if (methods.empty()) throw ConfigError("benchmark: no methods selected");
  if (background_size < 1) throw ConfigError("benchmark: background_size must be >= 1");
  if (stability_n < 1) throw ConfigError("benchmark: stability_n must be >= 1");
  if (!(delta_quantile > 0.0 && delta_quantile < 1.0)) throw ConfigError("benchmark: delta_quantile must lie in (0, 1)");
}

const MetricSummary* MetricReport::find(const std::string& method, const std::string& metric,
                                        const std::string& dataset) const {
  for (const auto& m : metrics) {
    if (m.method == method && m.metric == metric && (dataset.empty() || m.dataset == dataset)) return &m;
  }
  return nullptr;
}

double MetricReport::mean(Method method, const std::string& metric) const {
  const auto* m = find(method_name(method), metric);
  if (m == nullptr) throw DataError("report: no metric '" + metric + "' for " + method_name(method));
  return m->mean;
}

MetricSummary summarize(std::string method, std::string metric, std::string dataset, std::vector<double> values,
                        bool higher) {
  MetricSummary s;
  s.method = std::move(method);
  s.metric = std::move(metric);
  s.dataset = std::move(dataset);
  s.n = values.size();
  s.mean = mean_of(values);
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = values.empty() ? 0.0 : std::sqrt(var / static_cast<double>(values.size()));
  s.values = std::move(values);
  s.higher_is_better = higher;
  return s;
}

MetricReport run_benchmark(const BenchmarkConfig& cfg, const DatasetBundle& data, const RelevanceSpec& relevance) {
  cfg.validate();
  const RecordTable& table = data.table;
  table.validate();
  const std::size_t t = table.num_attributes();
  relevance.validate(t);

  const EncodedTable encoded = encode(table, cfg.reserve_unseen);
  const std::size_t dims = encoded.map.total_dims();
  const auto normal = table.normal_rows();
  const auto injected = table.anomalous_rows();
  if (normal.empty()) throw DataError("benchmark: no regular rows to train on");
  if (injected.empty()) throw DataError("benchmark: the dataset contains no injected anomalies");

  LayerSpec spec = cfg.layer_spec;
  if (spec.widths.empty()) throw ConfigError("benchmark: layer spec has no widths");
  if (spec.widths.front() == 0) spec.widths.front() = spec.widths.back() = dims;
  if (spec.input_dim() != dims) {
    throw ConfigError("benchmark: layer spec input width " + std::to_string(spec.input_dim()) +
                      " does not match the " + std::to_string(dims) + " encoded dimensions");
  }

  Matrix train_data(static_cast<Eigen::Index>(normal.size()), static_cast<Eigen::Index>(dims));
  for (std::size_t i = 0; i < normal.size(); ++i) {
    train_data.row(static_cast<Eigen::Index>(i)) = encoded.values.row(static_cast<Eigen::Index>(normal[i]));
  }
  const ReplacementTable replacements =
      ReplacementTable::from_table(table, encoded.map, cfg.greedy_replacement ? cfg.greedy_top_values : 1);
  const std::size_t n_max = cfg.error_n_max == 0 ? t : std::min(cfg.error_n_max, t);
  const std::size_t repeats = cfg.explanation_seeds.size();
  const std::size_t n_methods = cfg.methods.size();

  MetricReport report;
  // Pooled per-sample values: [method][metric] -> samples.
  std::vector<std::map<std::string, std::vector<double>>> samples(n_methods);
  std::vector<std::map<std::size_t, std::vector<double>>> error_by_n(n_methods);
  std::vector<std::map<std::size_t, std::vector<double>>> stability_by_n(n_methods);
  std::vector<std::map<std::string, std::vector<Ranking>>> hits_rankings(n_methods);
  std::vector<std::map<std::string, std::vector<std::vector<std::size_t>>>> hits_targets(n_methods);

  for (const auto model_seed : cfg.model_seeds) {
    TrainConfig tc = cfg.train;
    tc.seed = model_seed;
    const TrainResult trained = train(train_data, spec, tc);
    const NetworkParams& model = trained.params;
    const FlagResult flags = flag_anomalies(model, encoded.values, cfg.delta_quantile);

    SeedDiagnostics diag;
    diag.model_seed = model_seed;
    diag.epochs = trained.epoch_losses.size();
    diag.initial_loss = trained.initial_loss;
    diag.final_loss = trained.best_loss;
    diag.threshold = flags.threshold;
    diag.injected = injected.size();

    const std::set<std::size_t> flagged(flags.flagged.begin(), flags.flagged.end());
    std::vector<std::size_t> pool;
    for (auto r : injected) {
      if (flagged.count(r)) pool.push_back(r);
    }
    diag.flagged_injected = pool.size();
    const std::size_t wanted = std::min(cfg.anomalies_per_run, injected.size());
    if (pool.size() < wanted) {
      report.warnings.push_back("model seed " + std::to_string(model_seed) + ": only " + std::to_string(pool.size()) +
                                " of " + std::to_string(injected.size()) +
                                " injected anomalies were flagged; evaluating injected anomalies directly");
      pool = injected;
    }
    Rng picker(mix_seed(model_seed, 0xA11CE));
    std::vector<std::size_t> evaluated;
    for (auto p : picker.sample_without_replacement(pool.size(), wanted)) evaluated.push_back(pool[p]);
    std::sort(evaluated.begin(), evaluated.end());
    diag.evaluated = evaluated;

    std::vector<BackgroundSet> backgrounds;
    for (auto seed : cfg.explanation_seeds) {
      backgrounds.push_back(BackgroundSet::sample(encoded.values, normal, cfg.background_size, mix_seed(seed, model_seed)));
    }

    std::vector<AnomalyOutcome> outcomes(evaluated.size());
    parallel_for(evaluated.size(), cfg.threads, [&](std::size_t a) {
      const std::size_t row_index = evaluated[a];
      AnomalyOutcome& out = outcomes[a];
      out.rankings.assign(n_methods, std::vector<Ranking>(repeats));
      out.error_curves.assign(n_methods, std::vector<std::vector<double>>(repeats));
      const RowVector row = encoded.values.row(static_cast<Eigen::Index>(row_index));
      for (std::size_t m = 0; m < n_methods; ++m) {
        for (std::size_t k = 0; k < repeats; ++k) {
          ExplanationRequest req;
          req.method = cfg.methods[m];
          req.row = row;
          req.model = &model;
          req.map = &encoded.map;
          req.background = &backgrounds[k];
          req.seed = mix_seed(cfg.explanation_seeds[k], row_index);
          req.top_attributes = cfg.top_attributes;
          req.top_encodings = cfg.top_encodings;
          req.n_coalitions = cfg.n_coalitions;
          req.ashap_drop_self = cfg.ashap_drop_self;
          req.anomaly_id = std::to_string(row_index);
          const Explanation e = explain(req);
          out.rankings[m][k] = ranked_attributes(e);
          out.error_curves[m][k] =
              error_reduction_curve(model, row, out.rankings[m][k], replacements, n_max, cfg.greedy_replacement);
        }
      }
    });

    for (std::size_t a = 0; a < evaluated.size(); ++a) {
      const AnomalyLabel& label = table.labels[evaluated[a]];
      for (std::size_t m = 0; m < n_methods; ++m) {
        auto& metric = samples[m];
        for (std::size_t k = 0; k < repeats; ++k) {
          const Ranking& ranking = outcomes[a].rankings[m][k];
          for (const auto& set : relevance.relevant) {
            if (!set.applies_to(label)) continue;
            const auto targets = set.targets_for(label);
            const std::size_t rank = first_rank(ranking, targets);
            metric["mrr_r:" + set.name].push_back(1.0 / static_cast<double>(rank));
            metric["hits_auc:" + set.name].push_back(static_cast<double>(t - rank + 1));
            hits_rankings[m][set.name].push_back(ranking);
            hits_targets[m][set.name].push_back(targets);
          }
          if (!relevance.uninformative.empty()) {
            metric["mrr_u"].push_back(1.0 / static_cast<double>(first_rank(ranking, relevance.uninformative)));
          }
          const auto& curve = outcomes[a].error_curves[m][k];
          double area = 0.0;
          for (std::size_t n = 1; n <= n_max; ++n) {
            area += curve[n];
            error_by_n[m][n].push_back(curve[n]);
          }
          metric["error_reduction"].push_back(n_max > 0 ? area / static_cast<double>(n_max) : 1.0);
        }
        if (repeats >= 2) {
          const std::size_t sn = std::min(cfg.stability_n, t);
          metric["stability_s" + std::to_string(sn)].push_back(stability_index(outcomes[a].rankings[m], sn));
          for (std::size_t n = 1; n <= t; ++n) {
            stability_by_n[m][n].push_back(stability_index(outcomes[a].rankings[m], n));
          }
        }
      }
    }
    report.seeds.push_back(std::move(diag));
  }

  // Fixed metric order: relevance sets, robustness, stability, error reduction.
  std::vector<std::string> order;
  for (const auto& set : relevance.relevant) {
    order.push_back("mrr_r:" + set.name);
    order.push_back("hits_auc:" + set.name);
  }
  order.push_back("mrr_u");
  order.push_back("stability_s" + std::to_string(std::min(cfg.stability_n, t)));
  order.push_back("error_reduction");

  for (std::size_t m = 0; m < n_methods; ++m) {
    const std::string name = method_name(cfg.methods[m]);
    for (const auto& metric : order) {
      auto it = samples[m].find(metric);
      if (it == samples[m].end() || it->second.empty()) continue;
      report.metrics.push_back(summarize(name, metric, data.name, it->second, higher_is_better(metric)));
    }
    for (std::size_t n = 0; n <= n_max; ++n) {
      report.curves.push_back({name, data.name, "error_pct", n, n == 0 ? 1.0 : mean_of(error_by_n[m][n])});
    }
    for (const auto& set : relevance.relevant) {
      auto it = hits_rankings[m].find(set.name);
      if (it == hits_rankings[m].end()) continue;
      for (std::size_t n = 1; n <= t; ++n) {
        report.curves.push_back(
            {name, data.name, "hits_at_n:" + set.name, n, hits_at_n(it->second, hits_targets[m][set.name], n)});
      }
    }
    for (const auto& [n, values] : stability_by_n[m]) {
      report.curves.push_back({name, data.name, "stability", n, mean_of(values)});
    }
  }
  for (const auto& set : relevance.relevant) {
    if (!report.find(method_name(cfg.methods.front()), "mrr_r:" + set.name)) {
      report.warnings.push_back("relevance set '" + set.name + "' matched no evaluated anomaly");
    }
  }
  return report;
}

std::string metrics_csv(const MetricReport& report) {
  std::ostringstream out;
  csv::write_row(out, {"method", "metric", "dataset", "mean", "std", "n"});
  for (const auto& m : report.metrics) {
    csv::write_row(out, {m.method, m.metric, m.dataset, csv::format_number(m.mean), csv::format_number(m.std),
                         std::to_string(m.n)});
  }
  return out.str();
}

nlohmann::json metrics_json(const MetricReport& report) {
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& m : report.metrics) {
    metrics.push_back({{"method", m.method}, {"metric", m.metric}, {"dataset", m.dataset}, {"mean", m.mean},
                       {"std", m.std}, {"n", m.n}, {"higher_is_better", m.higher_is_better}, {"values", m.values}});
  }
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : report.seeds) {
    seeds.push_back({{"model_seed", s.model_seed}, {"epochs", s.epochs}, {"initial_loss", s.initial_loss},
                     {"final_loss", s.final_loss}, {"threshold", s.threshold}, {"injected", s.injected},
                     {"flagged_injected", s.flagged_injected}, {"evaluated", s.evaluated}});
  }
  return {{"metrics", metrics}, {"seeds", seeds}, {"warnings", report.warnings}};
}

std::string curves_csv(const MetricReport& report) {
  std::ostringstream out;
  csv::write_row(out, {"method", "dataset", "curve", "n", "value"});
  for (const auto& c : report.curves) {
    csv::write_row(out, {c.method, c.dataset, c.curve, std::to_string(c.n), csv::format_number(c.value)});
  }
  return out.str();
}

std::string ranking_text(const MetricReport& report) {
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& m : report.metrics) {
    const std::pair<std::string, std::string> key{m.dataset, m.metric};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::ostringstream out;
  for (const auto& [dataset, metric] : keys) {
    std::vector<const MetricSummary*> rows;
    for (const auto& m : report.metrics) {
      if (m.dataset == dataset && m.metric == metric) rows.push_back(&m);
    }
    const bool higher = rows.front()->higher_is_better;
    std::stable_sort(rows.begin(), rows.end(), [higher](const MetricSummary* a, const MetricSummary* b) {
      return higher ? a->mean > b->mean : a->mean < b->mean;
    });
    out << dataset << " " << metric << " (" << (higher ? "higher" : "lower") << " is better): ";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0) out << " > ";
      out << rows[i]->method << " " << std::fixed << std::setprecision(4) << rows[i]->mean;
    }
    out << "\n";
  }
  return out.str();
}

nlohmann::json to_json(const RelevanceSpec& spec) {
  nlohmann::json sets = nlohmann::json::array();
  for (const auto& s : spec.relevant) {
    nlohmann::json item{{"name", s.name}, {"attributes", s.attributes}, {"from_label", s.from_label}};
    if (s.when_perturbed) item["when_perturbed"] = *s.when_perturbed;
    sets.push_back(std::move(item));
  }
  return {{"relevant", sets}, {"uninformative", spec.uninformative}};
}

RelevanceSpec relevance_from_json(const nlohmann::json& doc) {
  RelevanceSpec spec;
  for (const auto& item : doc.value("relevant", nlohmann::json::array())) {
    RelevanceSet s;
    s.name = item.at("name").get<std::string>();
    s.attributes = item.value("attributes", std::vector<std::size_t>{});
    s.from_label = item.value("from_label", false);
    if (item.contains("when_perturbed")) s.when_perturbed = item.at("when_perturbed").get<std::size_t>();
    spec.relevant.push_back(std::move(s));
  }
  spec.uninformative = doc.value("uninformative", std::vector<std::size_t>{});
  return spec;
}

}  // namespace aeshap
