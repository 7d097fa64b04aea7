#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "shapmix/trainer.hpp"

namespace shapmix {
using nlohmann::ordered_json;

namespace {

ordered_json optional_value(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json metrics_json(const EvalMetrics& m) {
  ordered_json j;
  j["overall"] = m.overall;
  j["many"] = optional_value(m.many);
  j["medium"] = optional_value(m.medium);
  j["few"] = optional_value(m.few);
  ordered_json per = ordered_json::array();
  for (const auto& a : m.per_class) per.push_back(optional_value(a));
  j["per_class"] = per;
  j["test_counts"] = m.test_counts;
  return j;
}

}  // namespace

std::string metrics_to_json(const EvalMetrics& metrics) { return metrics_json(metrics).dump(2); }

std::string report_to_json(const TrainReport& report, const TrainConfig& config) {
  ordered_json doc;
  doc["config"] = ordered_json::parse(train_config_to_json(config));
  doc["train_counts"] = report.train_counts;
  doc["class_names"] = report.class_names;
  ordered_json epochs = ordered_json::array();
  for (const auto& e : report.epochs) {
    ordered_json r;
    r["epoch"] = e.epoch;
    r["lr"] = e.lr;
    r["clean_loss"] = e.clean_loss;
    r["mixed_loss"] = optional_value(e.mixed_loss);
    r["mixed_terms"] = e.mixed_terms;
    r["mixes_built"] = e.mixes_built;
    r["saliency_updates"] = e.saliency_updates;
    r["overall"] = e.metrics.overall;
    r["many"] = optional_value(e.metrics.many);
    r["medium"] = optional_value(e.metrics.medium);
    r["few"] = optional_value(e.metrics.few);
    epochs.push_back(r);
  }
  doc["epochs"] = epochs;
  doc["final"] = metrics_json(report.final_metrics);
  return doc.dump(2);
}

std::string timings_to_json(const PhaseTimings& t) {
  ordered_json doc;
  doc["estimation_s"] = t.estimation_s;
  doc["mixing_s"] = t.mixing_s;
  doc["optimization_s"] = t.optimization_s;
  doc["evaluation_s"] = t.evaluation_s;
  return doc.dump(2);
}

std::string per_class_csv(const EvalMetrics& metrics, std::span<const int> train_counts,
                          const std::vector<std::string>& class_names,
                          const ShotThresholds& shots) {
  std::ostringstream out;
  out << "class_id,class_name,train_count,bucket,accuracy\n";
  out << std::setprecision(10);
  for (std::size_t c = 0; c < train_counts.size(); ++c) {
    const std::string name = c < class_names.size() ? class_names[c] : "class_" + std::to_string(c);
    out << c << ',' << name << ',' << train_counts[c] << ','
        << bucket_name(shot_bucket(train_counts[c], shots)) << ',';
    if (c < metrics.per_class.size() && metrics.per_class[c]) out << *metrics.per_class[c];
    out << '\n';
  }
  return out.str();
}

std::vector<std::vector<RankedCoalition>> saliency_snapshot(const SaliencyTable& table,
                                                            std::size_t top_k) {
  std::vector<std::vector<RankedCoalition>> out;
  for (int c = 0; c < table.num_classes(); ++c) {
    const auto norm = normalized_saliency(table, c);
    std::vector<RankedCoalition> rows;
    for (std::size_t k = 0; k < table.coalitions().size(); ++k)
      rows.push_back({table.coalitions()[k], table.value(c, k), norm[k], table.update_count(c, k)});
    std::stable_sort(rows.begin(), rows.end(), [](const RankedCoalition& a, const RankedCoalition& b) {
      return a.normalized > b.normalized;
    });
    if (top_k > 0 && rows.size() > top_k) rows.resize(top_k);
    out.push_back(std::move(rows));
  }
  return out;
}

std::string saliency_to_json(const SaliencyTable& table, const std::vector<std::string>& class_names,
                             std::size_t top_k) {
  const auto snap = saliency_snapshot(table, top_k);
  ordered_json doc = ordered_json::object();
  for (std::size_t c = 0; c < snap.size(); ++c) {
    const std::string name = c < class_names.size() ? class_names[c] : "class_" + std::to_string(c);
    ordered_json entries = ordered_json::object();
    int rank = 1;
    for (const auto& row : snap[c]) {
      ordered_json e;
      e["ema_value"] = row.ema_value;
      e["normalized"] = row.normalized;
      e["update_count"] = row.update_count;
      e["rank"] = rank++;
      entries[row.coalition.key()] = e;
    }
    doc[name] = entries;
  }
  return doc.dump(2);
}

}  // namespace shapmix
