#include "shapmix/shapmix.h"

#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapmix/checkpoint.hpp"
#include "shapmix/dataset.hpp"
#include "shapmix/dataset_io.hpp"
#include "shapmix/errors.hpp"
#include "shapmix/trainer.hpp"

struct shapmix_dataset {
  shapmix::LabeledDataset data;
  std::vector<std::string> warnings;
};

struct shapmix_run {
  shapmix::TrainConfig config;
  shapmix::TrainResult result;
  shapmix::Dims dims;
};

struct shapmix_model {
  shapmix::Checkpoint checkpoint;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_field;

int fail(int status, const std::string& message, const std::string& field = {}) {
  g_error = message;
  g_field = field;
  return status;
}

int status_of(shapmix::ErrorKind k) {
  switch (k) {
    case shapmix::ErrorKind::config: return SHAPMIX_E_CONFIG;
    case shapmix::ErrorKind::data: return SHAPMIX_E_DATA;
    case shapmix::ErrorKind::parse: return SHAPMIX_E_PARSE;
    case shapmix::ErrorKind::numeric: return SHAPMIX_E_NUMERIC;
    case shapmix::ErrorKind::io: return SHAPMIX_E_IO;
  }
  return SHAPMIX_E_INTERNAL;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
int guarded(Fn&& fn) {
  g_error.clear();
  g_field.clear();
  try {
    fn();
    return SHAPMIX_OK;
  } catch (const shapmix::Error& e) {
    return fail(status_of(e.kind()), e.what(), e.field());
  } catch (const nlohmann::json::exception& e) {
    return fail(SHAPMIX_E_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SHAPMIX_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SHAPMIX_E_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

shapmix::Dims dims_from(const nlohmann::json& v) {
  if (!v.is_array() || v.size() != 4)
    throw shapmix::ConfigError("dims must be a list [C, T, V, M]", "dims");
  return {v[0].get<int>(), v[1].get<int>(), v[2].get<int>(), v[3].get<int>()};
}

shapmix_dims to_c(const shapmix::Dims& d) { return {d.channels, d.frames, d.joints, d.performers}; }

}  // namespace

extern "C" {

const char* shapmix_version(void) { return "0.1.0"; }
const char* shapmix_last_error(void) { return g_error.c_str(); }
const char* shapmix_last_error_field(void) { return g_field.c_str(); }
void shapmix_string_free(char* s) { delete[] s; }

int shapmix_dataset_generate(const char* config_json, shapmix_dataset** out) {
  if (!out) return fail(SHAPMIX_E_ARGUMENT, "null output handle");
  *out = nullptr;
  return guarded([&] {
    const auto doc = nlohmann::json::parse(config_json ? config_json : "{}");
    shapmix::SyntheticConfig cfg;
    for (const auto& [key, _] : doc.items())
      if (key != "classes" && key != "per_class" && key != "dims" && key != "seed" &&
          key != "noise" && key != "jitter" && key != "partition" && key != "split")
        throw shapmix::ConfigError("unknown generator field '" + key + "'", key);
    cfg.num_classes = doc.value("classes", cfg.num_classes);
    cfg.per_class = doc.value("per_class", cfg.per_class);
    if (doc.contains("dims")) cfg.dims = dims_from(doc["dims"]);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.split = doc.value("split", cfg.split);
    cfg.noise = doc.value("noise", cfg.noise);
    cfg.jitter = doc.value("jitter", cfg.jitter);
    const std::string part = doc.value("partition", std::string{});
    if (!cfg.dims.valid()) throw shapmix::ConfigError("invalid dims " + cfg.dims.to_string(), "dims");
    const auto partition =
        part.empty() ? shapmix::default_partition(cfg.dims.joints) : shapmix::load_partition(part);
    *out = new shapmix_dataset{shapmix::generate_synthetic_dataset(cfg, partition), {}};
  });
}

int shapmix_dataset_load(const char* dir, shapmix_dataset** out) {
  if (!out || !dir) return fail(SHAPMIX_E_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    std::vector<std::string> warnings;
    auto data = shapmix::load_dataset(dir, &warnings);
    *out = new shapmix_dataset{std::move(data), std::move(warnings)};
  });
}

int shapmix_dataset_save(const shapmix_dataset* ds, const char* dir) {
  if (!ds || !dir) return fail(SHAPMIX_E_ARGUMENT, "null argument");
  return guarded([&] { shapmix::save_dataset(ds->data, dir); });
}

int shapmix_dataset_pareto_subsample(const shapmix_dataset* ds, double imbalance_factor,
                                     int32_t max_per_class, uint64_t seed,
                                     shapmix_dataset** out) {
  if (!ds || !out) return fail(SHAPMIX_E_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new shapmix_dataset{
        shapmix::pareto_subsample(ds->data, imbalance_factor, max_per_class, seed), {}};
  });
}

int shapmix_dataset_dims(const shapmix_dataset* ds, shapmix_dims* out) {
  if (!ds || !out) return fail(SHAPMIX_E_ARGUMENT, "null argument");
  *out = to_c(ds->data.dims());
  return SHAPMIX_OK;
}

size_t shapmix_dataset_size(const shapmix_dataset* ds) { return ds ? ds->data.size() : 0; }

int32_t shapmix_dataset_num_classes(const shapmix_dataset* ds) {
  return ds ? ds->data.num_classes() : 0;
}

int shapmix_dataset_class_counts(const shapmix_dataset* ds, int32_t* counts, size_t capacity) {
  if (!ds || (!counts && capacity)) return fail(SHAPMIX_E_ARGUMENT, "null argument");
  const auto c = ds->data.class_counts();
  for (size_t i = 0; i < capacity && i < c.size(); ++i) counts[i] = c[i];
  return SHAPMIX_OK;
}

size_t shapmix_dataset_warning_count(const shapmix_dataset* ds) {
  return ds ? ds->warnings.size() : 0;
}

const char* shapmix_dataset_warning(const shapmix_dataset* ds, size_t i) {
  if (!ds || i >= ds->warnings.size()) return nullptr;
  return ds->warnings[i].c_str();
}

void shapmix_dataset_free(shapmix_dataset* ds) { delete ds; }

int shapmix_dataset_content_hash(const char* dir, char** out_hex) {
  if (!dir || !out_hex) return fail(SHAPMIX_E_ARGUMENT, "null argument");
  *out_hex = nullptr;
  return guarded([&] { *out_hex = dup_string(shapmix::dataset_content_hash(dir)); });
}

int shapmix_config_resolve(const char* config_json, char** out_json) {
  if (!out_json) return fail(SHAPMIX_E_ARGUMENT, "null output");
  *out_json = nullptr;
  return guarded([&] {
    const auto cfg = shapmix::train_config_from_json(config_json ? config_json : "");
    *out_json = dup_string(shapmix::train_config_to_json(cfg));
  });
}

int shapmix_train(const shapmix_dataset* train, const shapmix_dataset* eval,
                  const char* config_json, shapmix_run** out) {
  if (!train || !out) return fail(SHAPMIX_E_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto cfg = shapmix::train_config_from_json(config_json ? config_json : "");
    auto result = shapmix::train(train->data, cfg, eval ? &eval->data : nullptr);
    *out = new shapmix_run{std::move(cfg), std::move(result), train->data.dims()};
  });
}

int shapmix_run_report_json(const shapmix_run* run, char** out) {
  if (!run || !out) return fail(SHAPMIX_E_ARGUMENT, "null argument");
  return guarded([&] { *out = dup_string(shapmix::report_to_json(run->result.report, run->config)); });
}

int shapmix_run_timings_json(const shapmix_run* run, char** out) {
  if (!run || !out) return fail(SHAPMIX_E_ARGUMENT, "null argument");
  return guarded([&] { *out = dup_string(shapmix::timings_to_json(run->result.report.timings)); });
}

int shapmix_run_class_csv(const shapmix_run* run, char** out) {
  if (!run || !out) return fail(SHAPMIX_E_ARGUMENT, "null argument");
  return guarded([&] {
    const auto& r = run->result.report;
    *out = dup_string(shapmix::per_class_csv(r.final_metrics, r.train_counts, r.class_names,
                                             run->config.shots));
  });
}

int shapmix_run_has_saliency(const shapmix_run* run) {
  return run && run->result.table.has_value() ? 1 : 0;
}

int shapmix_run_saliency_json(const shapmix_run* run, size_t top_k, char** out) {
  if (!run || !out) return fail(SHAPMIX_E_ARGUMENT, "null argument");
  *out = nullptr;
  if (!run->result.table)
    return fail(SHAPMIX_E_CONFIG, "run has no saliency table (mode is not shap-mix)", "mode");
  return guarded([&] {
    *out = dup_string(shapmix::saliency_to_json(*run->result.table,
                                                run->result.report.class_names, top_k));
  });
}

int shapmix_run_save_checkpoint(const shapmix_run* run, const char* path) {
  if (!run || !path) return fail(SHAPMIX_E_ARGUMENT, "null argument");
  return guarded([&] {
    shapmix::Checkpoint ck;
    ck.params = run->result.params;
    ck.dims = run->dims;
    ck.loss = {run->config.loss, run->result.stats.counts};
    ck.train_counts = run->result.stats.counts;
    ck.class_names = run->result.report.class_names;
    ck.seed = run->config.seed;
    ck.epoch = run->config.epochs;
    shapmix::save_checkpoint(ck, path);
  });
}

void shapmix_run_free(shapmix_run* run) { delete run; }

int shapmix_model_load(const char* path, shapmix_model** out) {
  if (!path || !out) return fail(SHAPMIX_E_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new shapmix_model{shapmix::load_checkpoint(path)}; });
}

int shapmix_model_dims(const shapmix_model* model, shapmix_dims* out) {
  if (!model || !out) return fail(SHAPMIX_E_ARGUMENT, "null argument");
  *out = to_c(model->checkpoint.dims);
  return SHAPMIX_OK;
}

int shapmix_evaluate(const shapmix_model* model, const shapmix_dataset* test,
                     char** out_metrics_json, char** out_class_csv) {
  if (!model || !test) return fail(SHAPMIX_E_ARGUMENT, "null argument");
  return guarded([&] {
    const auto& ck = model->checkpoint;
    if (ck.dims != test->data.dims() || ck.params.classes != test->data.num_classes())
      throw shapmix::DataError("checkpoint expects dims " + ck.dims.to_string() + " with " +
                               std::to_string(ck.params.classes) + " classes, test set has dims " +
                               test->data.dims().to_string() + " with " +
                               std::to_string(test->data.num_classes()) + " classes");
    const auto m = shapmix::evaluate(ck.params, test->data, ck.train_counts);
    std::string metrics = shapmix::metrics_to_json(m);
    std::string csv = shapmix::per_class_csv(m, ck.train_counts, ck.class_names);
    if (out_metrics_json) *out_metrics_json = dup_string(metrics);
    if (out_class_csv) *out_class_csv = dup_string(csv);
  });
}

void shapmix_model_free(shapmix_model* model) { delete model; }

}  // extern "C"
