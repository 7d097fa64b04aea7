// shapmix command line: gen-data, train, eval.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shapmix/shapmix.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// Configuration keys and the flags that set them.
const std::map<std::string, std::string> kFlagOf = {
    {"mode", "--mode"},         {"loss", "--loss"},
    {"epochs", "--epochs"},     {"warmup", "--warmup"},
    {"tau", "--tau"},           {"ema", "--ema"},
    {"mixup_prob", "--mixup-prob"}, {"spatial", "--spatial"},
    {"temporal", "--temporal"}, {"estimate_every", "--estimate-every"},
    {"batch", "--batch"},       {"seed", "--seed"},
    {"lr", "--lr"},             {"hidden", "--hidden"},
    {"partition", "--partition"}, {"classes", "--classes"},
    {"per_class", "--per-class"}, {"dims", "--dims"},
    {"noise", "--noise"},       {"jitter", "--jitter"},
    {"imbalance_factor", "--imbalance-factor"}, {"max_per_class", "--max-per-class"},
};

struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(int status) {
  switch (status) {
    case SHAPMIX_OK: return kExitOk;
    case SHAPMIX_E_ARGUMENT:
    case SHAPMIX_E_CONFIG: return kExitUsage;
    case SHAPMIX_E_DATA:
    case SHAPMIX_E_IO:
    case SHAPMIX_E_PARSE: return kExitData;
    case SHAPMIX_E_NUMERIC: return kExitNumeric;
    default: return kExitInternal;
  }
}

// Throws a Failure carrying the library's message when `status` is an error.
void check(int status, const std::string& context) {
  if (status == SHAPMIX_OK) return;
  std::string msg = context + ": " + shapmix_last_error();
  const std::string field = shapmix_last_error_field();
  if (!field.empty()) {
    const auto it = kFlagOf.find(field);
    msg += it != kFlagOf.end() ? " (flag " + it->second + ")" : " (config key '" + field + "')";
  }
  throw Failure{exit_code_for(status), msg};
}

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{kExitUsage, msg}; }

std::string take(char* s) {
  std::string out = s ? s : "";
  shapmix_string_free(s);
  return out;
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
};
using Dataset = Handle<shapmix_dataset, shapmix_dataset_free>;
using Run = Handle<shapmix_run, shapmix_run_free>;
using Model = Handle<shapmix_model, shapmix_model_free>;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Failure{kExitData, "cannot read " + p.string()};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write-then-rename so readers never observe a half-written file.
void write_file(const fs::path& p, const std::string& content) {
  const fs::path tmp = p.string() + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Failure{kExitData, "cannot write " + p.string()};
    out << content;
    if (!out.flush()) throw Failure{kExitData, "cannot write " + p.string()};
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Failure{kExitData, "cannot write " + p.string()};
  }
}

std::vector<double> split_numbers(const std::string& text, const std::string& flag,
                                  std::size_t expected) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      usage_error(flag + " expects comma-separated numbers, got '" + text + "'");
    }
  }
  if (out.size() != expected)
    usage_error(flag + " expects " + std::to_string(expected) + " comma-separated values");
  return out;
}

std::string format_metric(const ordered_json& m, const char* key) {
  if (!m.contains(key) || m[key].is_null()) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", m[key].get<double>());
  return buf;
}

void print_metrics(const ordered_json& m) {
  std::cout << "overall " << format_metric(m, "overall") << "  many " << format_metric(m, "many")
            << "  medium " << format_metric(m, "medium") << "  few " << format_metric(m, "few")
            << "\n";
}

std::string dataset_hash(const fs::path& dir) {
  char* hex = nullptr;
  check(shapmix_dataset_content_hash(dir.string().c_str(), &hex), "hashing " + dir.string());
  return take(hex);
}

void load_dataset(const fs::path& dir, Dataset& ds) {
  check(shapmix_dataset_load(dir.string().c_str(), &ds.ptr), "loading " + dir.string());
  for (std::size_t i = 0; i < shapmix_dataset_warning_count(ds.ptr); ++i)
    std::cerr << "warning: " << dir.string() << ": " << shapmix_dataset_warning(ds.ptr, i) << "\n";
}

// ---------------------------------------------------------------- gen-data

struct GenOptions {
  int classes = 10;
  int per_class = 200;
  std::string dims = "3,64,25,1";
  std::uint64_t seed = 0;
  std::string out;
  std::optional<double> imbalance_factor;
  std::optional<int> max_per_class;
  std::optional<int> test_per_class;
  std::optional<double> noise;
  std::optional<double> jitter;
  std::string partition;
  bool force = false;
};

void save_new_dir(const shapmix_dataset* ds, const fs::path& dir) {
  const fs::path tmp = dir.string() + ".partial";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  check(shapmix_dataset_save(ds, tmp.string().c_str()), "writing " + dir.string());
  fs::remove_all(dir, ec);
  fs::rename(tmp, dir, ec);
  if (ec) throw Failure{kExitData, "cannot move dataset into " + dir.string()};
}

void describe(const shapmix_dataset* ds, const fs::path& dir) {
  const int K = shapmix_dataset_num_classes(ds);
  std::vector<int32_t> counts(static_cast<std::size_t>(K));
  shapmix_dataset_class_counts(ds, counts.data(), counts.size());
  std::cout << dir.string() << ": " << shapmix_dataset_size(ds) << " samples, counts";
  for (int n : counts) std::cout << " " << n;
  std::cout << "\n";
}

int cmd_gen_data(const GenOptions& o) {
  const auto d = split_numbers(o.dims, "--dims", 4);
  if (o.imbalance_factor.has_value() != o.max_per_class.has_value())
    usage_error("--imbalance-factor and --max-per-class must be given together");
  const fs::path out = o.out;
  if (fs::exists(out) && !fs::is_empty(out) && !o.force)
    usage_error("output " + out.string() + " exists and is not empty (use --force)");

  ordered_json gen;
  gen["classes"] = o.classes;
  gen["per_class"] = o.per_class;
  gen["dims"] = {static_cast<int>(d[0]), static_cast<int>(d[1]), static_cast<int>(d[2]),
                 static_cast<int>(d[3])};
  gen["seed"] = o.seed;
  if (o.noise) gen["noise"] = *o.noise;
  if (o.jitter) gen["jitter"] = *o.jitter;
  if (!o.partition.empty()) gen["partition"] = o.partition;

  if (!o.imbalance_factor) {
    Dataset ds;
    check(shapmix_dataset_generate(gen.dump().c_str(), &ds.ptr), "generating dataset");
    save_new_dir(ds.ptr, out);
    describe(ds.ptr, out);
    return kExitOk;
  }

  // Long-tailed training split drawn from a pool large enough for the head
  // class, plus a balanced test split generated independently.
  gen["per_class"] = std::max(o.per_class, *o.max_per_class);
  gen["split"] = 0;
  Dataset pool, train, test;
  check(shapmix_dataset_generate(gen.dump().c_str(), &pool.ptr), "generating dataset");
  check(shapmix_dataset_pareto_subsample(pool.ptr, *o.imbalance_factor, *o.max_per_class, o.seed,
                                         &train.ptr),
        "building long-tailed split");
  gen["per_class"] = o.test_per_class.value_or(o.per_class);
  gen["split"] = 1;
  check(shapmix_dataset_generate(gen.dump().c_str(), &test.ptr), "generating test split");

  const fs::path tmp = out.string() + ".partial";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp);
  check(shapmix_dataset_save(train.ptr, (tmp / "train").string().c_str()), "writing train split");
  check(shapmix_dataset_save(test.ptr, (tmp / "test").string().c_str()), "writing test split");
  fs::remove_all(out, ec);
  fs::rename(tmp, out, ec);
  if (ec) throw Failure{kExitData, "cannot move dataset into " + out.string()};
  describe(train.ptr, out / "train");
  describe(test.ptr, out / "test");
  return kExitOk;
}

// ------------------------------------------------------------------- train

struct TrainFlags {
  std::string data, test, out, config, from_manifest;
  std::map<std::string, std::string> strings;  // mode, loss, partition
  std::map<std::string, double> numbers;
  std::string spatial, temporal;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t top_k = 0;
};

int cmd_train(TrainFlags f) {
  ordered_json cfg = ordered_json::object();
  if (!f.from_manifest.empty()) {
    ordered_json m;
    try {
      m = ordered_json::parse(read_file(f.from_manifest));
    } catch (const nlohmann::json::exception&) {
      throw Failure{kExitData, "run manifest " + f.from_manifest + " is not valid JSON"};
    }
    if (!m.contains("config") || !m.contains("dataset"))
      throw Failure{kExitData, "run manifest " + f.from_manifest + " lacks config or dataset"};
    cfg = m["config"];
    if (f.data.empty()) f.data = m["dataset"]["path"].get<std::string>();
    if (f.test.empty() && m.contains("test") && !m["test"].is_null())
      f.test = m["test"]["path"].get<std::string>();
    const std::string want = m["dataset"]["sha256"].get<std::string>();
    if (dataset_hash(f.data) != want)
      throw Failure{kExitData, "dataset " + f.data + " does not match the manifest hash"};
  } else if (!f.config.empty()) {
    try {
      cfg = ordered_json::parse(read_file(f.config));
    } catch (const nlohmann::json::exception&) {
      usage_error("config file " + f.config + " is not valid JSON");
    }
    if (!cfg.is_object()) usage_error("config file " + f.config + " must hold a JSON object");
  }
  if (f.data.empty()) usage_error("--data is required");
  if (f.out.empty()) usage_error("--out is required");

  for (const auto& [k, v] : f.strings) cfg[k] = v;
  for (const auto& [k, v] : f.numbers) cfg[k] = v;
  if (f.seed_given) cfg["seed"] = f.seed;
  if (!f.spatial.empty()) {
    const auto s = split_numbers(f.spatial, "--spatial", 2);
    cfg["spatial"] = {static_cast<int>(s[0]), static_cast<int>(s[1])};
  }
  if (!f.temporal.empty()) {
    const auto t = split_numbers(f.temporal, "--temporal", 2);
    cfg["temporal"] = {t[0], t[1]};
  }
  // Integer-valued keys must not be serialised as doubles.
  for (const char* k : {"epochs", "warmup", "estimate_every", "batch", "hidden"})
    if (cfg.contains(k) && cfg[k].is_number_float()) {
      const double v = cfg[k].get<double>();
      if (v != static_cast<double>(static_cast<long long>(v)))
        usage_error(kFlagOf.at(k) + " expects an integer");
      cfg[k] = static_cast<long long>(v);
    }

  char* resolved_raw = nullptr;
  check(shapmix_config_resolve(cfg.dump().c_str(), &resolved_raw), "invalid configuration");
  const std::string resolved = take(resolved_raw);

  Dataset train, test;
  load_dataset(f.data, train);
  if (!f.test.empty()) load_dataset(f.test, test);

  const fs::path out = f.out;
  fs::create_directories(out);
  const ordered_json rc = ordered_json::parse(resolved);
  const bool saliency = rc["mode"] == "shap-mix";

  ordered_json manifest;
  manifest["tool"] = "shapmix";
  manifest["version"] = shapmix_version();
  manifest["seed"] = rc["seed"];
  manifest["config"] = rc;
  manifest["dataset"] = {{"path", fs::absolute(f.data).lexically_normal().string()},
                         {"sha256", dataset_hash(f.data)}};
  if (!f.test.empty())
    manifest["test"] = {{"path", fs::absolute(f.test).lexically_normal().string()},
                        {"sha256", dataset_hash(f.test)}};
  else
    manifest["test"] = nullptr;
  ordered_json outputs = {{"checkpoint", "model.ckpt"},
                          {"report", "report.json"},
                          {"per_class", "per_class.csv"},
                          {"timings", "timings.json"}};
  if (saliency) outputs["saliency"] = "saliency.json";
  manifest["outputs"] = outputs;
  write_file(out / "run_manifest.json", manifest.dump(2) + "\n");

  Run run;
  check(shapmix_train(train.ptr, test.ptr, resolved.c_str(), &run.ptr), "training failed");

  char* s = nullptr;
  check(shapmix_run_report_json(run.ptr, &s), "building report");
  const std::string report = take(s);
  check(shapmix_run_class_csv(run.ptr, &s), "building per-class table");
  const std::string csv = take(s);
  check(shapmix_run_timings_json(run.ptr, &s), "building timings");
  const std::string timings = take(s);
  std::string sal;
  if (saliency) {
    check(shapmix_run_saliency_json(run.ptr, f.top_k, &s), "exporting saliency");
    sal = take(s);
  }

  const fs::path ckpt_tmp = out / "model.ckpt.partial";
  check(shapmix_run_save_checkpoint(run.ptr, ckpt_tmp.string().c_str()), "saving checkpoint");
  std::error_code ec;
  fs::rename(ckpt_tmp, out / "model.ckpt", ec);
  if (ec) throw Failure{kExitData, "cannot write checkpoint in " + out.string()};
  write_file(out / "report.json", report);
  write_file(out / "per_class.csv", csv);
  write_file(out / "timings.json", timings);
  if (saliency) write_file(out / "saliency.json", sal);

  const auto rep = ordered_json::parse(report);
  print_metrics(rep["final"]);
  return kExitOk;
}

// -------------------------------------------------------------------- eval

int cmd_eval(const std::string& checkpoint, const std::string& data, const std::string& out) {
  if (!fs::is_regular_file(checkpoint))
    throw Failure{kExitData, "checkpoint " + checkpoint + " does not exist"};
  Model model;
  check(shapmix_model_load(checkpoint.c_str(), &model.ptr), "loading " + checkpoint);
  Dataset test;
  load_dataset(data, test);
  char* metrics = nullptr;
  char* csv = nullptr;
  check(shapmix_evaluate(model.ptr, test.ptr, &metrics, &csv), "evaluation failed");
  const std::string m = take(metrics);
  const std::string c = take(csv);
  if (!out.empty()) {
    fs::create_directories(out);
    write_file(fs::path(out) / "metrics.json", m);
    write_file(fs::path(out) / "per_class.csv", c);
  }
  print_metrics(ordered_json::parse(m));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shapley-guided skeleton mixing for long-tailed action recognition"};
  app.set_version_flag("--version", std::string(shapmix_version()));
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen-data", "Generate a synthetic skeleton dataset");
  g->add_option("--classes", gen.classes, "Number of classes")->capture_default_str();
  g->add_option("--per-class", gen.per_class, "Samples per class")->capture_default_str();
  g->add_option("--dims", gen.dims, "C,T,V,M")->capture_default_str();
  g->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--imbalance-factor", gen.imbalance_factor, "Head/tail count ratio");
  g->add_option("--max-per-class", gen.max_per_class, "Head class count");
  g->add_option("--test-per-class", gen.test_per_class, "Balanced test samples per class");
  g->add_option("--noise", gen.noise, "Coordinate noise std");
  g->add_option("--jitter", gen.jitter, "Nuisance variation scale");
  g->add_option("--partition", gen.partition, "Part map JSON file");
  g->add_flag("--force", gen.force, "Replace an existing output directory");

  TrainFlags tf;
  std::string mode, loss, partition;
  double epochs = 0, warmup = 0, tau = 0, ema = 0, mixup = 0, every = 0, batch = 0, lr = 0,
         hidden = 0;
  auto* t = app.add_subcommand("train", "Train a classifier");
  t->add_option("--data", tf.data, "Training dataset directory");
  t->add_option("--test", tf.test, "Evaluation dataset directory");
  t->add_option("--out", tf.out, "Run output directory");
  t->add_option("--config", tf.config, "JSON config file (flags take precedence)");
  t->add_option("--from-manifest", tf.from_manifest, "Re-run from a run_manifest.json");
  auto* o_mode = t->add_option("--mode", mode, "baseline | st-mix | shap-mix");
  auto* o_loss = t->add_option("--loss", loss, "ce | balanced-softmax");
  auto* o_part = t->add_option("--partition", partition, "Part map JSON file");
  std::vector<std::pair<CLI::Option*, std::pair<std::string, double*>>> nums = {
      {t->add_option("--epochs", epochs, "Epochs (100)"), {"epochs", &epochs}},
      {t->add_option("--warmup", warmup, "Warm-up epochs (5)"), {"warmup", &warmup}},
      {t->add_option("--tau", tau, "Importance temperature (0.2)"), {"tau", &tau}},
      {t->add_option("--ema", ema, "Saliency EMA momentum (0.9)"), {"ema", &ema}},
      {t->add_option("--mixup-prob", mixup, "Mixup branch probability (0.5)"), {"mixup_prob", &mixup}},
      {t->add_option("--estimate-every", every, "Iterations between saliency passes (1)"),
       {"estimate_every", &every}},
      {t->add_option("--batch", batch, "Batch size (64)"), {"batch", &batch}},
      {t->add_option("--lr", lr, "Base learning rate (0.05)"), {"lr", &lr}},
      {t->add_option("--hidden", hidden, "Hidden units (64)"), {"hidden", &hidden}},
  };
  t->add_option("--spatial", tf.spatial, "Part count bounds, e.g. 2,3");
  t->add_option("--temporal", tf.temporal, "Temporal ratio bounds, e.g. 0.4,0.7");
  auto* o_seed = t->add_option("--seed", tf.seed, "Master seed");
  t->add_option("--top-k", tf.top_k, "Coalitions per class in saliency.json (0 = all)");

  std::string ckpt, eval_data, eval_out;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint");
  e->add_option("--checkpoint", ckpt, "Checkpoint file")->required();
  e->add_option("--data", eval_data, "Test dataset directory")->required();
  e->add_option("--out", eval_out, "Directory for metrics.json and per_class.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*g) return cmd_gen_data(gen);
    if (*t) {
      if (o_mode->count()) tf.strings["mode"] = mode;
      if (o_loss->count()) tf.strings["loss"] = loss;
      if (o_part->count()) tf.strings["partition"] = partition;
      for (const auto& [opt, kv] : nums)
        if (opt->count()) tf.numbers[kv.first] = *kv.second;
      tf.seed_given = o_seed->count() > 0;
      return cmd_train(tf);
    }
    if (*e) return cmd_eval(ckpt, eval_data, eval_out);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.exit_code;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitData;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
