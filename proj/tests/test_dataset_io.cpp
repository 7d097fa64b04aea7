#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "shapmix/dataset_io.hpp"
#include "shapmix/errors.hpp"

using namespace shapmix;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "shapmix_tests" / name;
  fs::remove_all(dir);
  return dir;
}

LabeledDataset small_dataset() {
  SyntheticConfig cfg;
  cfg.num_classes = 3;
  cfg.per_class = 2;
  cfg.dims = {3, 5, 25, 2};
  cfg.seed = 4;
  return generate_synthetic_dataset(cfg, default_partition(25));
}

nlohmann::json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  return nlohmann::json::parse(in);
}

void write_manifest(const fs::path& dir, const nlohmann::json& j) {
  std::ofstream out(dir / "manifest.json");
  out << j.dump(2);
}

ParseErrorKind parse_kind(const fs::path& dir) {
  try {
    (void)load_dataset(dir);
  } catch (const ParseError& e) {
    return e.which();
  }
  FAIL("expected a parse error");
  return ParseErrorKind::malformed_partition;
}

}  // namespace

TEST_CASE("dataset round trip is lossless") {
  const auto ds = small_dataset();
  const auto dir = fresh_dir("roundtrip");
  save_dataset(ds, dir);
  std::vector<std::string> warnings;
  const auto back = load_dataset(dir, &warnings);
  CHECK(warnings.empty());
  CHECK(back == ds);
  CHECK(back.class_names() == ds.class_names());
  CHECK(back.ground_truth_parts() == ds.ground_truth_parts());
}

TEST_CASE("content hash tracks bytes") {
  const auto ds = small_dataset();
  const auto a = fresh_dir("hash_a"), b = fresh_dir("hash_b");
  save_dataset(ds, a);
  save_dataset(ds, b);
  const auto h = dataset_content_hash(a);
  CHECK(h.size() == 64);
  CHECK(h == dataset_content_hash(b));
  {
    std::fstream f(b / "samples" / "000001.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(3);
    f.put('\x7f');
  }
  CHECK(h != dataset_content_hash(b));
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("unknown manifest fields only warn") {
  const auto dir = fresh_dir("unknown");
  save_dataset(small_dataset(), dir);
  auto j = read_manifest(dir);
  j["recorded_by"] = "camera rig 2";
  write_manifest(dir, j);
  std::vector<std::string> warnings;
  const auto back = load_dataset(dir, &warnings);
  CHECK(back.size() == 6);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("recorded_by") != std::string::npos);
}

TEST_CASE("distinct parse errors") {
  const auto ds = small_dataset();

  const auto trunc = fresh_dir("truncated");
  save_dataset(ds, trunc);
  fs::resize_file(trunc / "samples" / "000002.bin", 40);
  CHECK(parse_kind(trunc) == ParseErrorKind::truncated_payload);

  const auto dims = fresh_dir("dims");
  save_dataset(ds, dims);
  auto j = read_manifest(dims);
  j["T"] = 4;
  write_manifest(dims, j);
  CHECK(parse_kind(dims) == ParseErrorKind::dim_mismatch);

  const auto bad = fresh_dir("malformed");
  save_dataset(ds, bad);
  {
    std::ofstream out(bad / "manifest.json");
    out << "{ not json";
  }
  CHECK(parse_kind(bad) == ParseErrorKind::malformed_manifest);

  const auto label = fresh_dir("label");
  save_dataset(ds, label);
  j = read_manifest(label);
  j["samples"][0]["label"] = 9;
  write_manifest(label, j);
  CHECK(parse_kind(label) == ParseErrorKind::malformed_manifest);

  CHECK_THROWS_AS(load_dataset(fresh_dir("absent")), Error);
}
