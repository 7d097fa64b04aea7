#include "shapmix/dataset_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

#include "shapmix/errors.hpp"

namespace shapmix {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

std::string encode_floats(std::span<const float> values) {
  std::string bytes(values.size() * 4, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b)
      bytes[i * 4 + static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xffu);
  }
  return bytes;
}

std::vector<float> decode_floats(std::string_view bytes) {
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b)
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + static_cast<std::size_t>(b)]))
              << (8 * b);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

[[noreturn]] void malformed(const std::string& what) {
  throw ParseError(ParseErrorKind::malformed_manifest, "manifest: " + what);
}

int positive_int(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number_integer()) malformed(std::string("missing integer field '") + key + "'");
  const int v = doc[key].get<int>();
  if (v <= 0) malformed(std::string("field '") + key + "' must be positive");
  return v;
}

const std::set<std::string> kKnownFields = {
    "version", "C", "T", "V", "M", "num_classes", "class_names", "samples",
    "ground_truth_parts"};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw IoError("SHA-256 computation failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

void save_dataset(const LabeledDataset& dataset, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "samples", ec);
  if (ec) throw IoError("cannot create " + (dir / "samples").string() + ": " + ec.message());

  const Dims d = dataset.dims();
  json manifest;
  manifest["version"] = kDatasetFormatVersion;
  manifest["C"] = d.channels;
  manifest["T"] = d.frames;
  manifest["V"] = d.joints;
  manifest["M"] = d.performers;
  manifest["num_classes"] = dataset.num_classes();
  json names = json::array();
  for (int c = 0; c < dataset.num_classes(); ++c) names.push_back(dataset.class_name(c));
  manifest["class_names"] = names;
  json samples = json::array();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    std::ostringstream name;
    name << "samples/" << std::setw(6) << std::setfill('0') << i << ".bin";
    write_file(dir / name.str(), encode_floats(dataset[i].sequence.data()));
    samples.push_back({{"file", name.str()}, {"label", dataset[i].label}});
  }
  manifest["samples"] = samples;
  if (!dataset.ground_truth_parts().empty()) {
    json gt = json::array();
    for (PartMask m : dataset.ground_truth_parts()) gt.push_back(m.key());
    manifest["ground_truth_parts"] = gt;
  }
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

LabeledDataset load_dataset(const fs::path& dir, std::vector<std::string>* warnings) {
  const std::string text = read_file(dir / "manifest.json");
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    malformed(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) malformed("top level must be an object");

  for (const auto& [key, _] : doc.items())
    if (!kKnownFields.count(key) && warnings)
      warnings->push_back("manifest field '" + key + "' is not recognised and was ignored");

  if (!doc.contains("version") || !doc["version"].is_number_integer())
    malformed("missing integer field 'version'");
  if (doc["version"].get<int>() > kDatasetFormatVersion)
    malformed("unsupported version " + std::to_string(doc["version"].get<int>()));
  const Dims d{positive_int(doc, "C"), positive_int(doc, "T"), positive_int(doc, "V"),
               positive_int(doc, "M")};
  const int K = positive_int(doc, "num_classes");

  std::vector<std::string> names;
  if (doc.contains("class_names")) {
    if (!doc["class_names"].is_array()) malformed("'class_names' must be a list");
    for (const auto& n : doc["class_names"]) {
      if (!n.is_string()) malformed("class names must be strings");
      names.push_back(n.get<std::string>());
    }
  }
  std::vector<PartMask> truth;
  if (doc.contains("ground_truth_parts")) {
    if (!doc["ground_truth_parts"].is_array()) malformed("'ground_truth_parts' must be a list");
    for (const auto& g : doc["ground_truth_parts"]) {
      if (!g.is_string()) malformed("ground-truth entries must be strings");
      try {
        truth.push_back(part_mask_from_key(g.get<std::string>()));
      } catch (const ConfigError& e) {
        malformed(e.what());
      }
    }
  }

  if (!doc.contains("samples") || !doc["samples"].is_array()) malformed("missing 'samples' list");
  std::vector<Sample> samples;
  samples.reserve(doc["samples"].size());
  const std::size_t want_bytes = d.size() * 4;
  for (const auto& entry : doc["samples"]) {
    if (!entry.is_object() || !entry.contains("file") || !entry["file"].is_string() ||
        !entry.contains("label") || !entry["label"].is_number_integer())
      malformed("each sample needs string 'file' and integer 'label'");
    const std::string file = entry["file"].get<std::string>();
    const std::string bytes = read_file(dir / file);
    if (bytes.size() < want_bytes)
      throw ParseError(ParseErrorKind::truncated_payload,
                       file + ": " + std::to_string(bytes.size()) + " bytes, dims " +
                           d.to_string() + " need " + std::to_string(want_bytes));
    if (bytes.size() != want_bytes)
      throw ParseError(ParseErrorKind::dim_mismatch,
                       file + ": " + std::to_string(bytes.size()) +
                           " bytes does not match dims " + d.to_string());
    const int label = entry["label"].get<int>();
    if (label < 0 || label >= K) malformed(file + ": label outside [0, num_classes)");
    samples.push_back({SkeletonSequence(d, decode_floats(bytes)), label});
  }
  try {
    return LabeledDataset(d, K, std::move(samples), std::move(names), std::move(truth));
  } catch (const DataError& e) {
    malformed(e.what());
  }
}

std::string dataset_content_hash(const fs::path& dir) {
  const std::string manifest = read_file(dir / "manifest.json");
  json doc;
  try {
    doc = json::parse(manifest);
  } catch (const json::exception& e) {
    malformed(std::string("not valid JSON: ") + e.what());
  }
  std::string all = manifest;
  if (doc.contains("samples") && doc["samples"].is_array())
    for (const auto& entry : doc["samples"])
      if (entry.contains("file") && entry["file"].is_string())
        all += read_file(dir / entry["file"].get<std::string>());
  return sha256_hex(all);
}

}  // namespace shapmix
