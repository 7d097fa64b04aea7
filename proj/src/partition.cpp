#include "shapmix/partition.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "shapmix/errors.hpp"

namespace shapmix {
namespace {

constexpr std::array<std::string_view, kNumParts> kPartNames = {
    "trunk", "left_arm", "right_arm", "left_leg", "right_leg"};

}  // namespace

std::string_view part_name(Part p) { return kPartNames[static_cast<std::size_t>(p)]; }

Part part_from_name(std::string_view name) {
  for (int i = 0; i < kNumParts; ++i)
    if (kPartNames[static_cast<std::size_t>(i)] == name) return static_cast<Part>(i);
  throw ConfigError("unknown body part '" + std::string(name) + "'");
}

int PartMask::size() const { return std::popcount(static_cast<unsigned>(bits_)); }

std::vector<Part> PartMask::parts() const {
  std::vector<Part> out;
  for (int i = 0; i < kNumParts; ++i)
    if (contains(static_cast<Part>(i))) out.push_back(static_cast<Part>(i));
  return out;
}

std::string PartMask::key() const {
  std::vector<std::string_view> names;
  for (Part p : parts()) names.push_back(part_name(p));
  std::sort(names.begin(), names.end());
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += '+';
    out += names[i];
  }
  return out;
}

PartMask part_mask_from_key(std::string_view key) {
  PartMask mask;
  std::size_t pos = 0;
  while (pos < key.size()) {
    std::size_t end = key.find('+', pos);
    if (end == std::string_view::npos) end = key.size();
    mask = mask | PartMask::of(part_from_name(key.substr(pos, end - pos)));
    pos = end + 1;
  }
  return mask;
}

PartPartition::PartPartition(int num_joints,
                             std::array<std::vector<int>, kNumParts> parts)
    : num_joints_(num_joints), parts_(std::move(parts)) {
  if (num_joints <= 0) throw ConfigError("partition needs a positive joint count");
  std::vector<int> seen(static_cast<std::size_t>(num_joints), -1);
  owner_.assign(static_cast<std::size_t>(num_joints), Part::trunk);
  for (int p = 0; p < kNumParts; ++p) {
    auto& js = parts_[static_cast<std::size_t>(p)];
    if (js.empty())
      throw ConfigError("body part '" + std::string(kPartNames[p]) + "' has no joints");
    std::sort(js.begin(), js.end());
    for (int v : js) {
      if (v < 0 || v >= num_joints)
        throw ConfigError("joint " + std::to_string(v) + " outside [0, " +
                          std::to_string(num_joints) + ")");
      auto& s = seen[static_cast<std::size_t>(v)];
      if (s >= 0)
        throw ConfigError("joint " + std::to_string(v) + " assigned to both '" +
                          std::string(kPartNames[s]) + "' and '" +
                          std::string(kPartNames[p]) + "'");
      s = p;
      owner_[static_cast<std::size_t>(v)] = static_cast<Part>(p);
    }
  }
  for (int v = 0; v < num_joints; ++v)
    if (seen[static_cast<std::size_t>(v)] < 0)
      throw ConfigError("joint " + std::to_string(v) + " not assigned to any part");
}

std::vector<int> PartPartition::joints_of(PartMask mask) const {
  std::vector<int> out;
  for (Part p : mask.parts()) {
    const auto& js = joints(p);
    out.insert(out.end(), js.begin(), js.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int PartPartition::joint_count(PartMask mask) const {
  int n = 0;
  for (Part p : mask.parts()) n += static_cast<int>(joints(p).size());
  return n;
}

PartPartition default_partition(int num_joints) {
  if (num_joints != 25)
    throw ConfigError("no built-in body-part map for " + std::to_string(num_joints) +
                          " joints; supply a partition file",
                      "partition");
  return PartPartition(25, {{
                               {0, 1, 2, 3, 20},
                               {4, 5, 6, 7, 21, 22},
                               {8, 9, 10, 11, 23, 24},
                               {12, 13, 14, 15},
                               {16, 17, 18, 19},
                           }});
}

PartPartition parse_partition(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseErrorKind::malformed_partition,
                     std::string("partition file is not valid JSON: ") + e.what());
  }
  if (!doc.is_array() || doc.size() != kNumParts)
    throw ParseError(ParseErrorKind::malformed_partition,
                     "partition file must be a list of 5 {name, joints} objects");
  std::array<std::vector<int>, kNumParts> parts;
  std::array<bool, kNumParts> filled{};
  int max_joint = -1;
  for (const auto& entry : doc) {
    if (!entry.is_object() || !entry.contains("name") || !entry.contains("joints") ||
        !entry["name"].is_string() || !entry["joints"].is_array())
      throw ParseError(ParseErrorKind::malformed_partition,
                       "partition entry needs string 'name' and list 'joints'");
    const Part p = part_from_name(entry["name"].get<std::string>());
    auto idx = static_cast<std::size_t>(p);
    if (filled[idx])
      throw ParseError(ParseErrorKind::malformed_partition,
                       "duplicate part '" + std::string(part_name(p)) + "'");
    filled[idx] = true;
    for (const auto& j : entry["joints"]) {
      if (!j.is_number_integer())
        throw ParseError(ParseErrorKind::malformed_partition, "joint indices must be integers");
      parts[idx].push_back(j.get<int>());
      max_joint = std::max(max_joint, j.get<int>());
    }
  }
  return PartPartition(max_joint + 1, std::move(parts));
}

PartPartition load_partition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open partition file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_partition(buf.str());
}

}  // namespace shapmix
