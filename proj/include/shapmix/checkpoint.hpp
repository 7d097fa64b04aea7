#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shapmix/classifier.hpp"
#include "shapmix/skeleton.hpp"

namespace shapmix {

// Binary layout: 8-byte magic "SHAPMIX\x01", uint64 little-endian header
// length, JSON header, then float32 little-endian payloads w1, b1, w2, b2.
struct Checkpoint {
  ModelParams params;
  Dims dims;
  LossConfig loss;
  std::vector<int> train_counts;
  std::vector<std::string> class_names;
  std::uint64_t seed = 0;
  int epoch = 0;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace shapmix
