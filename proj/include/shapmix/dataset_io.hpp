#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "shapmix/dataset.hpp"

namespace shapmix {

inline constexpr int kDatasetFormatVersion = 1;

// Writes `dir/manifest.json` plus one little-endian float32 file per sample
// under `dir/samples/`. Creates `dir` if needed.
void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir);

// Reads a dataset directory. Unknown manifest fields are skipped and reported
// through `warnings` when given. Throws ParseError (malformed_manifest,
// dim_mismatch, truncated_payload) or IoError.
LabeledDataset load_dataset(const std::filesystem::path& dir,
                            std::vector<std::string>* warnings = nullptr);

// Lower-case hex SHA-256 of manifest.json followed by every payload file in
// manifest order.
std::string dataset_content_hash(const std::filesystem::path& dir);

std::string sha256_hex(std::string_view bytes);

}  // namespace shapmix
