// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace stylefield {

/// Named-tensor container stored as a directory holding a plain-text manifest
/// (`manifest.txt`) and one blob of little-endian float32 values (`tensors.bin`).
///
/// Manifest layout:
///
///     stylefield-checkpoint <format version>
///     stage <stage marker>
///     config_hash <16 hex digits>
///     seed <unsigned integer>
///     tensor <name> f32 <d0,d1,...|scalar> <byte offset> <byte length> <crc32 hex>
///
/// Records keep insertion order, so load followed by save reproduces both files
/// byte for byte.
class Checkpoint {
 public:
  static constexpr int kFormatVersion = 1;
  static constexpr const char* kManifestName = "manifest.txt";
  static constexpr const char* kBlobName = "tensors.bin";

  struct Record {
    std::string name;
    std::vector<int64_t> shape;
    std::vector<float> values;
  };

  std::string stage = "none";
  uint64_t config_hash = 0;
  uint64_t seed = 0;

  /// Adds or replaces a tensor (converted to contiguous float32 on CPU).
  void put(const std::string& name, const torch::Tensor& tensor);
  bool contains(const std::string& name) const;
  /// Returns a float32 tensor that owns a copy of the stored values.
  torch::Tensor get(const std::string& name) const;
  const Record& record(const std::string& name) const;
  const std::vector<Record>& records() const { return records_; }
  std::vector<std::string> names_with_prefix(const std::string& prefix) const;
  void erase_prefix(const std::string& prefix);

  void save(const std::filesystem::path& dir) const;
  static Checkpoint load(const std::filesystem::path& dir);

 private:
  std::vector<Record> records_;
};

/// CRC-32 (IEEE) of a byte range.
uint32_t checksum(const void* data, std::size_t size);

/// Names of tensors whose values differ between two checkpoints (including
/// tensors present in only one of them).
std::vector<std::string> diff_tensors(const Checkpoint& a, const Checkpoint& b);

}  // namespace stylefield
