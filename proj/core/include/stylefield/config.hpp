// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stylefield {

/// Run configuration read from "key = value" text files. Lines starting with
/// '#' are comments; unknown keys are rejected. Every field below is a key of
/// the same name and its initializer is the documented default.
struct RunConfig {
  uint64_t seed = 0;
  int workers = 1;

  // Base field.
  int64_t grid_resolution = 32;
  int64_t grid_rank = 4;
  int64_t basic_dim = 48;
  double scene_extent = 1.0;  ///< scene bounds are [-extent, extent]^3

  // Encoder: empty path selects the seeded tiny random encoder (8/16/32 channels).
  std::string encoder_weights;
  uint64_t encoder_seed = 7;
  bool encoder_resize = false;  ///< resize non-multiple-of-4 inputs instead of failing

  // Architecture.
  int adaptor_depth = 2;
  int generator_convs = 3;
  int se_reduction = 4;
  int decoder_convs_per_stage = 2;
  std::string variant = "multi_level+dsi";

  // Rendering.
  int samples_per_ray = 32;
  int64_t chunk_rays = 4096;
  double weight_epsilon = 1e-6;

  // Stage0: photometric pre-training of the base field.
  int stage0_iterations = 600;
  double stage0_lr = 0.02;
  double stage0_density_lr = 2.0;
  int64_t stage0_batch_rays = 2048;

  // Stage1: multi-level grid reconstruction.
  int stage1_iterations = 500;
  double stage1_lr = 1e-3;

  // Stage2: stylization.
  int stage2_iterations = 1000;
  double stage2_lr = 1e-3;
  double stage2_decoder_lr = 1e-5;
  double style_weight = 30.0;  ///< lambda in L_cs = L_c + lambda * L_s

  std::string views;
  std::string style_corpus;

  /// Applies one key/value pair; throws ConfigError naming the key when it is
  /// unknown or the value does not parse.
  void set(const std::string& key, const std::string& value);
  /// Canonical "key = value" rendering of every field, in declaration order.
  std::string to_text() const;
  /// FNV-1a hash of to_text().
  uint64_t hash() const;

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  static std::vector<std::string> keys();
};

}  // namespace stylefield
