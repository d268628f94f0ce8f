// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <torch/torch.h>

namespace stylefield {

/// Feature level, ordered from fine (low) to coarse (high).
enum class Level : int { Low = 0, Mid = 1, High = 2 };

inline constexpr std::array<Level, 3> kAllLevels{Level::Low, Level::Mid, Level::High};

std::string_view level_name(Level level);
Level parse_level(std::string_view name);
/// Encoder activation that feeds each level ("relu1_1", "relu2_1", "relu3_1").
std::string_view level_tap(Level level);

inline constexpr std::size_t index_of(Level level) { return static_cast<std::size_t>(level); }

/// Fixed-size container indexed by Level.
template <class T>
struct PerLevel {
  std::array<T, 3> values{};

  T& operator[](Level level) { return values[index_of(level)]; }
  const T& operator[](Level level) const { return values[index_of(level)]; }
  bool operator==(const PerLevel&) const = default;
};

using LevelChannels = PerLevel<int64_t>;

inline LevelChannels vgg_channels() { return {{64, 128, 256}}; }
inline LevelChannels tiny_channels() { return {{8, 16, 32}}; }

struct LevelSpec {
  Level level = Level::Low;
  int64_t channels = 0;
  std::string tap;
};

LevelSpec level_spec(Level level, const LevelChannels& channels);

/// Training stage. Stage0 pre-trains the base field; Stage1 reconstructs the
/// multi-level grid; Stage2 trains stylization.
enum class Stage : int { Stage0 = 0, Stage1 = 1, Stage2 = 2 };

std::string_view stage_name(Stage stage);
Stage parse_stage(std::string_view name);

/// Per-view feature maps rendered from the field. Every map is [C_l, H, W];
/// `opacity` is the accumulated compositing weight per pixel, [H, W].
struct LevelFeatureMaps {
  PerLevel<torch::Tensor> maps;
  torch::Tensor opacity;
  int view = -1;

  int64_t height() const;
  int64_t width() const;
  torch::Tensor& operator[](Level level) { return maps[level]; }
  const torch::Tensor& operator[](Level level) const { return maps[level]; }
};

/// Encoder activations at native resolution: low [C,H,W], mid [C,H/2,W/2], high [C,H/4,W/4].
struct StyleFeatures {
  PerLevel<torch::Tensor> maps;

  torch::Tensor& operator[](Level level) { return maps[level]; }
  const torch::Tensor& operator[](Level level) const { return maps[level]; }
};

}  // namespace stylefield
