// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/levels.hpp"

#include "stylefield/error.hpp"

namespace stylefield {

std::string_view level_name(Level level) {
  switch (level) {
    case Level::Low: return "low";
    case Level::Mid: return "mid";
    case Level::High: return "high";
  }
  return "?";
}

Level parse_level(std::string_view name) {
  for (Level level : kAllLevels) {
    if (level_name(level) == name) return level;
  }
  throw ValidationError("unknown feature level '" + std::string(name) + "'");
}

std::string_view level_tap(Level level) {
  switch (level) {
    case Level::Low: return "relu1_1";
    case Level::Mid: return "relu2_1";
    case Level::High: return "relu3_1";
  }
  return "?";
}

LevelSpec level_spec(Level level, const LevelChannels& channels) {
  return {level, channels[level], std::string(level_tap(level))};
}

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::Stage0: return "stage0";
    case Stage::Stage1: return "stage1";
    case Stage::Stage2: return "stage2";
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : {Stage::Stage0, Stage::Stage1, Stage::Stage2}) {
    if (stage_name(s) == name) return s;
  }
  throw ValidationError("unknown stage '" + std::string(name) + "'");
}

int64_t LevelFeatureMaps::height() const {
  for (const auto& m : maps.values) {
    if (m.defined()) return m.size(1);
  }
  return opacity.defined() ? opacity.size(0) : 0;
}

int64_t LevelFeatureMaps::width() const {
  for (const auto& m : maps.values) {
    if (m.defined()) return m.size(2);
  }
  return opacity.defined() ? opacity.size(1) : 0;
}

}  // namespace stylefield
