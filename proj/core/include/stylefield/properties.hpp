// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "stylefield/checkpoint.hpp"
#include "stylefield/model.hpp"

namespace stylefield {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

/// Compositing weights and pixel features against literal loops, plus the
/// closed-form sum of weights, over random draws in double precision.
PropertyResult check_volume_rendering(uint64_t seed, int draws = 1000);
/// Every weight lies in [0, 1] and their sum never exceeds 1 + 1e-6.
PropertyResult check_weight_bound(uint64_t seed, int draws = 1000);
/// inject(sum w f) == sum w (f * weight) + bias in single precision.
PropertyResult check_commutation(uint64_t seed, int draws = 1000);

struct GradientCheck {
  std::string loss;   ///< "L_f", "L_r", "L_cs"
  std::string group;  ///< "mlfa", "lin", "dsi", "mlcd"
  int64_t parameters = 0;
  double relative_error = 0;  ///< ||analytic - numeric|| / max(||analytic||, ||numeric||)
};

inline constexpr double kGradientStep = 1e-5;
inline constexpr double kGradientTolerance = 1e-4;

/// Builds a double-precision network with fewer than 2,000 parameters per
/// component and compares autograd against central differences.
std::vector<GradientCheck> run_gradient_checks(uint64_t seed);
PropertyResult check_gradients(uint64_t seed);

/// save -> load -> save yields byte-identical manifest and blob.
PropertyResult check_checkpoint_roundtrip(const Checkpoint& ckpt, const std::filesystem::path& scratch);

/// Tensors that differ between `before` and `after` must all start with one of `trainable`;
/// tensors under `frozen` prefixes must be present in both and unchanged.
PropertyResult check_freezing(const Checkpoint& before, const Checkpoint& after,
                              const std::vector<std::string>& trainable, const std::vector<std::string>& frozen,
                              const std::string& name);

struct FreezingRun {
  Checkpoint stage0, stage1, stage2;
};
/// Tiny toy-scene run of all three stages for the freezing checks.
FreezingRun tiny_training_run(uint64_t seed);

/// Every suite above; checkpoint checks use a tiny toy run when no checkpoints are given.
std::vector<PropertyResult> run_property_suite(uint64_t seed, const std::filesystem::path& scratch,
                                               const Checkpoint* stage1 = nullptr,
                                               const Checkpoint* stage2 = nullptr);

}  // namespace stylefield
