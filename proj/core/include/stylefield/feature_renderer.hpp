// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include "stylefield/camera.hpp"
#include "stylefield/levels.hpp"
#include "stylefield/mlfa.hpp"
#include "stylefield/scene_field.hpp"

namespace stylefield {

/// w_i = exp(-sum_{q<i} sigma_q delta_q) * (1 - exp(-sigma_i delta_i)) along the
/// last dimension. Inputs are [..., N]; negative values are rejected.
torch::Tensor compositing_weights(const torch::Tensor& sigmas, const torch::Tensor& deltas);

/// sum_i w_i f_i for weights [N] and point features [N, C] (or batched [R, N] / [R, N, C]).
torch::Tensor render_pixel_feature(const torch::Tensor& weights, const torch::Tensor& point_features);

struct RenderSettings {
  int samples_per_ray = 32;
  int64_t chunk_rays = 4096;
  /// Samples whose weight does not exceed this are dropped from the view cache.
  double weight_epsilon = 1e-6;
  bool jitter = false;
  uint64_t seed = 0;
};

/// Frozen-field quantities of one view: every retained sample's pixel, weight
/// and basic feature, plus the per-pixel accumulated opacity. Valid as long as
/// the base field does not change (Stage1, Stage2 and inference).
struct ViewCache {
  int64_t height = 0;
  int64_t width = 0;
  torch::Tensor pixel;    ///< [K] int64 row-major pixel index
  torch::Tensor weights;  ///< [K]
  torch::Tensor basic;    ///< [K, C_b]
  torch::Tensor opacity;  ///< [H, W]
};

ViewCache build_view_cache(const SceneField& scene, const Camera& camera, const RenderSettings& settings);

/// Composites adapted point features into per-level [C_l, H, W] maps. Levels
/// missing from the adaptor come back as zero maps of the adaptor's width.
LevelFeatureMaps render_cached(const ViewCache& cache, const MultiLevelAdaptor& adaptor,
                               const LearnableInstanceNorm& norm, Stage stage);

/// One ray per pixel: sample, adapt per level, composite.
LevelFeatureMaps render_view(const SceneField& scene, const MultiLevelAdaptor& adaptor,
                             const LearnableInstanceNorm& norm, const Camera& camera, Stage stage,
                             const RenderSettings& settings = {});

/// Applies LIN to Stage1 maps. Because LIN is affine with scene-wide
/// parameters, sum_i w_i LIN(f_i) = (F - mean * opacity) / scale exactly.
LevelFeatureMaps apply_lin_to_maps(const LevelFeatureMaps& stage1_maps, const LearnableInstanceNorm& norm,
                                   const LevelSet& levels = LevelSet::all());

/// Photometric rendering of the base field through its color head over a black background.
struct RgbRender {
  torch::Tensor image;    ///< [3, H, W]
  torch::Tensor opacity;  ///< [H, W]
};
RgbRender render_rgb(const SceneField& scene, const Camera& camera, const RenderSettings& settings = {});

/// Differentiable per-ray photometric rendering used by Stage0: returns [R, 3] colors.
torch::Tensor render_rgb_rays(const SceneField& scene, const torch::Tensor& origins, const torch::Tensor& directions,
                              const RenderSettings& settings);

/// Threshold on accumulated opacity used for object masks.
inline constexpr double kMaskThreshold = 0.5;
torch::Tensor opacity_mask(const torch::Tensor& opacity);

}  // namespace stylefield
