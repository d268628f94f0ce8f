// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include <torch/torch.h>

#include "stylefield/camera.hpp"
#include "stylefield/config.hpp"
#include "stylefield/model.hpp"
#include "stylefield/trainer.hpp"

namespace stylefield {

enum class ReferenceKind { Image2d, MultiView3d };

/// A style given either as one image or as posed views of a style object.
struct StyleReference {
  ReferenceKind kind = ReferenceKind::Image2d;
  torch::Tensor image;      ///< Image2d only
  TrainingViews views;      ///< MultiView3d only
  Pose front = Pose::Identity();
  SceneField field{nullptr};  ///< fitted radiance field of the style object

  static StyleReference from_image(const torch::Tensor& image);
  static StyleReference from_views(TrainingViews views, const Pose& front);

  /// Fits `field` to the style views with the photometric Stage0 routine.
  LossReport fit(const RunConfig& config);
};

struct Trajectory {
  std::vector<Pose> poses;
  Intrinsics intrinsics;

  Camera camera(std::size_t i) const { return {poses.at(i), intrinsics, {}}; }
};

/// Rigid T with T * content_front = style_front, i.e. T = S * C^-1.
Pose align_poses(const Pose& content_front, const Pose& style_front);

struct StyleView {
  torch::Tensor image;  ///< [3, H, W]
  torch::Tensor mask;   ///< [H, W] in {0, 1}
};

/// Renders the style object from T * content_pose.
StyleView synchronized_style_view(const Pose& content_pose, const StyleReference& reference, const Pose& alignment,
                                  const Intrinsics& intrinsics, const RenderSettings& settings = {});

/// Stylizes every pose of a trajectory. 2D references reuse the single-image
/// path; 3D references use a synchronized, masked style view per frame and
/// require the content front pose.
std::vector<torch::Tensor> stylize_omniview(const Trajectory& trajectory, const Model& model,
                                            const StyleReference& reference,
                                            const std::optional<Pose>& content_front = std::nullopt);

}  // namespace stylefield
