// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/reference3d.hpp"

#include "stylefield/error.hpp"
#include "stylefield/feature_renderer.hpp"

namespace stylefield {

StyleReference StyleReference::from_image(const torch::Tensor& image) {
  STYLEFIELD_VALIDATE(image.dim() == 3 && image.size(0) == 3, "style image must be [3, H, W]");
  StyleReference ref;
  ref.kind = ReferenceKind::Image2d;
  ref.image = image;
  return ref;
}

StyleReference StyleReference::from_views(TrainingViews views, const Pose& front) {
  STYLEFIELD_VALIDATE(is_rigid(front, 1e-5), "style front pose is not a rigid transform");
  StyleReference ref;
  ref.kind = ReferenceKind::MultiView3d;
  ref.views = std::move(views);
  ref.front = front;
  return ref;
}

LossReport StyleReference::fit(const RunConfig& config) {
  STYLEFIELD_VALIDATE(kind == ReferenceKind::MultiView3d, "only multi-view style references can be fitted");
  auto options = ModelOptions::from_config(config).scene;
  if (views.bounds) options.bounds = *views.bounds;
  torch::manual_seed(config.seed);
  field = SceneField(options);
  return pretrain_scene(field, views, config).report;
}

Pose align_poses(const Pose& content_front, const Pose& style_front) {
  STYLEFIELD_VALIDATE(is_rigid(content_front, 1e-5) && is_rigid(style_front, 1e-5),
                      "align_poses: front poses must be rigid transforms");
  return style_front * rigid_inverse(content_front);
}

StyleView synchronized_style_view(const Pose& content_pose, const StyleReference& reference, const Pose& alignment,
                                  const Intrinsics& intrinsics, const RenderSettings& settings) {
  if (reference.field.is_empty()) {
    throw ConfigError("style reference has no fitted field; run Stage0 on the style views first");
  }
  Camera cam{alignment * content_pose, intrinsics, {}};
  torch::NoGradGuard no_grad;
  auto render = render_rgb(reference.field, cam, settings);
  return {render.image, opacity_mask(render.opacity)};
}

std::vector<torch::Tensor> stylize_omniview(const Trajectory& trajectory, const Model& model,
                                            const StyleReference& reference, const std::optional<Pose>& content_front) {
  std::vector<torch::Tensor> frames;
  if (reference.kind == ReferenceKind::Image2d) {
    for (std::size_t i = 0; i < trajectory.poses.size(); ++i) {
      frames.push_back(model.stylize_view(trajectory.camera(i), reference.image));
    }
    return frames;
  }
  if (!content_front) throw ConfigError("3D style references need the content front pose");
  const Pose alignment = align_poses(*content_front, reference.front);
  for (std::size_t i = 0; i < trajectory.poses.size(); ++i) {
    auto style = synchronized_style_view(trajectory.poses[i], reference, alignment, trajectory.intrinsics, model.render);
    frames.push_back(model.stylize_view(trajectory.camera(i), style.image, style.mask));
  }
  return frames;
}

}  // namespace stylefield
