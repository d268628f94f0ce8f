// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <torch/torch.h>

namespace stylefield {

using Pose = Eigen::Matrix4d;  ///< world-from-camera rigid transform

/// Pinhole intrinsics in pixels. Cameras follow the x-right, y-down, z-forward
/// convention; pixel (u, v) is sampled through its center (u + 0.5, v + 0.5).
struct Intrinsics {
  double fx = 1, fy = 1, cx = 0, cy = 0;
  int64_t width = 0, height = 0;

  static Intrinsics from_fov(int64_t width, int64_t height, double fov_y_degrees);
};

struct Camera {
  Pose world_from_camera = Pose::Identity();
  Intrinsics intrinsics;
  std::string image;  ///< image filename relative to the manifest, may be empty
};

struct Aabb {
  Eigen::Vector3d min = Eigen::Vector3d::Constant(-1);
  Eigen::Vector3d max = Eigen::Vector3d::Constant(1);

  bool contains(const Eigen::Vector3d& p) const;
};

bool is_rigid(const Pose& pose, double tolerance = 1e-6);
Pose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
             const Eigen::Vector3d& up = Eigen::Vector3d::UnitY());
Pose rigid_inverse(const Pose& pose);

/// Unit ray direction in world space through the center of pixel (u, v).
Eigen::Vector3d pixel_direction(const Camera& camera, int64_t u, int64_t v);
/// Continuous pixel coordinates of a world point, or nullopt when it lies behind the camera.
std::optional<Eigen::Vector2d> project(const Camera& camera, const Eigen::Vector3d& world);

/// Row-major per-pixel rays: origins [H*W, 3] and unit directions [H*W, 3].
struct RayBundle {
  torch::Tensor origins;
  torch::Tensor directions;
};
RayBundle generate_rays(const Camera& camera, torch::Dtype dtype = torch::kFloat32);

/// Slab intersection of rays with a box. Returns (near, far, hit) where hit is
/// a bool tensor; near is clamped to be >= 0.
std::tuple<torch::Tensor, torch::Tensor, torch::Tensor> intersect_aabb(const Aabb& box,
                                                                       const torch::Tensor& origins,
                                                                       const torch::Tensor& directions);

/// Plain-text camera manifest: optional "bounds" line plus one "view" line per camera:
///   view <image> <width> <height> <fx> <fy> <cx> <cy> <16 numbers, world-from-camera row-major>
struct CameraManifest {
  std::optional<Aabb> bounds;
  std::vector<Camera> cameras;

  void save(const std::filesystem::path& path) const;
  static CameraManifest load(const std::filesystem::path& path);
};

/// Trajectory file: one pose per non-empty line, 16 numbers row-major.
std::vector<Pose> load_trajectory(const std::filesystem::path& path);
void save_trajectory(const std::filesystem::path& path, const std::vector<Pose>& poses);

}  // namespace stylefield
