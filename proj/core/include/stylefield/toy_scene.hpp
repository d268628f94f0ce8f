// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <torch/torch.h>

#include "stylefield/camera.hpp"

namespace stylefield {

/// Analytic sphere or axis-aligned box with a smooth two-color stripe texture.
struct Primitive {
  enum class Kind { Sphere, Box };
  Kind kind = Kind::Sphere;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d size = Eigen::Vector3d::Constant(0.5);  ///< radius in x for spheres, half-extents for boxes
  Eigen::Vector3d color_a = Eigen::Vector3d::Constant(0.8);
  Eigen::Vector3d color_b = Eigen::Vector3d::Constant(0.3);
  double stripes = 2.0;  ///< stripe frequency along the local y axis
};

struct SurfaceHit {
  double t = 0;
  int primitive = -1;
  Eigen::Vector3d point;
  Eigen::Vector3d normal;
};

struct ToyView {
  torch::Tensor image;  ///< [3, H, W]
  torch::Tensor mask;   ///< [H, W], 1 where a surface was hit
};

struct Correspondence {
  int64_t ua = 0, va = 0;
  int64_t ub = 0, vb = 0;
};

class ToyScene {
 public:
  std::vector<Primitive> primitives;
  Eigen::Vector3d light = Eigen::Vector3d(0.4, 0.8, 0.45).normalized();  ///< direction towards the light (world y is up)
  Aabb bounds;

  /// Built-in scenes: "spheres" (three spheres), "table" (two spheres on a slab), "single", "pillar".
  static ToyScene preset(const std::string& name);
  static std::vector<std::string> preset_names();

  std::optional<SurfaceHit> trace(const Eigen::Vector3d& origin, const Eigen::Vector3d& direction) const;
  /// View-independent Lambert shading of the textured albedo.
  Eigen::Vector3d shade(const SurfaceHit& hit) const;
  ToyView render(const Camera& camera) const;

  void save(const std::filesystem::path& path) const;
  static ToyScene load(const std::filesystem::path& path);
};

/// `count` cameras orbiting the origin, alternating between two elevations.
std::vector<Camera> orbit_cameras(int count, int64_t resolution, double radius = 3.2, double fov_y_degrees = 40.0,
                                  double azimuth_offset_degrees = 0.0);

/// Writes images and a camera manifest ("views.txt") for the scene.
void write_toy_dataset(const ToyScene& scene, const std::vector<Camera>& cameras, const std::filesystem::path& dir);

/// Pixel pairs that see the same surface point in both views (visibility checked by tracing from b).
std::vector<Correspondence> toy_correspondences(const ToyScene& scene, const Camera& a, const Camera& b,
                                                double tolerance = 0.02);

/// Procedural style images (stripes, checkers, rings, blobs) with per-image random palettes.
std::vector<torch::Tensor> generate_style_corpus(int count, int64_t resolution, uint64_t seed);

}  // namespace stylefield
