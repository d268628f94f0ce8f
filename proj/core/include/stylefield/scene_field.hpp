// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>
#include <torch/torch.h>

#include "stylefield/camera.hpp"

namespace stylefield {

struct Ray {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
  double near = 0;
  double far = 1;
};

/// Samples along a batch of R rays: depths, positions and deltas are [R, N],
/// [R, N, 3] and [R, N]. Depths increase strictly along each ray.
struct SampleBatch {
  torch::Tensor depths;
  torch::Tensor positions;
  torch::Tensor deltas;

  int64_t samples_per_ray() const { return depths.size(-1); }
};

/// Stratified samples on [near, far]: midpoints of N equal strata, or a uniform
/// draw inside each stratum when `jitter` is set (seeded, reproducible).
/// delta_i = t_{i+1} - t_i and the last delta is far - t_N.
SampleBatch sample_ray(const Ray& ray, int n_samples, bool jitter, uint64_t seed);

/// Batched version over rays with per-ray near/far ([R] each). Origins and
/// directions are [R, 3]; directions must be unit length.
SampleBatch sample_rays(const torch::Tensor& origins, const torch::Tensor& directions, const torch::Tensor& near,
                        const torch::Tensor& far, int n_samples, bool jitter, uint64_t seed);

/// Low-rank plane/line (vector-matrix) factorization of a feature volume.
/// Component k pairs plane (a, b) with line c for (a, b, c) in
/// {(x, y, z), (x, z, y), (y, z, x)}; the 3 * rank component products are
/// concatenated and mapped to `feature_dim` channels by `projection`.
class FactorizedGridImpl : public torch::nn::Module {
 public:
  FactorizedGridImpl(std::array<int64_t, 3> resolution, int64_t rank, int64_t feature_dim);

  /// Features at normalized coordinates in [-1, 1]^3 ([K, 3] -> [K, feature_dim]).
  torch::Tensor forward(const torch::Tensor& unit_coords) const;
  /// The 3 * rank factor products before projection, [K, 3 * rank].
  torch::Tensor components(const torch::Tensor& unit_coords) const;

  std::array<int64_t, 3> resolution() const { return resolution_; }
  int64_t rank() const { return rank_; }
  int64_t feature_dim() const { return feature_dim_; }

  /// Axes (a, b, c) of component k: plane over a (columns) and b (rows), line over c.
  static std::array<int, 3> component_axes(int k);

  std::array<torch::Tensor, 3> planes;  ///< [1, rank, R_b, R_a]
  std::array<torch::Tensor, 3> lines;   ///< [1, rank, R_c, 1]
  torch::Tensor projection;             ///< [feature_dim, 3 * rank]

 private:
  std::array<int64_t, 3> resolution_;
  int64_t rank_;
  int64_t feature_dim_;
};
TORCH_MODULE(FactorizedGrid);

/// Dense non-negative density grid [1, 1, R_z, R_y, R_x] queried trilinearly.
class OpacityFieldImpl : public torch::nn::Module {
 public:
  explicit OpacityFieldImpl(std::array<int64_t, 3> resolution, double initial_density = 0.0);

  /// Densities at normalized coordinates ([K, 3] -> [K]).
  torch::Tensor forward(const torch::Tensor& unit_coords) const;
  /// Projects stored values back to sigma >= 0 after an optimizer step.
  void clamp_nonnegative();

  torch::Tensor density;
};
TORCH_MODULE(OpacityField);

struct SceneFieldOptions {
  std::array<int64_t, 3> resolution{32, 32, 32};
  int64_t rank = 4;
  int64_t basic_dim = 48;
  Aabb bounds;
  double initial_density = 0.0;
};

/// Pre-trained base radiance field: factorized feature grid, opacity field and
/// the photometric color head used by Stage0 and for rendering style objects.
class SceneFieldImpl : public torch::nn::Module {
 public:
  explicit SceneFieldImpl(const SceneFieldOptions& options);

  struct BasicFeatures {
    torch::Tensor features;  ///< [K, C_b], zero where `inside` is false
    torch::Tensor inside;    ///< [K] bool; false flags an empty (out-of-bounds) sample
  };

  BasicFeatures query_basic_feature(const torch::Tensor& positions) const;
  torch::Tensor query_density(const torch::Tensor& positions) const;
  /// Photometric color sigmoid(color(P)) of basic features, [K, C_b] -> [K, 3].
  torch::Tensor color_of(const torch::Tensor& basic) const;

  torch::Tensor unit_coords(const torch::Tensor& positions) const;
  torch::Tensor inside_mask(const torch::Tensor& positions) const;

  const Aabb& bounds() const { return bounds_; }
  int64_t basic_dim() const { return grid->feature_dim(); }
  void set_bounds(const Aabb& bounds);

  FactorizedGrid grid{nullptr};
  OpacityField opacity{nullptr};
  torch::nn::Linear color{nullptr};

 private:
  Aabb bounds_;
  torch::Tensor bounds_buffer_;
};
TORCH_MODULE(SceneField);

/// Single-position conveniences.
struct PointFeature {
  torch::Tensor feature;  ///< [C_b]
  bool empty = false;
};
PointFeature query_basic_feature(const SceneField& scene, const Eigen::Vector3d& position);
double query_density(const SceneField& scene, const Eigen::Vector3d& position);

}  // namespace stylefield
