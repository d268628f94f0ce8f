// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/scene_field.hpp"

#include <cmath>
#include <random>

#include "stylefield/error.hpp"

namespace F = torch::nn::functional;

namespace stylefield {

namespace {

const auto kSampleOpts =
    F::GridSampleFuncOptions().mode(torch::kBilinear).padding_mode(torch::kBorder).align_corners(false);

void validate_ray(const Ray& ray, int n_samples) {
  STYLEFIELD_VALIDATE(n_samples >= 1, "sample_ray: n_samples must be >= 1");
  STYLEFIELD_VALIDATE(std::abs(ray.direction.norm() - 1.0) <= 1e-6, "sample_ray: ray direction must be unit length");
  STYLEFIELD_VALIDATE(ray.near >= 0.0 && ray.near < ray.far, "sample_ray: require 0 <= near < far");
}

}  // namespace

SampleBatch sample_ray(const Ray& ray, int n_samples, bool jitter, uint64_t seed) {
  validate_ray(ray, n_samples);
  auto opts = torch::TensorOptions().dtype(torch::kFloat64);
  auto origin = torch::tensor({ray.origin.x(), ray.origin.y(), ray.origin.z()}, opts).unsqueeze(0);
  auto dir = torch::tensor({ray.direction.x(), ray.direction.y(), ray.direction.z()}, opts).unsqueeze(0);
  return sample_rays(origin, dir, torch::tensor({ray.near}, opts), torch::tensor({ray.far}, opts), n_samples, jitter,
                     seed);
}

SampleBatch sample_rays(const torch::Tensor& origins, const torch::Tensor& directions, const torch::Tensor& near,
                        const torch::Tensor& far, int n_samples, bool jitter, uint64_t seed) {
  STYLEFIELD_VALIDATE(n_samples >= 1, "sample_rays: n_samples must be >= 1");
  STYLEFIELD_VALIDATE(origins.dim() == 2 && origins.size(1) == 3 && directions.sizes() == origins.sizes(),
                      "sample_rays: origins and directions must be [R, 3]");
  const int64_t rays = origins.size(0);
  auto opts = origins.options();

  torch::Tensor offsets;  // position of each sample inside its stratum, in [0, 1)
  if (jitter) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> u(static_cast<std::size_t>(rays * n_samples));
    for (auto& x : u) x = unit(rng);
    offsets = torch::from_blob(u.data(), {rays, n_samples}, torch::kFloat64).clone().to(opts.dtype());
  } else {
    offsets = torch::full({rays, n_samples}, 0.5, opts);
  }
  auto step = ((far - near) / static_cast<double>(n_samples)).unsqueeze(1);
  auto strata = torch::arange(n_samples, opts).unsqueeze(0);
  auto depths = near.unsqueeze(1) + (strata + offsets) * step;
  auto deltas = torch::cat({depths.narrow(1, 1, n_samples - 1) - depths.narrow(1, 0, n_samples - 1),
                            far.unsqueeze(1) - depths.narrow(1, n_samples - 1, 1)},
                           1);
  auto positions = origins.unsqueeze(1) + directions.unsqueeze(1) * depths.unsqueeze(2);
  return {depths, positions, deltas};
}

FactorizedGridImpl::FactorizedGridImpl(std::array<int64_t, 3> resolution, int64_t rank, int64_t feature_dim)
    : resolution_(resolution), rank_(rank), feature_dim_(feature_dim) {
  STYLEFIELD_VALIDATE(rank >= 1 && feature_dim >= 1, "FactorizedGrid: rank and feature_dim must be >= 1");
  for (int k = 0; k < 3; ++k) {
    STYLEFIELD_VALIDATE(resolution[k] >= 1, "FactorizedGrid: resolution must be positive");
    const auto [a, b, c] = component_axes(k);
    planes[k] = register_parameter("plane" + std::to_string(k),
                                   0.1 * torch::randn({1, rank, resolution[b], resolution[a]}));
    lines[k] = register_parameter("line" + std::to_string(k), 0.1 * torch::randn({1, rank, resolution[c], 1}));
  }
  projection = register_parameter(
      "projection", torch::randn({feature_dim, 3 * rank}) / std::sqrt(static_cast<double>(3 * rank)));
}

std::array<int, 3> FactorizedGridImpl::component_axes(int k) {
  switch (k) {
    case 0: return {0, 1, 2};
    case 1: return {0, 2, 1};
    default: return {1, 2, 0};
  }
}

torch::Tensor FactorizedGridImpl::components(const torch::Tensor& unit_coords) const {
  STYLEFIELD_VALIDATE(unit_coords.dim() == 2 && unit_coords.size(1) == 3, "FactorizedGrid: coords must be [K, 3]");
  const int64_t k_points = unit_coords.size(0);
  std::vector<torch::Tensor> parts;
  for (int k = 0; k < 3; ++k) {
    const auto [a, b, c] = component_axes(k);
    auto plane_grid = torch::stack({unit_coords.select(1, a), unit_coords.select(1, b)}, 1).view({1, k_points, 1, 2});
    auto line_grid =
        torch::stack({torch::zeros_like(unit_coords.select(1, c)), unit_coords.select(1, c)}, 1).view({1, k_points, 1, 2});
    auto p = F::grid_sample(planes[k], plane_grid, kSampleOpts).view({rank_, k_points});
    auto l = F::grid_sample(lines[k], line_grid, kSampleOpts).view({rank_, k_points});
    parts.push_back(p * l);
  }
  return torch::cat(parts, 0).t();
}

torch::Tensor FactorizedGridImpl::forward(const torch::Tensor& unit_coords) const {
  return torch::matmul(components(unit_coords), projection.t());
}

OpacityFieldImpl::OpacityFieldImpl(std::array<int64_t, 3> resolution, double initial_density) {
  STYLEFIELD_VALIDATE(initial_density >= 0.0, "OpacityField: initial density must be >= 0");
  density = register_parameter("density",
                               torch::full({1, 1, resolution[2], resolution[1], resolution[0]}, initial_density));
}

torch::Tensor OpacityFieldImpl::forward(const torch::Tensor& unit_coords) const {
  const int64_t k_points = unit_coords.size(0);
  auto grid = unit_coords.view({1, k_points, 1, 1, 3});
  return F::grid_sample(density, grid, kSampleOpts).view({k_points}).clamp_min(0.0);
}

void OpacityFieldImpl::clamp_nonnegative() {
  torch::NoGradGuard no_grad;
  density.clamp_min_(0.0);
}

SceneFieldImpl::SceneFieldImpl(const SceneFieldOptions& options) {
  grid = register_module("grid", FactorizedGrid(options.resolution, options.rank, options.basic_dim));
  opacity = register_module("opacity", OpacityField(options.resolution, options.initial_density));
  color = register_module("color", torch::nn::Linear(options.basic_dim, 3));
  bounds_buffer_ = register_buffer("bounds", torch::zeros({2, 3}));
  set_bounds(options.bounds);
}

void SceneFieldImpl::set_bounds(const Aabb& bounds) {
  STYLEFIELD_VALIDATE((bounds.max.array() > bounds.min.array()).all(), "scene bounds must have positive extent");
  bounds_ = bounds;
  torch::NoGradGuard no_grad;
  bounds_buffer_.copy_(torch::tensor({bounds.min.x(), bounds.min.y(), bounds.min.z(), bounds.max.x(), bounds.max.y(),
                                      bounds.max.z()})
                           .view({2, 3}));
}

torch::Tensor SceneFieldImpl::unit_coords(const torch::Tensor& positions) const {
  auto lo = torch::tensor({bounds_.min.x(), bounds_.min.y(), bounds_.min.z()}, positions.options());
  auto hi = torch::tensor({bounds_.max.x(), bounds_.max.y(), bounds_.max.z()}, positions.options());
  return (positions - lo) / (hi - lo) * 2.0 - 1.0;
}

torch::Tensor SceneFieldImpl::inside_mask(const torch::Tensor& positions) const {
  auto lo = torch::tensor({bounds_.min.x(), bounds_.min.y(), bounds_.min.z()}, positions.options());
  auto hi = torch::tensor({bounds_.max.x(), bounds_.max.y(), bounds_.max.z()}, positions.options());
  return ((positions >= lo) & (positions <= hi)).all(1);
}

SceneFieldImpl::BasicFeatures SceneFieldImpl::query_basic_feature(const torch::Tensor& positions) const {
  STYLEFIELD_VALIDATE(positions.dim() == 2 && positions.size(1) == 3, "query_basic_feature: positions must be [K, 3]");
  auto inside = inside_mask(positions);
  auto feats = grid->forward(unit_coords(positions));
  return {feats * inside.unsqueeze(1).to(feats.dtype()), inside};
}

torch::Tensor SceneFieldImpl::query_density(const torch::Tensor& positions) const {
  STYLEFIELD_VALIDATE(positions.dim() == 2 && positions.size(1) == 3, "query_density: positions must be [K, 3]");
  auto sigma = opacity->forward(unit_coords(positions));
  return sigma * inside_mask(positions).to(sigma.dtype());
}

torch::Tensor SceneFieldImpl::color_of(const torch::Tensor& basic) const {
  return torch::sigmoid(color.ptr()->forward(basic));
}

PointFeature query_basic_feature(const SceneField& scene, const Eigen::Vector3d& position) {
  auto dtype = scene->grid->projection.scalar_type();
  auto pos = torch::tensor({position.x(), position.y(), position.z()}, torch::TensorOptions().dtype(dtype)).view({1, 3});
  auto out = scene->query_basic_feature(pos);
  return {out.features[0], !out.inside[0].item<bool>()};
}

double query_density(const SceneField& scene, const Eigen::Vector3d& position) {
  auto dtype = scene->opacity->density.scalar_type();
  auto pos = torch::tensor({position.x(), position.y(), position.z()}, torch::TensorOptions().dtype(dtype)).view({1, 3});
  return scene->query_density(pos)[0].item<double>();
}

}  // namespace stylefield
