// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/feature_renderer.hpp"

#include "stylefield/error.hpp"

namespace stylefield {

torch::Tensor compositing_weights(const torch::Tensor& sigmas, const torch::Tensor& deltas) {
  STYLEFIELD_VALIDATE(sigmas.sizes() == deltas.sizes(), "compositing_weights: sigma/delta shape mismatch");
  STYLEFIELD_VALIDATE(!(sigmas < 0).any().item<bool>(), "compositing_weights: negative density");
  STYLEFIELD_VALIDATE(!(deltas < 0).any().item<bool>(), "compositing_weights: negative delta");
  auto optical = sigmas * deltas;
  auto before = torch::cumsum(optical, -1) - optical;  // exclusive prefix sum
  return torch::exp(-before) * (-torch::expm1(-optical));
}

torch::Tensor render_pixel_feature(const torch::Tensor& weights, const torch::Tensor& point_features) {
  STYLEFIELD_VALIDATE(point_features.dim() == weights.dim() + 1 &&
                          point_features.sizes().slice(0, weights.dim()) == weights.sizes(),
                      "render_pixel_feature: weights and point features disagree in shape");
  return (weights.unsqueeze(-1) * point_features).sum(-2);
}

ViewCache build_view_cache(const SceneField& scene, const Camera& camera, const RenderSettings& settings) {
  torch::NoGradGuard no_grad;
  const auto dtype = scene->grid->projection.scalar_type();
  const auto& k = camera.intrinsics;
  auto rays = generate_rays(camera, dtype);
  auto [near, far, hit] = intersect_aabb(scene->bounds(), rays.origins, rays.directions);
  const int64_t total = k.width * k.height;

  ViewCache cache;
  cache.height = k.height;
  cache.width = k.width;
  auto opacity = torch::zeros({total}, torch::TensorOptions().dtype(dtype));
  std::vector<torch::Tensor> pixels, weights, basics;

  auto hit_index = torch::nonzero(hit).view(-1);
  const int64_t n_hit = hit_index.size(0);
  const int n = settings.samples_per_ray;
  for (int64_t begin = 0; begin < n_hit; begin += settings.chunk_rays) {
    const int64_t len = std::min(settings.chunk_rays, n_hit - begin);
    auto idx = hit_index.narrow(0, begin, len);
    auto samples = sample_rays(rays.origins.index_select(0, idx), rays.directions.index_select(0, idx),
                               near.index_select(0, idx), far.index_select(0, idx), n, settings.jitter,
                               settings.seed + static_cast<uint64_t>(begin));
    auto flat = samples.positions.reshape({len * n, 3});
    auto sigma = scene->query_density(flat).view({len, n});
    auto w = compositing_weights(sigma, samples.deltas);
    opacity.index_put_({idx}, w.sum(1));

    auto keep = torch::nonzero(w.reshape(-1) > settings.weight_epsilon).view(-1);
    if (keep.size(0) == 0) continue;
    auto ray_of_sample = idx.repeat_interleave(n);
    pixels.push_back(ray_of_sample.index_select(0, keep));
    weights.push_back(w.reshape(-1).index_select(0, keep));
    basics.push_back(scene->query_basic_feature(flat.index_select(0, keep)).features);
  }
  auto long_opts = torch::TensorOptions().dtype(torch::kInt64);
  cache.pixel = pixels.empty() ? torch::zeros({0}, long_opts) : torch::cat(pixels);
  cache.weights = weights.empty() ? torch::zeros({0}, opacity.options()) : torch::cat(weights);
  cache.basic = basics.empty() ? torch::zeros({0, scene->basic_dim()}, opacity.options()) : torch::cat(basics);
  cache.opacity = opacity.view({k.height, k.width});
  return cache;
}

LevelFeatureMaps render_cached(const ViewCache& cache, const MultiLevelAdaptor& adaptor,
                               const LearnableInstanceNorm& norm, Stage stage) {
  LevelFeatureMaps out;
  out.opacity = cache.opacity;
  const int64_t total = cache.height * cache.width;
  for (Level level : kAllLevels) {
    const int64_t channels = adaptor->channels()[level];
    if (!adaptor->has_level(level)) {
      out[level] = torch::zeros({channels, cache.height, cache.width}, cache.weights.options());
      continue;
    }
    auto feats = adapt(adaptor, norm, cache.basic, level, stage);
    auto acc = torch::zeros({total, channels}, feats.options());
    acc = acc.index_add(0, cache.pixel, feats * cache.weights.unsqueeze(1));
    out[level] = acc.t().reshape({channels, cache.height, cache.width});
  }
  return out;
}

LevelFeatureMaps render_view(const SceneField& scene, const MultiLevelAdaptor& adaptor,
                             const LearnableInstanceNorm& norm, const Camera& camera, Stage stage,
                             const RenderSettings& settings) {
  return render_cached(build_view_cache(scene, camera, settings), adaptor, norm, stage);
}

LevelFeatureMaps apply_lin_to_maps(const LevelFeatureMaps& stage1_maps, const LearnableInstanceNorm& norm,
                                   const LevelSet& levels) {
  LevelFeatureMaps out;
  out.opacity = stage1_maps.opacity;
  out.view = stage1_maps.view;
  for (Level level : kAllLevels) {
    if (!levels.contains(level)) {
      out[level] = stage1_maps[level];
      continue;
    }
    auto mean = norm->mean(level).view({-1, 1, 1});
    auto scale = norm->scale(level).view({-1, 1, 1});
    out[level] = (stage1_maps[level] - mean * stage1_maps.opacity.unsqueeze(0)) / scale;
  }
  return out;
}

torch::Tensor render_rgb_rays(const SceneField& scene, const torch::Tensor& origins, const torch::Tensor& directions,
                              const RenderSettings& settings) {
  const int64_t rays = origins.size(0);
  auto [near, far, hit] = intersect_aabb(scene->bounds(), origins, directions);
  auto out = torch::zeros({rays, 3}, origins.options());
  auto idx = torch::nonzero(hit).view(-1);
  if (idx.size(0) == 0) return out;
  const int n = settings.samples_per_ray;
  const int64_t len = idx.size(0);
  auto samples = sample_rays(origins.index_select(0, idx), directions.index_select(0, idx), near.index_select(0, idx),
                             far.index_select(0, idx), n, settings.jitter, settings.seed);
  auto flat = samples.positions.reshape({len * n, 3});
  auto sigma = scene->query_density(flat).view({len, n});
  auto w = compositing_weights(sigma, samples.deltas);
  auto rgb = scene->color_of(scene->query_basic_feature(flat).features).view({len, n, 3});
  return out.index_add(0, idx, render_pixel_feature(w, rgb));
}

RgbRender render_rgb(const SceneField& scene, const Camera& camera, const RenderSettings& settings) {
  torch::NoGradGuard no_grad;
  const auto& k = camera.intrinsics;
  auto cache = build_view_cache(scene, camera, settings);
  auto colors = scene->color_of(cache.basic) * cache.weights.unsqueeze(1);
  auto acc = torch::zeros({k.width * k.height, 3}, colors.options()).index_add(0, cache.pixel, colors);
  return {acc.t().reshape({3, k.height, k.width}).contiguous(), cache.opacity};
}

torch::Tensor opacity_mask(const torch::Tensor& opacity) { return (opacity > kMaskThreshold).to(opacity.dtype()); }

}  // namespace stylefield
