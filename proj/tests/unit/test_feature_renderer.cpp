// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "stylefield/error.hpp"
#include "stylefield/feature_renderer.hpp"
#include "test_util.hpp"

namespace stylefield {
namespace {

using testing::f64;
using testing::max_diff;

TEST(CompositingWeights, HalfOpacityStep) {
  auto w = compositing_weights(torch::tensor({{std::log(2.0)}}, f64()), torch::tensor({{1.0}}, f64()));
  EXPECT_NEAR(w.item<double>(), 0.5, 1e-15);
}

TEST(CompositingWeights, MatchesLoopOracle) {
  torch::manual_seed(5);
  auto sigma = torch::rand({7, 12}, f64()) * 3;
  auto delta = torch::rand({7, 12}, f64()) * 0.4;
  auto w = compositing_weights(sigma, delta);
  for (int64_t r = 0; r < 7; ++r) {
    double transmittance = 1.0;
    for (int64_t i = 0; i < 12; ++i) {
      const double a = sigma[r][i].item<double>() * delta[r][i].item<double>();
      EXPECT_NEAR(w[r][i].item<double>(), transmittance * (1 - std::exp(-a)), 1e-14);
      transmittance *= std::exp(-a);
    }
  }
}

TEST(CompositingWeights, BoundedAndRejectNegative) {
  auto w = compositing_weights(torch::rand({20, 30}, f64()) * 50, torch::rand({20, 30}, f64()));
  EXPECT_GE(w.min().item<double>(), 0.0);
  EXPECT_LE(w.sum(1).max().item<double>(), 1.0 + 1e-6);
  EXPECT_THROW(compositing_weights(-torch::ones({1, 2}), torch::ones({1, 2})), ValidationError);
  EXPECT_THROW(compositing_weights(torch::ones({1, 2}), torch::ones({1, 3})), ValidationError);
}

TEST(CompositingWeights, ZeroDensityGivesZeroWeights) {
  auto w = compositing_weights(torch::zeros({2, 5}, f64()), torch::rand({2, 5}, f64()));
  EXPECT_EQ(w.abs().max().item<double>(), 0.0);
}

TEST(RenderPixelFeature, DegenerateWeights) {
  auto f = torch::randn({1, 1, 4}, f64());
  EXPECT_TRUE(torch::equal(render_pixel_feature(torch::ones({1, 1}, f64()), f), f[0]));
  EXPECT_EQ(render_pixel_feature(torch::zeros({1, 3}, f64()), torch::randn({1, 3, 4}, f64())).abs().max().item<double>(),
            0.0);
  EXPECT_THROW(render_pixel_feature(torch::zeros({1, 3}), torch::zeros({1, 2, 4})), ValidationError);
}

TEST(RenderPixelFeature, WeightedSumOracle) {
  auto w = torch::rand({4, 6}, f64());
  auto f = torch::randn({4, 6, 3}, f64());
  auto out = render_pixel_feature(w, f);
  for (int64_t r = 0; r < 4; ++r)
    for (int64_t c = 0; c < 3; ++c) {
      double acc = 0;
      for (int64_t i = 0; i < 6; ++i) acc += w[r][i].item<double>() * f[r][i][c].item<double>();
      EXPECT_NEAR(out[r][c].item<double>(), acc, 1e-14);
    }
}

struct Rig {
  SceneField scene{nullptr};
  MultiLevelAdaptor adaptor{nullptr};
  LearnableInstanceNorm norm{nullptr};

  explicit Rig(double density, int depth = 2) {
    torch::manual_seed(9);
    SceneFieldOptions o;
    o.resolution = {4, 4, 4};
    o.rank = 2;
    o.basic_dim = 5;
    o.initial_density = density;
    scene = SceneField(o);
    adaptor = MultiLevelAdaptor(5, LevelChannels{{2, 3, 4}}, depth);
    norm = LearnableInstanceNorm(LevelChannels{{2, 3, 4}});
    scene->to(torch::kFloat64);
    adaptor->to(torch::kFloat64);
    norm->to(torch::kFloat64);
  }
};

TEST(RenderView, EmptySceneGivesZeroMaps) {
  Rig rig(0.0);
  auto cam = testing::square_camera({0, 0, 3}, 6);
  auto maps = render_view(rig.scene, rig.adaptor, rig.norm, cam, Stage::Stage1);
  for (Level level : kAllLevels) {
    EXPECT_EQ(maps[level].sizes(), (std::vector<int64_t>{rig.adaptor->channels()[level], 6, 6}));
    EXPECT_EQ(maps[level].abs().max().item<double>(), 0.0);
  }
  EXPECT_EQ(maps.opacity.abs().max().item<double>(), 0.0);
}

// Renders every pixel with literal loops over samples and compares with render_view.
void expect_matches_pixel_oracle(const Rig& rig, const Camera& cam, int samples) {
  RenderSettings settings;
  settings.samples_per_ray = samples;
  settings.weight_epsilon = -1.0;  // keep every sample
  auto maps = render_view(rig.scene, rig.adaptor, rig.norm, cam, Stage::Stage1, settings);
  torch::NoGradGuard no_grad;
  const Pose& pose = cam.world_from_camera;
  const int64_t h = cam.intrinsics.height, w_px = cam.intrinsics.width;
  for (int64_t v = 0; v < h; ++v) {
    for (int64_t u = 0; u < w_px; ++u) {
      Ray ray{pose.block<3, 1>(0, 3), pixel_direction(cam, u, v), 0, 0};
      // Slab intersection with [-1, 1]^3.
      double t0 = 0, t1 = 1e9;
      for (int a = 0; a < 3; ++a) {
        const double lo = (-1 - ray.origin[a]) / ray.direction[a], hi = (1 - ray.origin[a]) / ray.direction[a];
        t0 = std::max(t0, std::min(lo, hi));
        t1 = std::min(t1, std::max(lo, hi));
      }
      double expected_opacity = 0.0;
      PerLevel<std::vector<double>> expected;
      for (Level level : kAllLevels) expected[level].assign(rig.adaptor->channels()[level], 0.0);
      if (t0 < t1) {
        ray.near = t0;
        ray.far = t1;
        auto s = sample_ray(ray, samples, false, 0);
        double transmittance = 1.0;
        for (int64_t i = 0; i < samples; ++i) {
          const Eigen::Vector3d p = ray.origin + ray.direction * s.depths[0][i].item<double>();
          const double a = query_density(rig.scene, p) * s.deltas[0][i].item<double>();
          const double w = transmittance * (1 - std::exp(-a));
          transmittance *= std::exp(-a);
          expected_opacity += w;
          auto basic = query_basic_feature(rig.scene, p).feature;
          for (Level level : kAllLevels) {
            auto f = rig.adaptor->forward(basic.view({1, -1}), level)[0];
            for (int64_t c = 0; c < f.size(0); ++c) expected[level][c] += w * f[c].item<double>();
          }
        }
      }
      EXPECT_NEAR(maps.opacity[v][u].item<double>(), expected_opacity, 1e-10);
      for (Level level : kAllLevels)
        for (std::size_t c = 0; c < expected[level].size(); ++c)
          EXPECT_NEAR(maps[level][static_cast<int64_t>(c)][v][u].item<double>(), expected[level][c], 1e-10);
    }
  }
}

TEST(RenderView, MatchesPerPixelOracle) {
  Rig rig(0.0);
  {
    torch::NoGradGuard no_grad;
    rig.scene->opacity->density.uniform_(0.0, 4.0);
  }
  expect_matches_pixel_oracle(rig, testing::square_camera({0.4, 0.7, 2.8}, 5, 50.0), 9);
}

TEST(RenderView, OneVoxelSceneTwoByTwo) {
  Rig rig(0.0);
  {
    torch::NoGradGuard no_grad;
    rig.scene->opacity->density[0][0][2][2][1] = 6.0;
  }
  auto cam = testing::square_camera({0.2, 0.1, 3.0}, 2, 30.0);
  expect_matches_pixel_oracle(rig, cam, 16);
  auto maps = render_view(rig.scene, rig.adaptor, rig.norm, cam, Stage::Stage1);
  EXPECT_GT(maps.opacity.max().item<double>(), 0.0);
}

TEST(RenderView, LinearInAdaptorOutput) {
  Rig rig(2.0, 1);
  auto cam = testing::square_camera({0, 0, 3}, 6);
  auto before = render_view(rig.scene, rig.adaptor, rig.norm, cam, Stage::Stage1);
  {
    torch::NoGradGuard no_grad;
    for (auto& p : rig.adaptor->parameters()) p.mul_(2.0);
  }
  auto after = render_view(rig.scene, rig.adaptor, rig.norm, cam, Stage::Stage1);
  for (Level level : kAllLevels) EXPECT_LT(max_diff(after[level], before[level] * 2.0), 1e-12);
}

TEST(RenderView, Stage2MapsEqualLinOfStage1Maps) {
  Rig rig(1.5);
  {
    torch::NoGradGuard no_grad;
    for (auto& p : rig.norm->parameters()) p.uniform_(-0.5, 0.5);
  }
  auto cam = testing::square_camera({0.3, 0.2, 3}, 6);
  RenderSettings settings;
  settings.weight_epsilon = -1.0;
  auto cache = build_view_cache(rig.scene, cam, settings);
  auto s1 = render_cached(cache, rig.adaptor, rig.norm, Stage::Stage1);
  auto s2 = render_cached(cache, rig.adaptor, rig.norm, Stage::Stage2);
  auto via_maps = apply_lin_to_maps(s1, rig.norm);
  for (Level level : kAllLevels) EXPECT_LT(max_diff(s2[level], via_maps[level]), 1e-10);
}

TEST(RenderView, InactiveLevelsRenderZeroAndSkipLin) {
  Rig rig(1.0);
  rig.adaptor = MultiLevelAdaptor(5, LevelChannels{{2, 3, 4}}, 2, LevelSet::high_only());
  rig.adaptor->to(torch::kFloat64);
  auto cam = testing::square_camera({0, 0, 3}, 4);
  auto maps = render_view(rig.scene, rig.adaptor, rig.norm, cam, Stage::Stage1);
  EXPECT_EQ(maps[Level::Low].abs().max().item<double>(), 0.0);
  EXPECT_GT(maps[Level::High].abs().max().item<double>(), 0.0);
  {
    torch::NoGradGuard no_grad;
    for (auto& p : rig.norm->parameters()) p.fill_(0.7);
  }
  auto normed = apply_lin_to_maps(maps, rig.norm, rig.adaptor->levels());
  EXPECT_EQ(normed[Level::Mid].abs().max().item<double>(), 0.0);
}

TEST(RenderRgb, OpaqueGreyFieldRendersItsColor) {
  Rig rig(50.0);
  {
    torch::NoGradGuard no_grad;
    rig.scene->color->weight.zero_();
    rig.scene->color->bias.zero_();
  }
  auto cam = testing::square_camera({0, 0, 3}, 4, 20.0);
  auto rgb = render_rgb(rig.scene, cam);
  EXPECT_NEAR(rgb.image.mean().item<double>(), 0.5, 1e-6);
  EXPECT_NEAR(rgb.opacity.min().item<double>(), 1.0, 1e-6);
  EXPECT_EQ(opacity_mask(rgb.opacity).sum().item<double>(), 16.0);
}

}  // namespace
}  // namespace stylefield
