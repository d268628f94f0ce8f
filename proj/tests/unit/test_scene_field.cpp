// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "stylefield/error.hpp"
#include "stylefield/scene_field.hpp"
#include "test_util.hpp"

namespace stylefield {
namespace {

using testing::f64;
using testing::voxel_center;

Ray unit_ray(double near, double far) { return {Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ(), near, far}; }

TEST(SampleRay, MidpointStrataOnUnitRange) {
  auto s = sample_ray(unit_ray(0, 1), 4, false, 0);
  const double expected[] = {0.125, 0.375, 0.625, 0.875};
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(s.depths[0][i].item<double>(), expected[i]);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(s.deltas[0][i].item<double>(), 0.25);
  // The last interval runs to the far bound.
  EXPECT_DOUBLE_EQ(s.deltas[0][3].item<double>(), 0.125);
}

TEST(SampleRay, SingleSample) {
  auto s = sample_ray(unit_ray(0, 1), 1, false, 0);
  EXPECT_DOUBLE_EQ(s.depths[0][0].item<double>(), 0.5);
  EXPECT_DOUBLE_EQ(s.deltas[0][0].item<double>(), 0.5);
}

TEST(SampleRay, JitterIsReproducibleAndStaysInStrata) {
  auto a = sample_ray(unit_ray(0.5, 2.5), 8, true, 42);
  auto b = sample_ray(unit_ray(0.5, 2.5), 8, true, 42);
  EXPECT_TRUE(torch::equal(a.depths, b.depths));
  EXPECT_TRUE(torch::equal(a.deltas, b.deltas));
  for (int i = 0; i < 8; ++i) {
    const double d = a.depths[0][i].item<double>();
    EXPECT_GE(d, 0.5 + 0.25 * i);
    EXPECT_LT(d, 0.5 + 0.25 * (i + 1));
  }
  auto c = sample_ray(unit_ray(0.5, 2.5), 8, true, 43);
  EXPECT_FALSE(torch::equal(a.depths, c.depths));
}

TEST(SampleRay, DepthsIncreaseAndDeltasSumToSpan) {
  auto s = sample_ray(unit_ray(1.0, 3.0), 16, true, 7);
  EXPECT_TRUE((s.depths.diff(1, 1) > 0).all().item<bool>());
  EXPECT_NEAR(s.depths[0][0].item<double>() + s.deltas.sum().item<double>(), 3.0, 1e-12);
  auto p = s.positions[0];
  EXPECT_TRUE(torch::allclose(p.select(1, 2), s.depths[0]));
}

TEST(SampleRay, RejectsInvalidRays) {
  Ray bad = unit_ray(0, 1);
  bad.direction = {0, 0, 2};
  EXPECT_THROW(sample_ray(bad, 4, false, 0), ValidationError);
  EXPECT_THROW(sample_ray(unit_ray(1, 1), 4, false, 0), ValidationError);
  EXPECT_THROW(sample_ray(unit_ray(0, 1), 0, false, 0), ValidationError);
}

TEST(FactorizedGrid, ConstantRankOneFactorsGiveOnePerAxisPair) {
  FactorizedGrid grid(std::array<int64_t, 3>{4, 4, 4}, 1, 3);
  grid->to(torch::kFloat64);
  torch::NoGradGuard no_grad;
  for (auto& p : grid->planes) p.fill_(1.0);
  for (auto& l : grid->lines) l.fill_(1.0);
  grid->projection.copy_(torch::eye(3, f64()));
  auto coords = torch::rand({50, 3}, f64()) * 2 - 1;
  auto out = grid->forward(coords);
  EXPECT_TRUE(torch::allclose(out, torch::ones({50, 3}, f64())));
  // Summed over the three axis pairs: 3 x 1.
  EXPECT_TRUE(torch::allclose(out.sum(1), torch::full({50}, 3.0, f64())));
}

TEST(FactorizedGrid, MatchesDenseReconstructionAtVoxelCenters) {
  torch::manual_seed(3);
  const std::array<int64_t, 3> res{4, 4, 4};
  const int64_t rank = 2, dim = 5;
  FactorizedGrid grid(res, rank, dim);
  grid->to(torch::kFloat64);
  torch::NoGradGuard no_grad;
  // Dense oracle D[x][y][z] = projection * [plane_k(a, b) * line_k(c)]_{k, r}.
  for (int64_t x = 0; x < 4; ++x) {
    for (int64_t y = 0; y < 4; ++y) {
      for (int64_t z = 0; z < 4; ++z) {
        const int64_t idx[3] = {x, y, z};
        std::vector<double> comp;
        for (int k = 0; k < 3; ++k) {
          const auto [a, b, c] = FactorizedGridImpl::component_axes(k);
          for (int64_t r = 0; r < rank; ++r) {
            comp.push_back(grid->planes[k][0][r][idx[b]][idx[a]].item<double>() *
                           grid->lines[k][0][r][idx[c]][0].item<double>());
          }
        }
        std::vector<double> expected(dim, 0.0);
        for (int64_t o = 0; o < dim; ++o)
          for (std::size_t j = 0; j < comp.size(); ++j)
            expected[o] += grid->projection[o][static_cast<int64_t>(j)].item<double>() * comp[j];
        auto coord = torch::tensor({(2.0 * x + 1) / 4 - 1, (2.0 * y + 1) / 4 - 1, (2.0 * z + 1) / 4 - 1}, f64());
        auto got = grid->forward(coord.view({1, 3}))[0];
        for (int64_t o = 0; o < dim; ++o) EXPECT_NEAR(got[o].item<double>(), expected[o], 1e-12);
      }
    }
  }
}

SceneField small_field(double initial_density = 0.0) {
  SceneFieldOptions o;
  o.resolution = {4, 4, 4};
  o.rank = 2;
  o.basic_dim = 6;
  o.initial_density = initial_density;
  SceneField f(o);
  f->to(torch::kFloat64);
  return f;
}

TEST(SceneField, OutsideBoundsIsEmptyAndZero) {
  auto field = small_field(1.0);
  auto pf = query_basic_feature(field, Eigen::Vector3d(1.5, 0, 0));
  EXPECT_TRUE(pf.empty);
  EXPECT_EQ(pf.feature.abs().max().item<double>(), 0.0);
  EXPECT_EQ(query_density(field, Eigen::Vector3d(0, -3, 0)), 0.0);
  auto inside = query_basic_feature(field, Eigen::Vector3d(0.1, 0.2, -0.3));
  EXPECT_FALSE(inside.empty);
}

TEST(SceneField, EmptyFieldHasZeroDensity) {
  auto field = small_field(0.0);
  auto pts = torch::rand({100, 3}, f64()) * 2 - 1;
  EXPECT_EQ(field->query_density(pts).abs().max().item<double>(), 0.0);
}

TEST(SceneField, SingleVoxelCenterReturnsStoredValue) {
  auto field = small_field(0.0);
  torch::NoGradGuard no_grad;
  field->opacity->density[0][0][2][1][3] = 5.5;  // [z][y][x]
  const Eigen::Vector3d center(voxel_center(3, 4), voxel_center(1, 4), voxel_center(2, 4));
  EXPECT_DOUBLE_EQ(query_density(field, center), 5.5);
}

TEST(SceneField, TrilinearMidpointBetweenVoxels) {
  auto field = small_field(0.0);
  torch::NoGradGuard no_grad;
  field->opacity->density[0][0][1][1][2] = 2.0;
  const Eigen::Vector3d mid(0.5 * (voxel_center(1, 4) + voxel_center(2, 4)), voxel_center(1, 4), voxel_center(1, 4));
  EXPECT_NEAR(query_density(field, mid), 1.0, 1e-12);
}

TEST(SceneField, DensityStaysNonNegativeAfterClamp) {
  auto field = small_field(0.0);
  torch::NoGradGuard no_grad;
  field->opacity->density.uniform_(-1.0, 1.0);
  auto pts = torch::rand({200, 3}, f64()) * 2 - 1;
  EXPECT_GE(field->query_density(pts).min().item<double>(), 0.0);
  field->opacity->clamp_nonnegative();
  EXPECT_GE(field->opacity->density.min().item<double>(), 0.0);
}

TEST(SceneField, RespectsCustomBounds) {
  SceneFieldOptions o;
  o.resolution = {2, 2, 2};
  o.rank = 1;
  o.basic_dim = 2;
  o.bounds.min = {0, 0, 0};
  o.bounds.max = {2, 4, 8};
  SceneField field(o);
  EXPECT_TRUE(query_basic_feature(field, Eigen::Vector3d(1, 3, 7)).empty == false);
  EXPECT_TRUE(query_basic_feature(field, Eigen::Vector3d(-0.1, 3, 7)).empty);
  auto u = field->unit_coords(torch::tensor({{0.0, 4.0, 4.0}}));
  EXPECT_TRUE(torch::allclose(u, torch::tensor({{-1.0, 1.0, 0.0}})));
}

}  // namespace
}  // namespace stylefield
