// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "stylefield/error.hpp"
#include "stylefield/mlfa.hpp"
#include "test_util.hpp"

namespace stylefield {
namespace {

using testing::f64;
using testing::max_diff;

TEST(Adaptor, IdentityMlpPassesFeaturesThrough) {
  MultiLevelAdaptor adaptor(4, LevelChannels{{4, 4, 4}}, 1);
  LearnableInstanceNorm norm(LevelChannels{{4, 4, 4}});
  adaptor->to(torch::kFloat64);
  norm->to(torch::kFloat64);
  {
    torch::NoGradGuard no_grad;
    for (Level level : kAllLevels) {
      auto lin = adaptor->mlp(level)[0]->as<torch::nn::Linear>();
      lin->weight.copy_(torch::eye(4, f64()));
      lin->bias.zero_();
    }
  }
  for (Level level : kAllLevels) norm->assign(level, torch::zeros({4}, f64()), torch::ones({4}, f64()));
  auto x = torch::randn({10, 4}, f64());
  for (Level level : kAllLevels) {
    EXPECT_TRUE(torch::equal(adapt(adaptor, norm, x, level, Stage::Stage1), x));
    EXPECT_LT(max_diff(adapt(adaptor, norm, x, level, Stage::Stage2), x), 1e-12);
  }
}

TEST(Adaptor, TwoLayerMlpMatchesMatmulOracle) {
  torch::manual_seed(1);
  MultiLevelAdaptor adaptor(3, LevelChannels{{4, 4, 4}}, 2);
  adaptor->to(torch::kFloat64);
  auto x = torch::randn({5, 3}, f64());
  auto l1 = adaptor->mlp(Level::Mid)[0]->as<torch::nn::Linear>();
  auto l2 = adaptor->mlp(Level::Mid)[2]->as<torch::nn::Linear>();
  auto out = adaptor->forward(x, Level::Mid);
  for (int64_t n = 0; n < 5; ++n) {
    double hidden[4];
    for (int64_t j = 0; j < 4; ++j) {
      double acc = l1->bias[j].item<double>();
      for (int64_t i = 0; i < 3; ++i) acc += l1->weight[j][i].item<double>() * x[n][i].item<double>();
      hidden[j] = std::max(0.0, acc);
    }
    for (int64_t k = 0; k < 4; ++k) {
      double acc = l2->bias[k].item<double>();
      for (int64_t j = 0; j < 4; ++j) acc += l2->weight[k][j].item<double>() * hidden[j];
      EXPECT_NEAR(out[n][k].item<double>(), acc, 1e-12);
    }
  }
}

TEST(Adaptor, RejectsWrongBasicWidth) {
  MultiLevelAdaptor adaptor(3, LevelChannels{{4, 4, 4}}, 2);
  EXPECT_THROW(adaptor->forward(torch::randn({2, 5}), Level::Low), ValidationError);
}

TEST(Adaptor, HighOnlyVariantHasOneLevel) {
  MultiLevelAdaptor adaptor(3, LevelChannels{{4, 5, 6}}, 2, LevelSet::high_only());
  EXPECT_FALSE(adaptor->has_level(Level::Low));
  EXPECT_TRUE(adaptor->has_level(Level::High));
  EXPECT_EQ(adaptor->forward(torch::randn({2, 3}), Level::High).size(1), 6);
  EXPECT_THROW(adaptor->forward(torch::randn({2, 3}), Level::Low), ValidationError);
}

TEST(Lin, MeanMapsToZero) {
  auto mean = torch::tensor({0.3, -1.2}, f64());
  auto scale = torch::tensor({2.0, 0.5}, f64());
  EXPECT_EQ(lin(mean.view({1, 2}), mean, scale).abs().max().item<double>(), 0.0);
}

TEST(Lin, UnitParamsAreIdentity) {
  auto x = torch::randn({6, 3}, f64());
  EXPECT_TRUE(torch::equal(lin(x, torch::zeros({3}, f64()), torch::ones({3}, f64())), x));
}

TEST(Lin, HandComputedExample) {
  auto out = lin(torch::tensor({{2.0, 4.0}}, f64()), torch::tensor({2.0, 2.0}, f64()), torch::tensor({2.0, 2.0}, f64()));
  EXPECT_DOUBLE_EQ(out[0][0].item<double>(), 0.0);
  EXPECT_DOUBLE_EQ(out[0][1].item<double>(), 1.0);
}

TEST(Lin, ScaleStaysAboveFloorAndAssignRoundTrips) {
  LearnableInstanceNorm norm(LevelChannels{{2, 2, 2}});
  norm->to(torch::kFloat64);
  auto scale = torch::tensor({0.25, 3.0}, f64());
  norm->assign(Level::Low, torch::tensor({1.0, -1.0}, f64()), scale);
  EXPECT_LT(max_diff(norm->scale(Level::Low), scale), 1e-12);
  EXPECT_THROW(norm->assign(Level::Low, torch::zeros({2}, f64()), torch::zeros({2}, f64())), ValidationError);
  {
    torch::NoGradGuard no_grad;
    for (auto& p : norm->parameters()) p.fill_(-1e3);
  }
  EXPECT_GE(norm->scale(Level::High).min().item<double>(), LearnableInstanceNormImpl::kScaleFloor);
}

TEST(Lin, GradientMatchesFiniteDifferences) {
  torch::manual_seed(2);
  MultiLevelAdaptor adaptor(3, LevelChannels{{2, 2, 2}}, 2);
  LearnableInstanceNorm norm(LevelChannels{{2, 2, 2}});
  adaptor->to(torch::kFloat64);
  norm->to(torch::kFloat64);
  auto x = torch::randn({4, 3}, f64());
  auto target = torch::randn({4, 2}, f64());
  auto loss = [&] { return (adapt(adaptor, norm, x, Level::Low, Stage::Stage2) - target).pow(2).sum(); };
  std::vector<torch::Tensor> params = adaptor->parameters();
  for (auto& p : norm->parameters()) params.push_back(p);
  auto grads = torch::autograd::grad({loss()}, params, {}, false, false, true);
  torch::NoGradGuard no_grad;
  double diff = 0, norm2 = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto flat = params[k].view({-1});
    auto g = grads[k].defined() ? grads[k].view({-1}) : torch::zeros_like(flat);
    for (int64_t i = 0; i < flat.numel(); ++i) {
      const double saved = flat[i].item<double>();
      flat[i] = saved + 1e-5;
      const double up = loss().item<double>();
      flat[i] = saved - 1e-5;
      const double down = loss().item<double>();
      flat[i] = saved;
      const double fd = (up - down) / 2e-5;
      diff += std::pow(fd - g[i].item<double>(), 2);
      norm2 += fd * fd;
    }
  }
  EXPECT_LT(std::sqrt(diff / norm2), 1e-4);
}

}  // namespace
}  // namespace stylefield
