// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "stylefield/decoder.hpp"
#include "stylefield/error.hpp"
#include "test_util.hpp"

namespace stylefield {
namespace {

using testing::f64;
using testing::max_diff;
using testing::naive_conv;

PerLevel<torch::Tensor> random_maps(const LevelChannels& c, int64_t h, int64_t w) {
  PerLevel<torch::Tensor> maps;
  for (Level level : kAllLevels) maps[level] = torch::randn({c[level], h, w}, f64());
  return maps;
}

TEST(Decoder, ZeroInputZeroBiasGivesZeroOutput) {
  CascadeDecoder dec(LevelChannels{{4, 6, 8}});
  dec->to(torch::kFloat64);
  {
    torch::NoGradGuard no_grad;
    for (auto& item : dec->named_parameters())
      if (item.key().find("bias") != std::string::npos) item.value().zero_();
  }
  PerLevel<torch::Tensor> maps;
  for (Level level : kAllLevels) maps[level] = torch::zeros({4 + 2 * static_cast<int64_t>(level), 5, 7}, f64());
  EXPECT_EQ(dec->forward(maps).abs().max().item<double>(), 0.0);
}

TEST(Decoder, OutputIsThreeChannelsAtInputResolution) {
  CascadeDecoder dec(tiny_channels());
  for (auto [h, w] : {std::pair{1, 1}, std::pair{6, 9}, std::pair{16, 16}}) {
    PerLevel<torch::Tensor> maps;
    for (Level level : kAllLevels) maps[level] = torch::randn({tiny_channels()[level], h, w});
    EXPECT_EQ(dec->forward(maps).sizes(), (std::vector<int64_t>{3, h, w}));
  }
}

TEST(Decoder, RejectsMismatchedMaps) {
  CascadeDecoder dec(tiny_channels());
  auto maps = random_maps(tiny_channels(), 4, 4);
  maps[Level::Mid] = torch::randn({16, 2, 2}, f64());
  dec->to(torch::kFloat64);
  EXPECT_THROW(dec->forward(maps), ValidationError);
  maps[Level::Mid] = torch::randn({5, 4, 4}, f64());
  EXPECT_THROW(dec->forward(maps), ValidationError);
}

TEST(Decoder, TinyDecoderMatchesDilatedConvolutionOracle) {
  torch::manual_seed(8);
  const LevelChannels c{{2, 3, 4}};
  CascadeDecoder dec(c, DecoderOptions{1});
  dec->to(torch::kFloat64);
  auto maps = random_maps(c, 2, 2);
  auto got = dec->forward(maps);

  torch::NoGradGuard no_grad;
  auto conv_at = [](torch::nn::ModuleList& list, std::size_t i) {
    return torch::nn::Conv2d(std::dynamic_pointer_cast<torch::nn::Conv2dImpl>(list[i]));
  };
  auto high = naive_conv(maps[Level::High], dec->align_high, true);
  auto mid = naive_conv(maps[Level::Mid], dec->align_mid, true);
  auto x = naive_conv(torch::cat({high, mid}, 0), conv_at(dec->fuse_high_mid, 0), true);
  EXPECT_EQ(conv_at(dec->fuse_high_mid, 0)->options.dilation()->at(0), 4);
  auto fused = naive_conv(x, dec->align_fused, true);
  auto low = naive_conv(maps[Level::Low], dec->align_low, true);
  x = naive_conv(torch::cat({fused, low}, 0), conv_at(dec->fuse_low, 0), true);
  auto rgb = naive_conv(x, dec->to_rgb, false);
  EXPECT_LT(max_diff(got, rgb), 1e-10);
}

TEST(Decoder, ReceptiveRadiusCoversDilations) {
  CascadeDecoder dec(tiny_channels(), DecoderOptions{3});
  EXPECT_EQ(CascadeDecoderImpl::high_mid_dilations(3), (std::vector<int64_t>{4, 2, 2}));
  EXPECT_EQ(dec->receptive_radius(), 1 + 8 + 3);
  // A pixel outside the radius has no influence.
  dec->to(torch::kFloat64);
  auto maps = random_maps(tiny_channels(), 1, 32);
  auto base = dec->forward(maps);
  maps[Level::Low][0][0][31] += 5.0;
  auto moved = dec->forward(maps);
  EXPECT_TRUE(torch::equal(base.narrow(2, 0, 31 - dec->receptive_radius()),
                           moved.narrow(2, 0, 31 - dec->receptive_radius())));
}

}  // namespace
}  // namespace stylefield
