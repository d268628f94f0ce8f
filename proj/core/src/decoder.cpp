// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/decoder.hpp"

#include "stylefield/error.hpp"

namespace stylefield {

namespace {

torch::nn::Conv2d conv(int64_t in, int64_t out, int64_t kernel, int64_t dilation = 1) {
  return torch::nn::Conv2d(
      torch::nn::Conv2dOptions(in, out, kernel).dilation(dilation).padding(dilation * (kernel - 1) / 2));
}

}  // namespace

std::vector<int64_t> CascadeDecoderImpl::high_mid_dilations(int convs) {
  std::vector<int64_t> d(static_cast<std::size_t>(convs), 2);
  d.front() = 4;
  return d;
}

std::vector<int64_t> CascadeDecoderImpl::low_dilations(int convs) {
  return std::vector<int64_t>(static_cast<std::size_t>(convs), 1);
}

CascadeDecoderImpl::CascadeDecoderImpl(const LevelChannels& channels, const DecoderOptions& options)
    : channels_(channels), options_(options) {
  STYLEFIELD_VALIDATE(options.convs_per_stage >= 1, "decoder needs at least one convolution per stage");
  const int64_t c_low = channels[Level::Low], c_mid = channels[Level::Mid], c_high = channels[Level::High];
  align_high = register_module("align_high", conv(c_high, c_mid, 1));
  align_mid = register_module("align_mid", conv(c_mid, c_mid, 1));
  int64_t in = 2 * c_mid;
  for (int64_t d : high_mid_dilations(options.convs_per_stage)) {
    fuse_high_mid->push_back(conv(in, c_mid, 3, d));
    in = c_mid;
  }
  register_module("fuse_high_mid", fuse_high_mid);
  align_fused = register_module("align_fused", conv(c_mid, c_low, 1));
  align_low = register_module("align_low", conv(c_low, c_low, 1));
  in = 2 * c_low;
  for (int64_t d : low_dilations(options.convs_per_stage)) {
    fuse_low->push_back(conv(in, c_low, 3, d));
    in = c_low;
  }
  register_module("fuse_low", fuse_low);
  to_rgb = register_module("to_rgb", conv(c_low, 3, 3));
}

int64_t CascadeDecoderImpl::receptive_radius() const {
  int64_t r = 1;  // to_rgb
  for (int64_t d : high_mid_dilations(options_.convs_per_stage)) r += d;
  for (int64_t d : low_dilations(options_.convs_per_stage)) r += d;
  return r;
}

std::vector<torch::Tensor> CascadeDecoderImpl::trace(const PerLevel<torch::Tensor>& maps) const {
  for (Level level : kAllLevels) {
    STYLEFIELD_VALIDATE(maps[level].defined() && maps[level].dim() == 3 && maps[level].size(0) == channels_[level],
                        "decode: level '" + std::string(level_name(level)) + "' map has the wrong channel count");
  }
  const auto h = maps[Level::Low].size(1), w = maps[Level::Low].size(2);
  for (Level level : kAllLevels) {
    STYLEFIELD_VALIDATE(maps[level].size(1) == h && maps[level].size(2) == w,
                        "decode: level maps must share one resolution");
  }
  std::vector<torch::Tensor> acts;
  auto step = [&](const torch::Tensor& t) {
    acts.push_back(t);
    return t;
  };
  auto high = step(torch::relu(align_high.ptr()->forward(maps[Level::High].unsqueeze(0))));
  auto mid = step(torch::relu(align_mid.ptr()->forward(maps[Level::Mid].unsqueeze(0))));
  auto x = torch::cat({high, mid}, 1);
  for (const auto& c : *fuse_high_mid) x = step(torch::relu(c->as<torch::nn::Conv2d>()->forward(x)));
  auto fused = step(torch::relu(align_fused.ptr()->forward(x)));
  auto low = step(torch::relu(align_low.ptr()->forward(maps[Level::Low].unsqueeze(0))));
  x = torch::cat({fused, low}, 1);
  for (const auto& c : *fuse_low) x = step(torch::relu(c->as<torch::nn::Conv2d>()->forward(x)));
  step(to_rgb.ptr()->forward(x));
  return acts;
}

torch::Tensor CascadeDecoderImpl::forward(const PerLevel<torch::Tensor>& maps) const {
  return trace(maps).back().squeeze(0);
}

torch::Tensor decode(const CascadeDecoder& decoder, const LevelFeatureMaps& maps) {
  return decoder->forward(maps.maps);
}

}  // namespace stylefield
