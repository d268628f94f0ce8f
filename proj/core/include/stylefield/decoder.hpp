// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <torch/torch.h>

#include "stylefield/levels.hpp"

namespace stylefield {

struct DecoderOptions {
  int convs_per_stage = 2;
};

/// Cascade decoder over full-resolution level maps, no resampling anywhere:
///
///   high --1x1--> C_mid --+
///                         +-- concat -- 3x3 (dilation 4, then 2) --> C_mid
///   mid  --1x1--> C_mid --+
///   fused --1x1--> C_low --+
///                          +-- concat -- 3x3 (dilation 1) --> C_low -- 3x3 --> RGB
///   low  --1x1--> C_low --+
///
/// Every convolution but the last is followed by ReLU; padding equals the
/// dilation so spatial size is preserved. The RGB output is left unclamped.
class CascadeDecoderImpl : public torch::nn::Module {
 public:
  explicit CascadeDecoderImpl(const LevelChannels& channels, const DecoderOptions& options = {});

  torch::Tensor forward(const PerLevel<torch::Tensor>& maps) const;  ///< [C_l, H, W] each -> [3, H, W]

  /// Forward pass that also returns every intermediate activation, in order.
  std::vector<torch::Tensor> trace(const PerLevel<torch::Tensor>& maps) const;

  /// Dilation of each convolution of the high+mid and low fusion stages.
  static std::vector<int64_t> high_mid_dilations(int convs);
  static std::vector<int64_t> low_dilations(int convs);
  /// Pixels of context on each side of an output pixel.
  int64_t receptive_radius() const;

  torch::nn::Conv2d align_high{nullptr}, align_mid{nullptr}, align_fused{nullptr}, align_low{nullptr};
  torch::nn::ModuleList fuse_high_mid, fuse_low;
  torch::nn::Conv2d to_rgb{nullptr};

 private:
  LevelChannels channels_;
  DecoderOptions options_;
};
TORCH_MODULE(CascadeDecoder);

torch::Tensor decode(const CascadeDecoder& decoder, const LevelFeatureMaps& maps);

}  // namespace stylefield
