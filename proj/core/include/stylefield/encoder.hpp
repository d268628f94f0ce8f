// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include <torch/torch.h>

#include "stylefield/checkpoint.hpp"
#include "stylefield/levels.hpp"
#include "stylefield/mlfa.hpp"

namespace stylefield {

enum class SizePolicy { Error, Resize };

/// VGG-19 truncated after relu3_1:
///   conv1_1 relu [low] conv1_2 relu pool conv2_1 relu [mid] conv2_2 relu pool conv3_1 relu [high]
/// 3x3 convolutions with unit padding, 2x2 max pooling. Inputs are normalized
/// with the stored per-channel mean/std before the first convolution.
class PerceptualEncoderImpl : public torch::nn::Module {
 public:
  explicit PerceptualEncoderImpl(const LevelChannels& channels = vgg_channels());

  /// Same topology with reduced 8/16/32 channels and seeded He-normal weights.
  static std::shared_ptr<PerceptualEncoderImpl> tiny_random(uint64_t seed);
  /// Loads "enc.convK_J.weight/bias", "enc.mean" and "enc.std" from a named-tensor file.
  static std::shared_ptr<PerceptualEncoderImpl> from_checkpoint(const Checkpoint& ckpt);
  void write_to(Checkpoint& ckpt) const;

  /// image: [3, H, W] RGB in [0, 1].
  StyleFeatures forward(const torch::Tensor& image) const;

  const LevelChannels& channels() const { return channels_; }
  SizePolicy size_policy = SizePolicy::Error;

  torch::nn::Conv2d conv1_1{nullptr}, conv1_2{nullptr}, conv2_1{nullptr}, conv2_2{nullptr}, conv3_1{nullptr};
  torch::Tensor input_mean;
  torch::Tensor input_std;

 private:
  LevelChannels channels_;
};
TORCH_MODULE(PerceptualEncoder);

StyleFeatures encode_levels(const PerceptualEncoder& encoder, const torch::Tensor& image);

/// Bilinear resize of a [C, h, w] map to [C, H, W] with half-pixel centers
/// (corner alignment off). Targets smaller than the source are rejected.
torch::Tensor upsample_to(const torch::Tensor& feature, int64_t height, int64_t width);

/// Per level: mean over elements of (F_l - upsample(E_l))^2; summed over the active levels.
torch::Tensor feature_supervision_loss(const LevelFeatureMaps& rendered, const StyleFeatures& encoded,
                                       const LevelSet& levels = LevelSet::all());

}  // namespace stylefield
