// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include <torch/torch.h>

#include "stylefield/encoder.hpp"
#include "stylefield/levels.hpp"
#include "stylefield/mlfa.hpp"

namespace stylefield {

/// Per-channel weights and biases of the 1x1 grouped convolution applied to a content map.
struct InjectionParams {
  torch::Tensor weight;  ///< [C]
  torch::Tensor bias;    ///< [C]

  static InjectionParams identity(int64_t channels, torch::TensorOptions options = {});
};

struct GeneratorOptions {
  int spatial_convs = 3;
  int se_reduction = 4;
};

/// Weight/bias generator for one level. A spatial branch (3x3 conv + ReLU, then
/// adaptive average pooling to half size, repeated; final pool to 1x1) is gated
/// elementwise by a squeeze-excitation branch (global pool, bottleneck, expand,
/// sigmoid). Two linear heads map the gated vector to w and b; the heads start
/// near w = 1, b = 0.
class StyleGeneratorImpl : public torch::nn::Module {
 public:
  StyleGeneratorImpl(int64_t channels, const GeneratorOptions& options = {});

  InjectionParams forward(const torch::Tensor& style_map) const;  ///< style_map: [C, h, w]

  int64_t channels() const { return channels_; }

  torch::nn::ModuleList convs;
  torch::nn::Linear squeeze{nullptr}, excite{nullptr};
  torch::nn::Linear weight_head{nullptr}, bias_head{nullptr};

 private:
  int64_t channels_;
};
TORCH_MODULE(StyleGenerator);

class DynamicStyleInjectionImpl : public torch::nn::Module {
 public:
  DynamicStyleInjectionImpl(const LevelChannels& channels, const GeneratorOptions& options = {},
                            LevelSet levels = LevelSet::all());

  bool has_level(Level level) const { return !generators_[level].is_empty(); }
  const StyleGenerator& generator(Level level) const { return generators_[level]; }

 private:
  PerLevel<StyleGenerator> generators_{{nullptr, nullptr, nullptr}};
};
TORCH_MODULE(DynamicStyleInjection);

InjectionParams generate_params(const StyleFeatures& style, Level level, const DynamicStyleInjection& dsi);

/// out[c, h, w] = content[c, h, w] * weight[c] + bias[c].
torch::Tensor inject(const torch::Tensor& content, const InjectionParams& params);

inline constexpr double kAdainEpsilon = 1e-5;
/// Per-channel mean and sqrt(population variance + eps) of a [C, h, w] map.
std::pair<torch::Tensor, torch::Tensor> channel_stats(const torch::Tensor& map, double eps = kAdainEpsilon);
/// (content - mean_c) / std_c * std_s + mean_s, per channel.
torch::Tensor adain_inject(const torch::Tensor& content, const torch::Tensor& style_map);

/// Nearest-neighbour downsampling of an [H, W] mask to [h, w] (source index floor(i * H / h)).
torch::Tensor downsample_mask(const torch::Tensor& mask, int64_t height, int64_t width);
/// Zeroes style features outside the mask and rescales each level by
/// (h * w) / (covered pixels) so pooled activations keep their magnitude.
StyleFeatures mask_amplify(const StyleFeatures& style, const torch::Tensor& mask);

/// Injects each level with its own params; levels without params pass through.
LevelFeatureMaps inject_levels(const LevelFeatureMaps& content, const PerLevel<std::optional<InjectionParams>>& params);

/// Style mixing: each level is injected with params generated from its own style image.
LevelFeatureMaps mix_inject(const LevelFeatureMaps& content, const PerLevel<std::optional<torch::Tensor>>& styles,
                            const PerceptualEncoder& encoder, const DynamicStyleInjection& dsi);

}  // namespace stylefield
