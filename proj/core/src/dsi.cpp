// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/dsi.hpp"

#include "stylefield/error.hpp"

namespace F = torch::nn::functional;

namespace stylefield {

InjectionParams InjectionParams::identity(int64_t channels, torch::TensorOptions options) {
  return {torch::ones({channels}, options), torch::zeros({channels}, options)};
}

StyleGeneratorImpl::StyleGeneratorImpl(int64_t channels, const GeneratorOptions& options) : channels_(channels) {
  STYLEFIELD_VALIDATE(options.spatial_convs >= 1, "generator needs at least one spatial convolution");
  for (int i = 0; i < options.spatial_convs; ++i) {
    convs->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, channels, 3).padding(1)));
  }
  register_module("convs", convs);
  const int64_t hidden = std::max<int64_t>(1, channels / options.se_reduction);
  squeeze = register_module("squeeze", torch::nn::Linear(channels, hidden));
  excite = register_module("excite", torch::nn::Linear(hidden, channels));
  weight_head = register_module("weight_head", torch::nn::Linear(channels, channels));
  bias_head = register_module("bias_head", torch::nn::Linear(channels, channels));

  torch::NoGradGuard no_grad;
  for (auto* head : {&weight_head, &bias_head}) {
    torch::nn::init::normal_((*head)->weight, 0.0, 0.01);
  }
  weight_head->bias.fill_(1.0);
  bias_head->bias.zero_();
}

InjectionParams StyleGeneratorImpl::forward(const torch::Tensor& style_map) const {
  STYLEFIELD_VALIDATE(style_map.dim() == 3 && style_map.size(0) == channels_,
                      "generate_params: style features have " + std::to_string(style_map.size(0)) +
                          " channels, generator expects " + std::to_string(channels_));
  auto x = style_map.unsqueeze(0);
  for (const auto& conv : *convs) {
    x = torch::relu(conv->as<torch::nn::Conv2d>()->forward(x));
    const int64_t h = std::max<int64_t>(1, x.size(2) / 2), w = std::max<int64_t>(1, x.size(3) / 2);
    x = F::adaptive_avg_pool2d(x, F::AdaptiveAvgPool2dFuncOptions({h, w}));
  }
  auto spatial = F::adaptive_avg_pool2d(x, F::AdaptiveAvgPool2dFuncOptions({1, 1})).view({channels_});
  auto pooled = style_map.mean({1, 2});
  auto gate = torch::sigmoid(excite.ptr()->forward(torch::relu(squeeze.ptr()->forward(pooled))));
  auto z = spatial * gate;
  return {weight_head.ptr()->forward(z), bias_head.ptr()->forward(z)};
}

DynamicStyleInjectionImpl::DynamicStyleInjectionImpl(const LevelChannels& channels, const GeneratorOptions& options,
                                                     LevelSet levels) {
  for (Level level : kAllLevels) {
    if (!levels.contains(level)) continue;
    generators_[level] =
        register_module(std::string(level_name(level)), StyleGenerator(channels[level], options));
  }
}

InjectionParams generate_params(const StyleFeatures& style, Level level, const DynamicStyleInjection& dsi) {
  STYLEFIELD_VALIDATE(dsi->has_level(level), "no generator for level '" + std::string(level_name(level)) + "'");
  return dsi->generator(level)->forward(style[level]);
}

torch::Tensor inject(const torch::Tensor& content, const InjectionParams& params) {
  STYLEFIELD_VALIDATE(content.dim() == 3, "inject: content must be [C, H, W]");
  STYLEFIELD_VALIDATE(params.weight.dim() == 1 && params.weight.size(0) == content.size(0) &&
                          params.bias.sizes() == params.weight.sizes(),
                      "inject: injection params width does not match content channels");
  return content * params.weight.view({-1, 1, 1}) + params.bias.view({-1, 1, 1});
}

std::pair<torch::Tensor, torch::Tensor> channel_stats(const torch::Tensor& map, double eps) {
  auto flat = map.reshape({map.size(0), -1});
  auto mean = flat.mean(1);
  auto var = (flat - mean.unsqueeze(1)).pow(2).mean(1);
  return {mean, torch::sqrt(var + eps)};
}

torch::Tensor adain_inject(const torch::Tensor& content, const torch::Tensor& style_map) {
  STYLEFIELD_VALIDATE(content.dim() == 3 && style_map.dim() == 3 && content.size(0) == style_map.size(0),
                      "adain_inject: channel widths differ");
  auto [mc, sc] = channel_stats(content);
  auto [ms, ss] = channel_stats(style_map);
  return (content - mc.view({-1, 1, 1})) / sc.view({-1, 1, 1}) * ss.view({-1, 1, 1}) + ms.view({-1, 1, 1});
}

torch::Tensor downsample_mask(const torch::Tensor& mask, int64_t height, int64_t width) {
  STYLEFIELD_VALIDATE(mask.dim() == 2, "mask must be [H, W]");
  auto opts = torch::TensorOptions().dtype(torch::kInt64);
  auto rows = torch::arange(height, opts).mul(mask.size(0)).div(height, "floor");
  auto cols = torch::arange(width, opts).mul(mask.size(1)).div(width, "floor");
  return mask.index_select(0, rows).index_select(1, cols);
}

StyleFeatures mask_amplify(const StyleFeatures& style, const torch::Tensor& mask) {
  STYLEFIELD_VALIDATE(mask.dim() == 2, "mask_amplify: mask must be [H, W]");
  StyleFeatures out;
  for (Level level : kAllLevels) {
    const auto& f = style[level];
    if (!f.defined()) continue;
    auto m = (downsample_mask(mask, f.size(1), f.size(2)) > 0.5).to(f.dtype());
    const double covered = m.sum().item<double>();
    if (covered <= 0.0) throw ValidationError("style object not visible");
    const double scale = static_cast<double>(f.size(1) * f.size(2)) / covered;
    out[level] = f * m.unsqueeze(0) * scale;
  }
  return out;
}

LevelFeatureMaps inject_levels(const LevelFeatureMaps& content,
                               const PerLevel<std::optional<InjectionParams>>& params) {
  LevelFeatureMaps out = content;
  for (Level level : kAllLevels) {
    if (params[level]) out[level] = inject(content[level], *params[level]);
  }
  return out;
}

LevelFeatureMaps mix_inject(const LevelFeatureMaps& content, const PerLevel<std::optional<torch::Tensor>>& styles,
                            const PerceptualEncoder& encoder, const DynamicStyleInjection& dsi) {
  PerLevel<std::optional<InjectionParams>> params;
  for (Level level : kAllLevels) {
    if (!dsi->has_level(level)) continue;
    if (!styles[level]) {
      throw ValidationError("mix_inject: no style assigned to level '" + std::string(level_name(level)) + "'");
    }
    params[level] = generate_params(encode_levels(encoder, *styles[level]), level, dsi);
  }
  return inject_levels(content, params);
}

}  // namespace stylefield
