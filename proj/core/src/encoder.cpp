// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/encoder.hpp"

#include <cmath>
#include <iostream>

#include "stylefield/error.hpp"

namespace F = torch::nn::functional;

namespace stylefield {

namespace {

torch::nn::Conv2d conv3x3(int64_t in, int64_t out) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).padding(1));
}

const char* const kConvNames[] = {"conv1_1", "conv1_2", "conv2_1", "conv2_2", "conv3_1"};

}  // namespace

PerceptualEncoderImpl::PerceptualEncoderImpl(const LevelChannels& channels) : channels_(channels) {
  const auto c1 = channels[Level::Low], c2 = channels[Level::Mid], c3 = channels[Level::High];
  conv1_1 = register_module("conv1_1", conv3x3(3, c1));
  conv1_2 = register_module("conv1_2", conv3x3(c1, c1));
  conv2_1 = register_module("conv2_1", conv3x3(c1, c2));
  conv2_2 = register_module("conv2_2", conv3x3(c2, c2));
  conv3_1 = register_module("conv3_1", conv3x3(c2, c3));
  input_mean = register_buffer("mean", torch::tensor({0.485, 0.456, 0.406}, torch::kFloat32));
  input_std = register_buffer("std", torch::tensor({0.229, 0.224, 0.225}, torch::kFloat32));
  for (auto& p : parameters()) p.set_requires_grad(false);
}

std::shared_ptr<PerceptualEncoderImpl> PerceptualEncoderImpl::tiny_random(uint64_t seed) {
  auto enc = std::make_shared<PerceptualEncoderImpl>(tiny_channels());
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  torch::NoGradGuard no_grad;
  for (auto* conv : {&enc->conv1_1, &enc->conv1_2, &enc->conv2_1, &enc->conv2_2, &enc->conv3_1}) {
    auto& w = (*conv)->weight;
    const double fan_in = static_cast<double>(w.size(1) * w.size(2) * w.size(3));
    w.copy_(at::normal(0.0, std::sqrt(2.0 / fan_in), w.sizes(), gen));
    (*conv)->bias.copy_(at::normal(0.0, 0.01, (*conv)->bias.sizes(), gen));
  }
  return enc;
}

std::shared_ptr<PerceptualEncoderImpl> PerceptualEncoderImpl::from_checkpoint(const Checkpoint& ckpt) {
  LevelChannels channels{{ckpt.record("enc.conv1_1.weight").shape.at(0), ckpt.record("enc.conv2_1.weight").shape.at(0),
                          ckpt.record("enc.conv3_1.weight").shape.at(0)}};
  auto enc = std::make_shared<PerceptualEncoderImpl>(channels);
  torch::NoGradGuard no_grad;
  for (auto& item : enc->named_parameters()) {
    auto& tensor = item.value();
    const auto key = "enc." + item.key();
    auto stored = ckpt.get(key);
    if (stored.sizes() != tensor.sizes()) throw ConfigError("encoder tensor '" + key + "' has the wrong shape");
    tensor.copy_(stored);
  }
  enc->input_mean.copy_(ckpt.get("enc.mean"));
  enc->input_std.copy_(ckpt.get("enc.std"));
  return enc;
}

void PerceptualEncoderImpl::write_to(Checkpoint& ckpt) const {
  for (const char* conv : kConvNames) {
    const auto& module = *named_children()[conv]->as<torch::nn::Conv2dImpl>();
    ckpt.put(std::string("enc.") + conv + ".weight", module.weight);
    ckpt.put(std::string("enc.") + conv + ".bias", module.bias);
  }
  ckpt.put("enc.mean", input_mean);
  ckpt.put("enc.std", input_std);
}

StyleFeatures PerceptualEncoderImpl::forward(const torch::Tensor& image) const {
  STYLEFIELD_VALIDATE(image.dim() == 3 && image.size(0) == 3, "encode_levels: image must be [3, H, W]");
  torch::Tensor x = image;
  const int64_t h = image.size(1), w = image.size(2);
  if (h < 4 || w < 4 || h % 4 != 0 || w % 4 != 0) {
    if (size_policy == SizePolicy::Error) {
      throw ValidationError("encode_levels: image size " + std::to_string(h) + "x" + std::to_string(w) +
                            " must be >= 4 and divisible by 4");
    }
    const int64_t th = std::max<int64_t>(4, h / 4 * 4), tw = std::max<int64_t>(4, w / 4 * 4);
    std::cerr << "warning: resizing " << h << "x" << w << " encoder input to " << th << "x" << tw << '\n';
    x = F::interpolate(x.unsqueeze(0), F::InterpolateFuncOptions()
                                           .size(std::vector<int64_t>{th, tw})
                                           .mode(torch::kBilinear)
                                           .align_corners(false))
            .squeeze(0);
  }
  x = ((x - input_mean.view({3, 1, 1}).to(x.dtype())) / input_std.view({3, 1, 1}).to(x.dtype())).unsqueeze(0);
  StyleFeatures out;
  x = torch::relu(conv1_1.ptr()->forward(x));
  out[Level::Low] = x.squeeze(0);
  x = torch::relu(conv1_2.ptr()->forward(x));
  x = F::max_pool2d(x, F::MaxPool2dFuncOptions(2).stride(2));
  x = torch::relu(conv2_1.ptr()->forward(x));
  out[Level::Mid] = x.squeeze(0);
  x = torch::relu(conv2_2.ptr()->forward(x));
  x = F::max_pool2d(x, F::MaxPool2dFuncOptions(2).stride(2));
  x = torch::relu(conv3_1.ptr()->forward(x));
  out[Level::High] = x.squeeze(0);
  return out;
}

StyleFeatures encode_levels(const PerceptualEncoder& encoder, const torch::Tensor& image) {
  return encoder->forward(image);
}

torch::Tensor upsample_to(const torch::Tensor& feature, int64_t height, int64_t width) {
  STYLEFIELD_VALIDATE(feature.dim() == 3, "upsample_to: feature must be [C, h, w]");
  STYLEFIELD_VALIDATE(height >= feature.size(1) && width >= feature.size(2),
                      "upsample_to: target must not be smaller than the source");
  if (height == feature.size(1) && width == feature.size(2)) return feature;
  return F::interpolate(feature.unsqueeze(0), F::InterpolateFuncOptions()
                                                  .size(std::vector<int64_t>{height, width})
                                                  .mode(torch::kBilinear)
                                                  .align_corners(false))
      .squeeze(0);
}

torch::Tensor feature_supervision_loss(const LevelFeatureMaps& rendered, const StyleFeatures& encoded,
                                       const LevelSet& levels) {
  torch::Tensor total;
  for (Level level : kAllLevels) {
    if (!levels.contains(level)) continue;
    const auto& f = rendered[level];
    auto target = upsample_to(encoded[level], f.size(1), f.size(2));
    STYLEFIELD_VALIDATE(target.sizes() == f.sizes(), "feature_supervision_loss: shapes do not reconcile at level '" +
                                                         std::string(level_name(level)) + "'");
    auto term = (f - target).pow(2).mean();
    total = total.defined() ? total + term : term;
  }
  STYLEFIELD_VALIDATE(total.defined(), "feature_supervision_loss: no active levels");
  return total;
}

}  // namespace stylefield
