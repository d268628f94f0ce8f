// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/mlfa.hpp"

#include "stylefield/error.hpp"

namespace stylefield {

MultiLevelAdaptorImpl::MultiLevelAdaptorImpl(int64_t basic_dim, const LevelChannels& channels, int depth,
                                             LevelSet levels)
    : basic_dim_(basic_dim), channels_(channels), levels_(levels) {
  STYLEFIELD_VALIDATE(depth >= 1, "adaptor depth must be >= 1");
  for (Level level : kAllLevels) {
    if (!levels_.contains(level)) continue;
    torch::nn::Sequential mlp;
    int64_t in = basic_dim;
    for (int i = 0; i < depth; ++i) {
      if (i > 0) mlp->push_back(torch::nn::ReLU());
      mlp->push_back(torch::nn::Linear(in, channels[level]));
      in = channels[level];
    }
    mlps_[level] = register_module(std::string(level_name(level)), mlp);
  }
}

torch::Tensor MultiLevelAdaptorImpl::forward(const torch::Tensor& basic, Level level) const {
  STYLEFIELD_VALIDATE(has_level(level), "adaptor has no '" + std::string(level_name(level)) + "' level");
  STYLEFIELD_VALIDATE(basic.dim() >= 1 && basic.size(-1) == basic_dim_,
                      "adapt: basic feature width " + std::to_string(basic.dim() ? basic.size(-1) : 0) +
                          " does not match C_b = " + std::to_string(basic_dim_));
  return mlps_[level].ptr()->forward(basic);
}

LearnableInstanceNormImpl::LearnableInstanceNormImpl(const LevelChannels& channels) {
  for (Level level : kAllLevels) {
    auto holder = register_module(std::string(level_name(level)), std::make_shared<torch::nn::Module>());
    means_[level] = holder->register_parameter("mean", torch::zeros({channels[level]}));
    raw_scales_[level] = holder->register_parameter("raw_scale", raw_for_scale(torch::ones({channels[level]})));
  }
}

torch::Tensor LearnableInstanceNormImpl::raw_for_scale(const torch::Tensor& scale) {
  // softplus^-1(y) = y + log(-expm1(-y))
  auto y = scale.to(torch::kFloat64) - kScaleFloor;
  return (y + torch::log(-torch::expm1(-y))).to(scale.scalar_type());
}

torch::Tensor LearnableInstanceNormImpl::scale(Level level) const {
  return torch::nn::functional::softplus(raw_scales_[level]) + kScaleFloor;
}

void LearnableInstanceNormImpl::assign(Level level, const torch::Tensor& mean, const torch::Tensor& scale) {
  STYLEFIELD_VALIDATE((scale > kScaleFloor).all().item<bool>(), "LIN scale must exceed the 1e-4 floor");
  torch::NoGradGuard no_grad;
  means_[level].copy_(mean);
  raw_scales_[level].copy_(raw_for_scale(scale.to(raw_scales_[level].scalar_type())));
}

torch::Tensor LearnableInstanceNormImpl::forward(const torch::Tensor& x, Level level) const {
  return lin(x, means_[level], scale(level));
}

torch::Tensor lin(const torch::Tensor& x, const torch::Tensor& mean, const torch::Tensor& scale) {
  STYLEFIELD_VALIDATE(x.size(-1) == mean.size(0) && mean.sizes() == scale.sizes(), "lin: channel width mismatch");
  return (x - mean) / scale;
}

torch::Tensor adapt(const MultiLevelAdaptor& adaptor, const LearnableInstanceNorm& norm, const torch::Tensor& basic,
                    Level level, Stage stage) {
  auto f = adaptor->forward(basic, level);
  return stage == Stage::Stage2 ? norm->forward(f, level) : f;
}

}  // namespace stylefield
