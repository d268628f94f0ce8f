// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include "stylefield/levels.hpp"

namespace stylefield {

/// Active levels of a model variant. Single-level variants keep only the high level.
struct LevelSet {
  PerLevel<bool> active{{true, true, true}};

  bool contains(Level level) const { return active[level]; }
  static LevelSet all() { return {}; }
  static LevelSet high_only() { return {{{false, false, true}}}; }
};

/// Per-level point-feature MLPs mapping basic features (C_b) to C_l channels.
/// Depth d gives d linear layers of width C_l with ReLU between them.
class MultiLevelAdaptorImpl : public torch::nn::Module {
 public:
  MultiLevelAdaptorImpl(int64_t basic_dim, const LevelChannels& channels, int depth = 2,
                        LevelSet levels = LevelSet::all());

  torch::Tensor forward(const torch::Tensor& basic, Level level) const;

  bool has_level(Level level) const { return levels_.contains(level); }
  const LevelSet& levels() const { return levels_; }
  int64_t basic_dim() const { return basic_dim_; }
  const LevelChannels& channels() const { return channels_; }
  torch::nn::Sequential& mlp(Level level) { return mlps_[level]; }

 private:
  int64_t basic_dim_;
  LevelChannels channels_;
  LevelSet levels_;
  PerLevel<torch::nn::Sequential> mlps_;
};
TORCH_MODULE(MultiLevelAdaptor);

/// Learnable instance normalization: per-level, per-channel mean and scale
/// shared by every point of the scene. scale = softplus(raw_scale) + 1e-4.
class LearnableInstanceNormImpl : public torch::nn::Module {
 public:
  static constexpr double kScaleFloor = 1e-4;

  explicit LearnableInstanceNormImpl(const LevelChannels& channels);

  torch::Tensor forward(const torch::Tensor& x, Level level) const;  ///< x: [..., C_l]
  torch::Tensor mean(Level level) const { return means_[level]; }
  torch::Tensor scale(Level level) const;
  /// Sets mean and scale directly (scale must be > 1e-4).
  void assign(Level level, const torch::Tensor& mean, const torch::Tensor& scale);

  /// Raw parameter value whose softplus + floor equals `scale`.
  static torch::Tensor raw_for_scale(const torch::Tensor& scale);

 private:
  PerLevel<torch::Tensor> means_;
  PerLevel<torch::Tensor> raw_scales_;
};
TORCH_MODULE(LearnableInstanceNorm);

/// Elementwise (x - mean) / scale.
torch::Tensor lin(const torch::Tensor& x, const torch::Tensor& mean, const torch::Tensor& scale);

/// Point features of one level: Stage1 -> MLP(P); Stage2 -> LIN(MLP(P)).
torch::Tensor adapt(const MultiLevelAdaptor& adaptor, const LearnableInstanceNorm& norm, const torch::Tensor& basic,
                    Level level, Stage stage);

}  // namespace stylefield
