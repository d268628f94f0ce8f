// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "stylefield/camera.hpp"
#include "stylefield/checkpoint.hpp"
#include "stylefield/config.hpp"
#include "stylefield/model.hpp"

namespace stylefield {

/// Posed ground-truth images.
struct TrainingViews {
  std::vector<Camera> cameras;
  std::vector<torch::Tensor> images;  ///< [3, H, W] each
  std::optional<Aabb> bounds;

  std::size_t size() const { return cameras.size(); }
  /// Reads a camera manifest and the images it names (relative to the manifest).
  static TrainingViews load(const std::filesystem::path& manifest);
  TrainingViews subset(const std::vector<std::size_t>& indices) const;
};

/// Loads every PNG in a directory, sorted by name.
std::vector<torch::Tensor> load_style_corpus(const std::filesystem::path& dir);

struct LossRow {
  int iteration = 0;
  int view = -1;
  int style = -1;
  double feature = 0;     ///< L_f
  double rgb = 0;         ///< L_r (photometric loss in Stage0)
  double grid = 0;        ///< L_g
  double content = 0;     ///< L_c
  double style_loss = 0;  ///< L_s
  double total = 0;       ///< optimized objective
  double seconds = 0;     ///< wall-clock time since the stage started
};

struct LossReport {
  Stage stage = Stage::Stage0;
  std::vector<LossRow> rows;

  std::string csv() const;
  void write_csv(const std::filesystem::path& path) const;
  /// Mean of `total` over the first and last `window` rows.
  double head_mean(std::size_t window) const;
  double tail_mean(std::size_t window) const;
  double head_mean(std::size_t window, double LossRow::*field) const;
  double tail_mean(std::size_t window, double LossRow::*field) const;
};

struct StageResult {
  Checkpoint checkpoint;
  LossReport report;
};

/// Optional per-iteration hook (progress output).
using ProgressFn = std::function<void(const LossRow&)>;

double psnr(const torch::Tensor& a, const torch::Tensor& b);

torch::Tensor rgb_recovery_loss(const torch::Tensor& decoded, const torch::Tensor& target);

/// Mean/std matching over all three encoder levels.
torch::Tensor style_statistics_loss(const StyleFeatures& stylized, const StyleFeatures& style);

struct StyleContentLoss {
  torch::Tensor content;  ///< L_c
  torch::Tensor style;    ///< L_s
  torch::Tensor total;    ///< L_c + lambda * L_s
};
/// `content_high` is the Stage1 high-level map of the view (treated as a constant).
StyleContentLoss style_content_loss(const torch::Tensor& stylized, const torch::Tensor& content_high,
                                    const StyleFeatures& style, const PerceptualEncoder& encoder, double lambda);

/// Stage0: fits density, factorized grid and color head to the views photometrically.
StageResult pretrain_scene(SceneField& scene, const TrainingViews& views, const RunConfig& config,
                           const ProgressFn& progress = {});

/// Stage1: trains the multi-level adaptor and decoder with L_g = L_f + L_r; the base field stays frozen.
StageResult train_stage1(Model& model, const TrainingViews& views, const RunConfig& config,
                         const ProgressFn& progress = {});

/// Stage2: trains LIN, DSI and the decoder with L_cs; the base field and adaptor stay frozen.
StageResult train_stage2(Model& model, const TrainingViews& views, const std::vector<torch::Tensor>& styles,
                         const RunConfig& config, const ProgressFn& progress = {});

/// Applies the worker count to torch's intra-op pool; STYLEFIELD_WORKERS overrides the config.
int apply_workers(const RunConfig& config);

}  // namespace stylefield
