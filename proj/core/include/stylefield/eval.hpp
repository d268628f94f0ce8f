// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "stylefield/model.hpp"
#include "stylefield/toy_scene.hpp"
#include "stylefield/trainer.hpp"

namespace stylefield {

/// Mean over images of the statistic-matching loss against the style image.
double style_discrepancy(const std::vector<torch::Tensor>& images, const torch::Tensor& style,
                         const PerceptualEncoder& encoder);

/// Per-channel weights of the perceptual distance; unit weights by default.
struct PerceptualWeights {
  PerLevel<torch::Tensor> weights;  ///< [C_l] each

  static PerceptualWeights unit(const LevelChannels& channels);
  /// Reads tensors "lpips.low", "lpips.mid", "lpips.high" from a checkpoint directory.
  static PerceptualWeights load(const std::filesystem::path& dir);
};

/// Distance between channel-normalized encoder features, averaged over pixels and summed over levels.
double content_discrepancy(const torch::Tensor& stylized, const torch::Tensor& original,
                           const PerceptualEncoder& encoder, const PerceptualWeights* weights = nullptr);

struct AblationEntry {
  std::string label;
  std::optional<Model> model;  ///< nullopt: checkpoint missing
};

struct AblationRow {
  std::string label;
  bool present = false;
  double style = 0;
  double content = 0;
};

struct AblationTable {
  std::vector<AblationRow> rows;

  std::string csv() const;
  const AblationRow& row(const std::string& label) const;
};

/// Stylizes every test view with every style per variant and averages both discrepancies.
/// Content discrepancy is measured against the ground-truth view.
AblationTable ablation_run(const std::vector<AblationEntry>& variants, const TrainingViews& test_views,
                           const std::vector<torch::Tensor>& styles, const PerceptualWeights* weights = nullptr);

/// Trains Stage1 and Stage2 of one variant around a copy of a fitted base field.
Model train_variant(const SceneField& scene, const Variant& variant, const TrainingViews& views,
                    const std::vector<torch::Tensor>& styles, const RunConfig& config);

/// RMSE of stylized color differences over corresponding pixels divided by the
/// same RMSE for the content pipeline (identity injection). 0/0 is defined as 1.
/// `injection` overrides the style-derived parameters when given.
double consistency_check(const Model& model, const Camera& a, const Camera& b,
                         const std::vector<Correspondence>& correspondences, const torch::Tensor& style,
                         const std::optional<PerLevel<std::optional<InjectionParams>>>& injection = std::nullopt);

/// Identity (w = 1, b = 0) parameters on every active level of the model.
PerLevel<std::optional<InjectionParams>> identity_injection(const Model& model);

}  // namespace stylefield
