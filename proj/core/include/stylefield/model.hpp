// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "stylefield/camera.hpp"
#include "stylefield/checkpoint.hpp"
#include "stylefield/config.hpp"
#include "stylefield/decoder.hpp"
#include "stylefield/dsi.hpp"
#include "stylefield/encoder.hpp"
#include "stylefield/feature_renderer.hpp"
#include "stylefield/mlfa.hpp"
#include "stylefield/scene_field.hpp"

namespace stylefield {

enum class Injection { Dsi, Adain };

/// Ablation axis: multi-level vs high-level-only grid, DSI vs AdaIN injection.
struct Variant {
  bool multi_level = true;
  Injection injection = Injection::Dsi;

  LevelSet levels() const { return multi_level ? LevelSet::all() : LevelSet::high_only(); }
  std::string label() const;  ///< "multi_level+dsi", "single_level+adain", ...
  static Variant parse(const std::string& label);
  static std::vector<Variant> all();
  bool operator==(const Variant&) const = default;
};

struct ModelOptions {
  SceneFieldOptions scene;
  int adaptor_depth = 2;
  GeneratorOptions generator;
  DecoderOptions decoder;
  Variant variant;
  std::string encoder_weights;  ///< empty: tiny random encoder seeded by encoder_seed
  uint64_t encoder_seed = 7;
  bool encoder_resize = false;

  static ModelOptions from_config(const RunConfig& config);
};

RenderSettings render_settings_from(const RunConfig& config);

/// Every component of the pipeline. Module members are shared handles, so
/// copies of a Model alias the same parameters; use clone() for a deep copy.
class Model {
 public:
  SceneField scene{nullptr};
  PerceptualEncoder encoder{nullptr};
  MultiLevelAdaptor adaptor{nullptr};
  LearnableInstanceNorm lin{nullptr};
  DynamicStyleInjection dsi{nullptr};  ///< null for AdaIN variants
  CascadeDecoder decoder{nullptr};
  Variant variant;
  Stage stage = Stage::Stage0;
  uint64_t seed = 0;
  uint64_t config_hash = 0;
  RenderSettings render;

  /// Fresh modules; torch's global generator is seeded with `seed` first.
  static Model create(const ModelOptions& options, uint64_t seed);
  /// Builds the pipeline modules around an existing base field.
  static Model around_scene(const SceneField& scene, const ModelOptions& options, uint64_t seed);

  Checkpoint to_checkpoint() const;
  /// Rebuilds the architecture from tensor names/shapes. A checkpoint holding
  /// only "scene.*" tensors yields a Stage0 model with no pipeline modules.
  static Model from_checkpoint(const Checkpoint& ckpt, const RenderSettings& render = {});
  Model clone() const;
  void to(torch::Dtype dtype);

  bool has_pipeline() const { return !adaptor.is_empty(); }
  LevelChannels channels() const { return encoder->channels(); }
  LevelSet levels() const { return variant.levels(); }

  ViewCache cache_view(const Camera& camera) const;
  /// Stage1 maps (no LIN) or Stage2 maps (LIN applied on active levels).
  LevelFeatureMaps render_content(const ViewCache& cache, Stage stage) const;
  LevelFeatureMaps render_content(const Camera& camera, Stage stage) const;
  LevelFeatureMaps apply_lin(const LevelFeatureMaps& stage1_maps) const;

  /// Injection params per active level from an encoded (optionally masked) style.
  PerLevel<std::optional<InjectionParams>> injection_params(const StyleFeatures& style) const;
  /// Injects style into Stage2 content maps (DSI or AdaIN per variant).
  LevelFeatureMaps stylize_maps(const LevelFeatureMaps& content, const StyleFeatures& style) const;
  StyleFeatures encode_style(const torch::Tensor& image, const std::optional<torch::Tensor>& mask = std::nullopt) const;

  torch::Tensor decode(const LevelFeatureMaps& maps) const;
  /// Full 2D-reference path for one view.
  torch::Tensor stylize_view(const Camera& camera, const torch::Tensor& style_image,
                             const std::optional<torch::Tensor>& mask = std::nullopt) const;
  /// Decodes the view without style (Stage1 maps).
  torch::Tensor reconstruct_view(const Camera& camera) const;

  std::vector<torch::Tensor> scene_parameters() const;
  std::vector<torch::Tensor> adaptor_parameters() const;
  std::vector<torch::Tensor> lin_parameters() const;
  std::vector<torch::Tensor> dsi_parameters() const;
  std::vector<torch::Tensor> decoder_parameters() const;
};

/// Copies `prefix + name` tensors from a checkpoint into a module's parameters and buffers.
void load_module(torch::nn::Module& module, const Checkpoint& ckpt, const std::string& prefix);
void store_module(const torch::nn::Module& module, Checkpoint& ckpt, const std::string& prefix);

}  // namespace stylefield
