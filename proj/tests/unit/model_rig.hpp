// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stylefield/model.hpp"
#include "stylefield/toy_scene.hpp"
#include "test_util.hpp"

namespace stylefield::testing {

/// Small untrained model with a non-empty field and perturbed injection heads.
inline Model tiny_model(const Variant& variant = {}, uint64_t seed = 5) {
  RunConfig config;
  config.grid_resolution = 8;
  config.grid_rank = 2;
  config.basic_dim = 8;
  config.samples_per_ray = 12;
  config.generator_convs = 1;
  config.decoder_convs_per_stage = 1;
  auto options = ModelOptions::from_config(config);
  options.variant = variant;
  options.scene.initial_density = 1.5;
  Model model = Model::create(options, seed);
  model.render = render_settings_from(config);
  if (model.dsi) {
    torch::NoGradGuard no_grad;
    for (auto& p : model.dsi->parameters()) p.add_(torch::randn_like(p) * 0.2);
  }
  return model;
}

}  // namespace stylefield::testing
