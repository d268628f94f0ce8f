// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0
//
// stylefield: train, stylize and evaluate feature-grid scenes from the command line.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stylefield/camera.hpp"
#include "stylefield/checkpoint.hpp"
#include "stylefield/config.hpp"
#include "stylefield/error.hpp"
#include "stylefield/eval.hpp"
#include "stylefield/image_io.hpp"
#include "stylefield/model.hpp"
#include "stylefield/properties.hpp"
#include "stylefield/reference3d.hpp"
#include "stylefield/toy_scene.hpp"
#include "stylefield/trainer.hpp"

namespace fs = std::filesystem;
using namespace stylefield;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFailure = 1;

struct Common {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::vector<std::string> overrides;
  bool quiet = false;

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    for (const auto& kv : overrides) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) cfg.seed = *seed;
    apply_workers(cfg);
    return cfg;
  }
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path, "Run configuration file (key = value lines)");
  cmd->add_option("--seed", common.seed, "Seed overriding the configuration");
  cmd->add_option("--set", common.overrides, "Configuration override key=value (repeatable)");
  cmd->add_flag("--quiet", common.quiet, "Suppress progress output");
}

ProgressFn progress_printer(const Common& common, int every = 50) {
  if (common.quiet) return {};
  return [every](const LossRow& row) {
    if (row.iteration % every != 0) return;
    std::printf("iter %5d  loss %.6f  %.1fs\n", row.iteration, row.total, row.seconds);
    std::fflush(stdout);
  };
}

Model load_model(const fs::path& dir, const RunConfig& cfg) {
  Model model = Model::from_checkpoint(Checkpoint::load(dir), render_settings_from(cfg));
  if (model.has_pipeline()) model.encoder->size_policy = cfg.encoder_resize ? SizePolicy::Resize : SizePolicy::Error;
  return model;
}

std::vector<Camera> cameras_for(const std::string& manifest, const std::string& trajectory, int64_t width,
                                int64_t height, double fov, int index) {
  std::vector<Camera> cams;
  if (!manifest.empty()) {
    cams = CameraManifest::load(manifest).cameras;
    if (index >= 0) {
      if (index >= static_cast<int>(cams.size())) throw ConfigError("--index is out of range");
      cams = {cams[index]};
    }
  } else if (!trajectory.empty()) {
    const auto k = Intrinsics::from_fov(width, height, fov);
    for (const auto& pose : load_trajectory(trajectory)) cams.push_back({pose, k, {}});
  } else {
    throw ConfigError("pass --view <manifest> or --trajectory <file>");
  }
  return cams;
}

void write_frames(const fs::path& dir, const std::vector<torch::Tensor>& frames) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%03zu.png", i);
    write_png(dir / name, frames[i].to(torch::kFloat32));
  }
}

Pose read_single_pose(const fs::path& path) {
  auto poses = load_trajectory(path);
  if (poses.size() != 1) throw ConfigError(path.string() + " must hold exactly one pose");
  return poses.front();
}

TrainingViews views_from(const std::string& flag, const RunConfig& cfg) {
  const std::string path = flag.empty() ? cfg.views : flag;
  if (path.empty()) throw ConfigError("missing ground-truth views: pass --views or set 'views'");
  return TrainingViews::load(path);
}

std::vector<torch::Tensor> styles_from(const std::string& flag, const RunConfig& cfg) {
  const std::string path = flag.empty() ? cfg.style_corpus : flag;
  if (path.empty()) throw ConfigError("missing style corpus: pass --styles or set 'style_corpus'");
  return load_style_corpus(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot style transfer on factorized feature grids"};
  app.require_subcommand(1);
  Common common;

  // gen-toy-scene
  std::string preset = "spheres", out;
  int view_count = 8;
  int64_t resolution = 64;
  double azimuth_offset = 0;
  auto* gen_scene = app.add_subcommand("gen-toy-scene", "Render posed views of an analytic toy scene");
  gen_scene->add_option("--preset", preset, "spheres | table | single | pillar")->capture_default_str();
  gen_scene->add_option("--count", view_count, "Number of orbit views")->capture_default_str();
  gen_scene->add_option("--resolution", resolution, "Square image size")->capture_default_str();
  gen_scene->add_option("--azimuth-offset", azimuth_offset, "Orbit start angle in degrees");
  gen_scene->add_option("--out", out, "Output directory")->required();
  add_common(gen_scene, common);

  // gen-styles
  int style_count = 20;
  auto* gen_styles = app.add_subcommand("gen-styles", "Write a procedural style image corpus");
  gen_styles->add_option("--count", style_count)->capture_default_str();
  gen_styles->add_option("--resolution", resolution)->capture_default_str();
  gen_styles->add_option("--out", out)->required();
  add_common(gen_styles, common);

  // training
  std::string views_path, scene_path, styles_path, report_path;
  auto* pretrain = app.add_subcommand("pretrain-scene", "Stage0: fit the base field photometrically");
  pretrain->add_option("--views", views_path, "Camera manifest");
  pretrain->add_option("--out", out, "Checkpoint directory")->required();
  pretrain->add_option("--report", report_path, "Loss CSV path");
  add_common(pretrain, common);

  auto* train_grid = app.add_subcommand("train-grid", "Stage1: train the multi-level feature grid and decoder");
  train_grid->add_option("--scene", scene_path, "Stage0 checkpoint")->required();
  train_grid->add_option("--views", views_path, "Camera manifest");
  train_grid->add_option("--out", out)->required();
  train_grid->add_option("--report", report_path);
  add_common(train_grid, common);

  auto* train_style = app.add_subcommand("train-style", "Stage2: train LIN, DSI and the decoder on a style corpus");
  train_style->add_option("--scene", scene_path, "Stage1 checkpoint")->required();
  train_style->add_option("--views", views_path);
  train_style->add_option("--styles", styles_path, "Directory of style PNGs");
  train_style->add_option("--out", out)->required();
  train_style->add_option("--report", report_path);
  add_common(train_style, common);

  // stylize
  std::string style_path, view_manifest, trajectory_path;
  int view_index = -1;
  int64_t width = 64, height = 64;
  double fov = 40.0;
  auto add_view_flags = [&](CLI::App* cmd) {
    cmd->add_option("--view", view_manifest, "Camera manifest of views to render");
    cmd->add_option("--index", view_index, "Render only this manifest entry");
    cmd->add_option("--trajectory", trajectory_path, "Pose file (16 numbers per line)");
    cmd->add_option("--width", width)->capture_default_str();
    cmd->add_option("--height", height)->capture_default_str();
    cmd->add_option("--fov", fov, "Vertical field of view for trajectories")->capture_default_str();
  };
  auto* stylize = app.add_subcommand("stylize", "Stylize views with a 2D style image");
  stylize->add_option("--scene", scene_path, "Stage2 checkpoint")->required();
  stylize->add_option("--style", style_path, "Style image")->required();
  add_view_flags(stylize);
  stylize->add_option("--out", out)->required();
  add_common(stylize, common);

  std::string style_views, front_content, front_style, style_field_path;
  auto* stylize3d = app.add_subcommand("stylize-3d", "Stylize a trajectory with a posed 3D style object");
  stylize3d->add_option("--scene", scene_path, "Stage2 checkpoint")->required();
  stylize3d->add_option("--style-views", style_views, "Camera manifest of the style object")->required();
  stylize3d->add_option("--front-content", front_content, "Pose file with the content front pose")->required();
  stylize3d->add_option("--front-style", front_style, "Pose file with the style front pose")->required();
  stylize3d->add_option("--style-field", style_field_path, "Reuse or store the fitted style field here");
  add_view_flags(stylize3d);
  stylize3d->add_option("--out", out)->required();
  add_common(stylize3d, common);

  std::string low_style, mid_style, high_style;
  auto* mix = app.add_subcommand("mix", "Per-level style mixing");
  mix->add_option("--scene", scene_path, "Stage2 checkpoint")->required();
  mix->add_option("--low", low_style)->required();
  mix->add_option("--mid", mid_style)->required();
  mix->add_option("--high", high_style)->required();
  add_view_flags(mix);
  mix->add_option("--out", out)->required();
  add_common(mix, common);

  // evaluation
  bool variant_table = false;
  std::vector<std::string> variant_ckpts;
  std::string weights_path;
  auto* eval = app.add_subcommand("eval", "Metric reports");
  eval->add_flag("--variant-table", variant_table, "Emit the ablation table")->required();
  eval->add_option("--variant", variant_ckpts, "label=checkpoint_dir (repeatable)")->required();
  eval->add_option("--views", views_path, "Test-view manifest");
  eval->add_option("--styles", styles_path, "Directory of test style PNGs");
  eval->add_option("--perceptual-weights", weights_path, "Checkpoint with lpips.<level> weights");
  eval->add_option("--out", out, "CSV path (stdout when omitted)");
  add_common(eval, common);

  std::string toy_path;
  std::vector<int> pair{0, 1};
  bool identity = false;
  auto* consistency = app.add_subcommand("consistency-check", "Multi-view consistency ratio on a toy scene");
  consistency->add_option("--scene", scene_path, "Stage2 checkpoint")->required();
  consistency->add_option("--views", views_path, "Camera manifest")->required();
  consistency->add_option("--toy-scene", toy_path, "Scene description written by gen-toy-scene")->required();
  consistency->add_option("--pair", pair, "Two view indices")->expected(2)->capture_default_str();
  consistency->add_option("--style", style_path, "Style image")->required();
  consistency->add_flag("--identity", identity, "Use w = 1, b = 0 injection");
  add_common(consistency, common);

  std::string stage1_path, stage2_path, scratch = "stylefield_properties";
  auto* props = app.add_subcommand("check-properties", "Numerical property suites; exit 1 on failure");
  props->add_option("--stage1", stage1_path, "Stage1 checkpoint for the freezing diff");
  props->add_option("--stage2", stage2_path, "Stage2 checkpoint for the freezing diff");
  props->add_option("--scratch", scratch, "Scratch directory")->capture_default_str();
  add_common(props, common);

  auto* render_features = app.add_subcommand("render-features", "Write per-level feature maps as images");
  render_features->add_option("--scene", scene_path, "Stage1 or Stage2 checkpoint")->required();
  add_view_flags(render_features);
  render_features->add_option("--out", out)->required();
  add_common(render_features, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const RunConfig cfg = common.resolve();
    if (*gen_scene) {
      auto scene = ToyScene::preset(preset);
      write_toy_dataset(scene, orbit_cameras(view_count, resolution, 3.2, 40.0, azimuth_offset), out);
      std::cout << "wrote " << view_count << " views to " << out << "\n";
    } else if (*gen_styles) {
      auto styles = generate_style_corpus(style_count, resolution, cfg.seed);
      fs::create_directories(out);
      for (std::size_t i = 0; i < styles.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "style_%03zu.png", i);
        write_png(fs::path(out) / name, styles[i]);
      }
      std::cout << "wrote " << styles.size() << " styles to " << out << "\n";
    } else if (*pretrain) {
      auto views = views_from(views_path, cfg);
      auto options = ModelOptions::from_config(cfg).scene;
      if (views.bounds) options.bounds = *views.bounds;
      torch::manual_seed(cfg.seed);
      SceneField field(options);
      auto result = pretrain_scene(field, views, cfg, progress_printer(common));
      result.checkpoint.save(out);
      if (!report_path.empty()) result.report.write_csv(report_path);
    } else if (*train_grid) {
      auto views = views_from(views_path, cfg);
      Model base = load_model(scene_path, cfg);
      Model model = Model::around_scene(base.scene, ModelOptions::from_config(cfg), cfg.seed);
      model.render = render_settings_from(cfg);
      auto result = train_stage1(model, views, cfg, progress_printer(common));
      result.checkpoint.save(out);
      if (!report_path.empty()) result.report.write_csv(report_path);
    } else if (*train_style) {
      auto views = views_from(views_path, cfg);
      auto styles = styles_from(styles_path, cfg);
      Model model = load_model(scene_path, cfg);
      if (model.stage != Stage::Stage1) throw ConfigError("train-style expects a Stage1 checkpoint");
      auto result = train_stage2(model, views, styles, cfg, progress_printer(common));
      result.checkpoint.save(out);
      if (!report_path.empty()) result.report.write_csv(report_path);
    } else if (*stylize) {
      Model model = load_model(scene_path, cfg);
      auto style = read_png(style_path);
      std::vector<torch::Tensor> frames;
      for (const auto& cam : cameras_for(view_manifest, trajectory_path, width, height, fov, view_index)) {
        frames.push_back(model.stylize_view(cam, style));
      }
      write_frames(out, frames);
    } else if (*stylize3d) {
      Model model = load_model(scene_path, cfg);
      auto reference = StyleReference::from_views(TrainingViews::load(style_views), read_single_pose(front_style));
      if (!style_field_path.empty() && fs::exists(fs::path(style_field_path) / Checkpoint::kManifestName)) {
        reference.field = Model::from_checkpoint(Checkpoint::load(style_field_path)).scene;
      } else {
        reference.fit(cfg);
        if (!style_field_path.empty()) {
          Model holder;
          holder.scene = reference.field;
          holder.seed = cfg.seed;
          holder.to_checkpoint().save(style_field_path);
        }
      }
      auto cams = cameras_for(view_manifest, trajectory_path, width, height, fov, view_index);
      Trajectory trajectory;
      trajectory.intrinsics = cams.front().intrinsics;
      for (const auto& c : cams) trajectory.poses.push_back(c.world_from_camera);
      write_frames(out, stylize_omniview(trajectory, model, reference, read_single_pose(front_content)));
    } else if (*mix) {
      Model model = load_model(scene_path, cfg);
      PerLevel<std::optional<torch::Tensor>> styles;
      styles[Level::Low] = read_png(low_style);
      styles[Level::Mid] = read_png(mid_style);
      styles[Level::High] = read_png(high_style);
      if (!model.dsi) throw ConfigError("mix needs a DSI checkpoint");
      std::vector<torch::Tensor> frames;
      torch::NoGradGuard no_grad;
      for (const auto& cam : cameras_for(view_manifest, trajectory_path, width, height, fov, view_index)) {
        auto content = model.render_content(cam, Stage::Stage2);
        frames.push_back(model.decode(mix_inject(content, styles, model.encoder, model.dsi)));
      }
      write_frames(out, frames);
    } else if (*eval) {
      auto views = views_from(views_path, cfg);
      auto styles = styles_from(styles_path, cfg);
      std::vector<AblationEntry> entries;
      for (const auto& spec : variant_ckpts) {
        auto eq = spec.find('=');
        if (eq == std::string::npos) throw ConfigError("--variant expects label=checkpoint_dir");
        AblationEntry entry{spec.substr(0, eq), std::nullopt};
        const fs::path dir = spec.substr(eq + 1);
        if (fs::exists(dir / Checkpoint::kManifestName)) {
          entry.model = load_model(dir, cfg);
        } else {
          std::cerr << "variant " << entry.label << ": no checkpoint at " << dir << ", listed as absent\n";
        }
        entries.push_back(std::move(entry));
      }
      std::optional<PerceptualWeights> weights;
      if (!weights_path.empty()) weights = PerceptualWeights::load(weights_path);
      auto table = ablation_run(entries, views, styles, weights ? &*weights : nullptr);
      if (out.empty()) {
        std::cout << table.csv();
      } else {
        std::ofstream(out) << table.csv();
      }
    } else if (*consistency) {
      Model model = load_model(scene_path, cfg);
      auto manifest = CameraManifest::load(views_path);
      auto scene = ToyScene::load(toy_path);
      const auto& a = manifest.cameras.at(pair[0]);
      const auto& b = manifest.cameras.at(pair[1]);
      auto matches = toy_correspondences(scene, a, b);
      std::optional<PerLevel<std::optional<InjectionParams>>> injection;
      if (identity) injection = identity_injection(model);
      const double ratio = consistency_check(model, a, b, matches, read_png(style_path), injection);
      std::cout << "correspondences," << matches.size() << "\nratio," << ratio << "\n";
    } else if (*props) {
      std::optional<Checkpoint> s1, s2;
      if (!stage1_path.empty() || !stage2_path.empty()) {
        if (stage1_path.empty() || stage2_path.empty()) throw ConfigError("pass both --stage1 and --stage2");
        s1 = Checkpoint::load(stage1_path);
        s2 = Checkpoint::load(stage2_path);
      }
      auto results = run_property_suite(cfg.seed, scratch, s1 ? &*s1 : nullptr, s2 ? &*s2 : nullptr);
      int failures = 0;
      for (const auto& r : results) {
        std::printf("%s %s (%.2fs): %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds, r.detail.c_str());
        failures += r.passed ? 0 : 1;
      }
      if (failures > 0) {
        for (const auto& r : results) {
          if (!r.passed) std::fprintf(stderr, "property failed: %s\n", r.name.c_str());
        }
        return kExitFailure;
      }
    } else if (*render_features) {
      Model model = load_model(scene_path, cfg);
      auto cams = cameras_for(view_manifest, trajectory_path, width, height, fov, view_index);
      fs::create_directories(out);
      torch::NoGradGuard no_grad;
      for (std::size_t i = 0; i < cams.size(); ++i) {
        auto maps = model.render_content(cams[i], model.stage == Stage::Stage2 ? Stage::Stage2 : Stage::Stage1);
        for (Level level : kAllLevels) {
          auto f = maps[level].narrow(0, 0, 3).to(torch::kFloat32);
          const auto lo = f.min(), hi = f.max();
          f = (f - lo) / (hi - lo).clamp_min(1e-8);
          char name[48];
          std::snprintf(name, sizeof(name), "view_%03zu_%s.png", i, std::string(level_name(level)).c_str());
          write_png(fs::path(out) / name, f);
        }
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
