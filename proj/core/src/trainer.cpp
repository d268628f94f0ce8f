// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "stylefield/error.hpp"
#include "stylefield/image_io.hpp"

namespace stylefield {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_views(const TrainingViews& views) {
  if (views.size() == 0) throw ConfigError("missing ground-truth views: the view manifest lists no images");
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (!views.images[i].defined()) throw ConfigError("missing ground-truth image for view " + std::to_string(i));
  }
}

void set_trainable(const std::vector<torch::Tensor>& params, bool trainable) {
  for (auto t : params) t.set_requires_grad(trainable);
}

}  // namespace

TrainingViews TrainingViews::load(const std::filesystem::path& manifest_path) {
  auto manifest = CameraManifest::load(manifest_path);
  TrainingViews views;
  views.bounds = manifest.bounds;
  for (const auto& cam : manifest.cameras) {
    if (cam.image.empty()) throw ConfigError("missing ground-truth views: a manifest entry has no image");
    auto image = read_png(manifest_path.parent_path() / cam.image);
    if (image.size(1) != cam.intrinsics.height || image.size(2) != cam.intrinsics.width) {
      throw ConfigError("image " + cam.image + " does not match its camera resolution");
    }
    views.cameras.push_back(cam);
    views.images.push_back(image);
  }
  return views;
}

TrainingViews TrainingViews::subset(const std::vector<std::size_t>& indices) const {
  TrainingViews out;
  out.bounds = bounds;
  for (auto i : indices) {
    out.cameras.push_back(cameras.at(i));
    out.images.push_back(images.at(i));
  }
  return out;
}

std::vector<torch::Tensor> load_style_corpus(const std::filesystem::path& dir) {
  std::vector<torch::Tensor> out;
  for (const auto& path : list_pngs(dir)) out.push_back(read_png(path));
  if (out.empty()) throw ConfigError("style corpus " + dir.string() + " holds no PNG images");
  return out;
}

std::string LossReport::csv() const {
  std::ostringstream out;
  out.precision(9);
  switch (stage) {
    case Stage::Stage0: out << "iteration,rgb,seconds\n"; break;
    case Stage::Stage1: out << "iteration,view,L_f,L_r,L_g,seconds\n"; break;
    case Stage::Stage2: out << "iteration,view,style,L_c,L_s,L_cs,seconds\n"; break;
  }
  for (const auto& r : rows) {
    switch (stage) {
      case Stage::Stage0: out << r.iteration << ',' << r.rgb << ',' << r.seconds << '\n'; break;
      case Stage::Stage1:
        out << r.iteration << ',' << r.view << ',' << r.feature << ',' << r.rgb << ',' << r.grid << ',' << r.seconds
            << '\n';
        break;
      case Stage::Stage2:
        out << r.iteration << ',' << r.view << ',' << r.style << ',' << r.content << ',' << r.style_loss << ','
            << r.total << ',' << r.seconds << '\n';
        break;
    }
  }
  return out.str();
}

void LossReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write loss report " + path.string());
  out << csv();
}

double LossReport::head_mean(std::size_t window) const { return head_mean(window, &LossRow::total); }
double LossReport::tail_mean(std::size_t window) const { return tail_mean(window, &LossRow::total); }

double LossReport::head_mean(std::size_t window, double LossRow::*field) const {
  STYLEFIELD_VALIDATE(!rows.empty(), "loss report is empty");
  const std::size_t n = std::min(window, rows.size());
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) sum += rows[i].*field;
  return sum / static_cast<double>(n);
}

double LossReport::tail_mean(std::size_t window, double LossRow::*field) const {
  STYLEFIELD_VALIDATE(!rows.empty(), "loss report is empty");
  const std::size_t n = std::min(window, rows.size());
  double sum = 0;
  for (std::size_t i = rows.size() - n; i < rows.size(); ++i) sum += rows[i].*field;
  return sum / static_cast<double>(n);
}

double psnr(const torch::Tensor& a, const torch::Tensor& b) {
  const double mse = (a.clamp(0, 1) - b.clamp(0, 1)).pow(2).mean().item<double>();
  return mse <= 0 ? std::numeric_limits<double>::infinity() : -10.0 * std::log10(mse);
}

torch::Tensor rgb_recovery_loss(const torch::Tensor& decoded, const torch::Tensor& target) {
  STYLEFIELD_VALIDATE(decoded.sizes() == target.sizes(), "rgb_recovery_loss: image shapes differ");
  return (decoded - target).pow(2).mean();
}

torch::Tensor style_statistics_loss(const StyleFeatures& stylized, const StyleFeatures& style) {
  torch::Tensor total;
  for (Level level : kAllLevels) {
    auto [mu_a, sd_a] = channel_stats(stylized[level]);
    auto [mu_b, sd_b] = channel_stats(style[level]);
    auto term = (mu_a - mu_b).pow(2).mean() + (sd_a - sd_b).pow(2).mean();
    total = total.defined() ? total + term : term;
  }
  return total;
}

StyleContentLoss style_content_loss(const torch::Tensor& stylized, const torch::Tensor& content_high,
                                    const StyleFeatures& style, const PerceptualEncoder& encoder, double lambda) {
  auto encoded = encode_levels(encoder, stylized);
  auto high = upsample_to(encoded[Level::High], content_high.size(1), content_high.size(2));
  StyleContentLoss loss;
  loss.content = (high - content_high.detach()).pow(2).mean();
  loss.style = style_statistics_loss(encoded, style);
  loss.total = loss.content + lambda * loss.style;
  return loss;
}

int apply_workers(const RunConfig& config) {
  int workers = config.workers;
  if (const char* env = std::getenv("STYLEFIELD_WORKERS")) {
    try {
      workers = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError("STYLEFIELD_WORKERS must be an integer");
    }
  }
  if (workers < 1) throw ConfigError("worker count must be >= 1");
  torch::set_num_threads(workers);
  return workers;
}

StageResult pretrain_scene(SceneField& scene, const TrainingViews& views, const RunConfig& config,
                           const ProgressFn& progress) {
  require_views(views);
  const auto start = Clock::now();
  torch::manual_seed(config.seed);
  const auto dtype = scene->grid->projection.scalar_type();

  std::vector<torch::Tensor> origins, directions, colors;
  for (std::size_t i = 0; i < views.size(); ++i) {
    auto rays = generate_rays(views.cameras[i], dtype);
    origins.push_back(rays.origins);
    directions.push_back(rays.directions);
    colors.push_back(views.images[i].to(dtype).reshape({3, -1}).t());
  }
  auto all_o = torch::cat(origins), all_d = torch::cat(directions), all_c = torch::cat(colors);
  const int64_t total_rays = all_o.size(0);

  std::vector<torch::Tensor> field_params;
  for (auto& p : scene->grid->parameters()) field_params.push_back(p);
  for (auto& p : scene->color->parameters()) field_params.push_back(p);
  torch::optim::Adam optimizer(
      {torch::optim::OptimizerParamGroup(field_params, std::make_unique<torch::optim::AdamOptions>(config.stage0_lr)),
       torch::optim::OptimizerParamGroup({scene->opacity->density},
                                         std::make_unique<torch::optim::AdamOptions>(config.stage0_density_lr))});

  auto gen = at::make_generator<at::CPUGeneratorImpl>(config.seed);
  RenderSettings settings = render_settings_from(config);
  settings.jitter = true;
  const int64_t batch = std::min(config.stage0_batch_rays, total_rays);

  StageResult result;
  result.report.stage = Stage::Stage0;
  for (int it = 0; it < config.stage0_iterations; ++it) {
    auto idx = torch::randint(total_rays, {batch}, gen, torch::TensorOptions().dtype(torch::kInt64));
    settings.seed = config.seed * 1000003ULL + static_cast<uint64_t>(it);
    auto pred = render_rgb_rays(scene, all_o.index_select(0, idx), all_d.index_select(0, idx), settings);
    auto loss = (pred - all_c.index_select(0, idx)).pow(2).mean();
    optimizer.zero_grad();
    loss.backward();
    optimizer.step();
    scene->opacity->clamp_nonnegative();

    LossRow row;
    row.iteration = it;
    row.rgb = row.total = loss.item<double>();
    row.seconds = elapsed(start);
    result.report.rows.push_back(row);
    if (progress) progress(row);
  }
  Model holder;
  holder.scene = scene;
  holder.stage = Stage::Stage0;
  holder.seed = config.seed;
  holder.config_hash = config.hash();
  result.checkpoint = holder.to_checkpoint();
  return result;
}

StageResult train_stage1(Model& model, const TrainingViews& views, const RunConfig& config,
                         const ProgressFn& progress) {
  require_views(views);
  STYLEFIELD_VALIDATE(model.has_pipeline(), "train_stage1: model has no feature pipeline");
  const auto start = Clock::now();
  torch::manual_seed(config.seed);
  const auto dtype = model.scene->grid->projection.scalar_type();

  set_trainable(model.scene_parameters(), false);
  std::vector<ViewCache> caches;
  std::vector<StyleFeatures> targets;
  std::vector<torch::Tensor> images;
  {
    torch::NoGradGuard no_grad;
    for (std::size_t i = 0; i < views.size(); ++i) {
      caches.push_back(model.cache_view(views.cameras[i]));
      images.push_back(views.images[i].to(dtype));
      targets.push_back(encode_levels(model.encoder, images.back()));
    }
  }

  std::vector<torch::Tensor> params = model.adaptor_parameters();
  for (auto& p : model.decoder_parameters()) params.push_back(p);
  set_trainable(params, true);
  torch::optim::Adam optimizer(params, torch::optim::AdamOptions(config.stage1_lr));

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order;
  StageResult result;
  result.report.stage = Stage::Stage1;
  for (int it = 0; it < config.stage1_iterations; ++it) {
    if (order.empty()) {
      order.resize(views.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::shuffle(order.begin(), order.end(), rng);
    }
    const std::size_t v = order.back();
    order.pop_back();

    auto maps = model.render_content(caches[v], Stage::Stage1);
    auto lf = feature_supervision_loss(maps, targets[v], model.levels());
    auto lr = rgb_recovery_loss(model.decode(maps), images[v]);
    auto lg = lf + lr;
    optimizer.zero_grad();
    lg.backward();
    optimizer.step();

    LossRow row;
    row.iteration = it;
    row.view = static_cast<int>(v);
    row.feature = lf.item<double>();
    row.rgb = lr.item<double>();
    row.grid = row.total = lg.item<double>();
    row.seconds = elapsed(start);
    result.report.rows.push_back(row);
    if (progress) progress(row);
  }
  model.stage = Stage::Stage1;
  model.config_hash = config.hash();
  result.checkpoint = model.to_checkpoint();
  return result;
}

StageResult train_stage2(Model& model, const TrainingViews& views, const std::vector<torch::Tensor>& styles,
                         const RunConfig& config, const ProgressFn& progress) {
  require_views(views);
  STYLEFIELD_VALIDATE(model.has_pipeline(), "train_stage2: model has no feature pipeline");
  if (styles.empty()) throw ConfigError("train_stage2: the style corpus is empty");
  const auto start = Clock::now();
  torch::manual_seed(config.seed);
  const auto dtype = model.scene->grid->projection.scalar_type();

  set_trainable(model.scene_parameters(), false);
  set_trainable(model.adaptor_parameters(), false);
  std::vector<LevelFeatureMaps> content;
  std::vector<StyleFeatures> style_features;
  {
    torch::NoGradGuard no_grad;
    for (const auto& cam : views.cameras) content.push_back(model.render_content(model.cache_view(cam), Stage::Stage1));
    for (const auto& s : styles) style_features.push_back(encode_levels(model.encoder, s.to(dtype)));
  }

  std::vector<torch::optim::OptimizerParamGroup> groups;
  std::vector<torch::Tensor> norm_params = model.lin_parameters();
  for (auto& p : model.dsi_parameters()) norm_params.push_back(p);
  set_trainable(norm_params, true);
  set_trainable(model.decoder_parameters(), true);
  groups.emplace_back(norm_params, std::make_unique<torch::optim::AdamOptions>(config.stage2_lr));
  groups.emplace_back(model.decoder_parameters(), std::make_unique<torch::optim::AdamOptions>(config.stage2_decoder_lr));
  torch::optim::Adam optimizer(std::move(groups));

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick_view(0, views.size() - 1), pick_style(0, styles.size() - 1);
  StageResult result;
  result.report.stage = Stage::Stage2;
  for (int it = 0; it < config.stage2_iterations; ++it) {
    const std::size_t v = pick_view(rng);
    const std::size_t s = pick_style(rng);
    auto maps = model.stylize_maps(model.apply_lin(content[v]), style_features[s]);
    auto stylized = model.decode(maps);
    auto loss = style_content_loss(stylized, content[v][Level::High], style_features[s], model.encoder,
                                   config.style_weight);
    optimizer.zero_grad();
    loss.total.backward();
    optimizer.step();

    LossRow row;
    row.iteration = it;
    row.view = static_cast<int>(v);
    row.style = static_cast<int>(s);
    row.content = loss.content.item<double>();
    row.style_loss = loss.style.item<double>();
    row.total = loss.total.item<double>();
    row.seconds = elapsed(start);
    result.report.rows.push_back(row);
    if (progress) progress(row);
  }
  model.stage = Stage::Stage2;
  model.config_hash = config.hash();
  result.checkpoint = model.to_checkpoint();
  return result;
}

}  // namespace stylefield
