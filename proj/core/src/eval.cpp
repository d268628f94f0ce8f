// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/eval.hpp"

#include <cmath>
#include <sstream>

#include "stylefield/error.hpp"

namespace stylefield {

namespace {

constexpr double kNormEpsilon = 1e-10;

torch::Tensor unit_normalize(const torch::Tensor& f) {
  return f / (f.pow(2).sum(0, true).sqrt() + kNormEpsilon);
}

double correspondence_rmse(const torch::Tensor& a, const torch::Tensor& b,
                           const std::vector<Correspondence>& pairs) {
  auto ca = a.accessor<float, 3>();
  auto cb = b.accessor<float, 3>();
  double sum = 0;
  for (const auto& p : pairs) {
    for (int c = 0; c < 3; ++c) {
      const double d = static_cast<double>(ca[c][p.va][p.ua]) - cb[c][p.vb][p.ub];
      sum += d * d;
    }
  }
  return std::sqrt(sum / (3.0 * static_cast<double>(pairs.size())));
}

}  // namespace

double style_discrepancy(const std::vector<torch::Tensor>& images, const torch::Tensor& style,
                         const PerceptualEncoder& encoder) {
  STYLEFIELD_VALIDATE(!images.empty(), "style_discrepancy: image list is empty");
  torch::NoGradGuard no_grad;
  const auto target = encode_levels(encoder, style);
  double total = 0;
  for (const auto& image : images) {
    total += style_statistics_loss(encode_levels(encoder, image), target).item<double>();
  }
  return total / static_cast<double>(images.size());
}

PerceptualWeights PerceptualWeights::unit(const LevelChannels& channels) {
  PerceptualWeights w;
  for (Level level : kAllLevels) w.weights[level] = torch::ones({channels[level]});
  return w;
}

PerceptualWeights PerceptualWeights::load(const std::filesystem::path& dir) {
  auto ckpt = Checkpoint::load(dir);
  PerceptualWeights w;
  for (Level level : kAllLevels) {
    auto t = ckpt.get("lpips." + std::string(level_name(level)));
    STYLEFIELD_VALIDATE(t.dim() == 1 && (t >= 0).all().item<bool>(),
                        "perceptual weights must be non-negative vectors");
    w.weights[level] = t;
  }
  return w;
}

double content_discrepancy(const torch::Tensor& stylized, const torch::Tensor& original,
                           const PerceptualEncoder& encoder, const PerceptualWeights* weights) {
  STYLEFIELD_VALIDATE(stylized.sizes() == original.sizes(), "content_discrepancy: image shapes differ");
  torch::NoGradGuard no_grad;
  const auto fa = encode_levels(encoder, stylized);
  const auto fb = encode_levels(encoder, original);
  double total = 0;
  for (Level level : kAllLevels) {
    auto diff = (unit_normalize(fa[level]) - unit_normalize(fb[level])).pow(2);
    if (weights) {
      const auto& w = weights->weights[level];
      STYLEFIELD_VALIDATE(w.size(0) == diff.size(0), "perceptual weights do not match the encoder channels");
      diff = diff * w.to(diff.scalar_type()).view({-1, 1, 1});
    }
    total += diff.sum(0).mean().item<double>();
  }
  return total;
}

std::string AblationTable::csv() const {
  std::ostringstream out;
  out.precision(9);
  out << "variant,status,style_discrepancy,content_discrepancy\n";
  for (const auto& r : rows) {
    if (r.present) {
      out << r.label << ",ok," << r.style << ',' << r.content << '\n';
    } else {
      out << r.label << ",absent,,\n";
    }
  }
  return out.str();
}

const AblationRow& AblationTable::row(const std::string& label) const {
  for (const auto& r : rows) {
    if (r.label == label) return r;
  }
  throw ValidationError("ablation table has no row '" + label + "'");
}

AblationTable ablation_run(const std::vector<AblationEntry>& variants, const TrainingViews& test_views,
                           const std::vector<torch::Tensor>& styles, const PerceptualWeights* weights) {
  STYLEFIELD_VALIDATE(test_views.size() > 0 && !styles.empty(), "ablation_run: needs test views and styles");
  AblationTable table;
  for (const auto& entry : variants) {
    AblationRow row;
    row.label = entry.label;
    if (!entry.model) {
      table.rows.push_back(row);
      continue;
    }
    const Model& model = *entry.model;
    row.present = true;
    double style_sum = 0, content_sum = 0;
    for (const auto& style : styles) {
      std::vector<torch::Tensor> outputs;
      for (std::size_t v = 0; v < test_views.size(); ++v) {
        auto out = model.stylize_view(test_views.cameras[v], style).to(torch::kFloat32);
        content_sum += content_discrepancy(out, test_views.images[v], model.encoder, weights);
        outputs.push_back(out);
      }
      style_sum += style_discrepancy(outputs, style, model.encoder);
    }
    row.style = style_sum / static_cast<double>(styles.size());
    row.content = content_sum / static_cast<double>(styles.size() * test_views.size());
    table.rows.push_back(row);
  }
  return table;
}

Model train_variant(const SceneField& scene, const Variant& variant, const TrainingViews& views,
                    const std::vector<torch::Tensor>& styles, const RunConfig& config) {
  Model base;
  base.scene = scene;
  auto fresh = base.clone().scene;
  auto options = ModelOptions::from_config(config);
  options.variant = variant;
  Model model = Model::around_scene(fresh, options, config.seed);
  model.render = render_settings_from(config);
  train_stage1(model, views, config);
  train_stage2(model, views, styles, config);
  return model;
}

PerLevel<std::optional<InjectionParams>> identity_injection(const Model& model) {
  PerLevel<std::optional<InjectionParams>> params;
  const auto opts = model.scene->grid->projection.options();
  for (Level level : kAllLevels) {
    if (model.levels().contains(level)) params[level] = InjectionParams::identity(model.channels()[level], opts);
  }
  return params;
}

double consistency_check(const Model& model, const Camera& a, const Camera& b,
                         const std::vector<Correspondence>& correspondences, const torch::Tensor& style,
                         const std::optional<PerLevel<std::optional<InjectionParams>>>& injection) {
  STYLEFIELD_VALIDATE(!correspondences.empty(), "consistency_check: no correspondences");
  torch::NoGradGuard no_grad;
  const auto features = model.encode_style(style.to(model.scene->grid->projection.scalar_type()));
  const auto identity = identity_injection(model);
  auto run = [&](const Camera& cam) {
    auto maps = model.render_content(cam, Stage::Stage2);
    auto styled = injection ? inject_levels(maps, *injection) : model.stylize_maps(maps, features);
    auto content = inject_levels(maps, identity);
    return std::make_pair(model.decode(styled).to(torch::kFloat32).contiguous(),
                          model.decode(content).to(torch::kFloat32).contiguous());
  };
  auto [styled_a, content_a] = run(a);
  auto [styled_b, content_b] = run(b);
  const double num = correspondence_rmse(styled_a, styled_b, correspondences);
  const double den = correspondence_rmse(content_a, content_b, correspondences);
  if (den == 0.0) return num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace stylefield
