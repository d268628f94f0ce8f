// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/properties.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "stylefield/error.hpp"
#include "stylefield/feature_renderer.hpp"
#include "stylefield/toy_scene.hpp"
#include "stylefield/trainer.hpp"

namespace stylefield {

namespace {

using Clock = std::chrono::steady_clock;

template <class Fn>
PropertyResult timed(const std::string& name, Fn&& body) {
  PropertyResult r;
  r.name = name;
  const auto start = Clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool starts_with_any(const std::string& name, const std::vector<std::string>& prefixes) {
  for (const auto& p : prefixes) {
    if (name.rfind(p, 0) == 0) return true;
  }
  return false;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

struct TinyRig {
  Model model;
  ViewCache cache;
  torch::Tensor target;
  StyleFeatures target_features;
  LevelFeatureMaps stage1_maps;
  StyleFeatures style_features;
};

TinyRig make_tiny_rig(uint64_t seed) {
  torch::manual_seed(seed);
  const auto dbl = torch::TensorOptions().dtype(torch::kFloat64);
  const LevelChannels channels{{2, 3, 4}};
  SceneFieldOptions so;
  so.resolution = {4, 4, 4};
  so.rank = 1;
  so.basic_dim = 4;
  TinyRig rig;
  Model& m = rig.model;
  m.scene = SceneField(so);
  m.encoder = PerceptualEncoder(channels);
  m.adaptor = MultiLevelAdaptor(so.basic_dim, channels, 2);
  m.lin = LearnableInstanceNorm(channels);
  m.dsi = DynamicStyleInjection(channels, GeneratorOptions{1, 2});
  m.decoder = CascadeDecoder(channels, DecoderOptions{2});
  m.to(torch::kFloat64);
  m.render.samples_per_ray = 8;
  {
    torch::NoGradGuard no_grad;
    m.scene->opacity->density.uniform_(0.5, 3.0);
    for (auto& p : m.scene->grid->parameters()) p.normal_(0.0, 1.0);
    for (Level level : kAllLevels) {
      m.lin->assign(level, 0.1 * torch::randn({channels[level]}, dbl),
                    torch::rand({channels[level]}, dbl) + 0.5);
    }
  }
  Camera cam;
  cam.world_from_camera = look_at({0.4, 0.6, 2.8}, Eigen::Vector3d::Zero());
  cam.intrinsics = Intrinsics::from_fov(8, 8, 40.0);
  rig.cache = m.cache_view(cam);
  torch::NoGradGuard no_grad;
  rig.target = torch::rand({3, 8, 8}, dbl);
  rig.target_features = encode_levels(m.encoder, rig.target);
  rig.stage1_maps = m.render_content(rig.cache, Stage::Stage1);
  rig.style_features = encode_levels(m.encoder, torch::rand({3, 8, 8}, dbl));
  return rig;
}

GradientCheck compare(const std::string& loss, const std::string& group, const std::vector<torch::Tensor>& params,
                      const std::function<torch::Tensor()>& objective) {
  GradientCheck out;
  out.loss = loss;
  out.group = group;
  for (auto& p : params) p.set_requires_grad(true);
  auto value = objective();
  auto grads = torch::autograd::grad({value}, params, {}, false, false, true);
  double diff2 = 0, analytic2 = 0, numeric2 = 0;
  torch::NoGradGuard no_grad;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k];
    auto g = grads[k].defined() ? grads[k].contiguous() : torch::zeros_like(p);
    const double* ga = g.data_ptr<double>();
    double* data = p.data_ptr<double>();
    for (int64_t i = 0; i < p.numel(); ++i) {
      const double saved = data[i];
      data[i] = saved + kGradientStep;
      const double up = objective().item<double>();
      data[i] = saved - kGradientStep;
      const double down = objective().item<double>();
      data[i] = saved;
      const double numeric = (up - down) / (2 * kGradientStep);
      diff2 += (ga[i] - numeric) * (ga[i] - numeric);
      analytic2 += ga[i] * ga[i];
      numeric2 += numeric * numeric;
    }
    out.parameters += p.numel();
  }
  const double scale = std::max(std::sqrt(analytic2), std::sqrt(numeric2));
  out.relative_error = scale == 0 ? 0 : std::sqrt(diff2) / scale;
  return out;
}

}  // namespace

PropertyResult check_volume_rendering(uint64_t seed, int draws) {
  return timed("volume_rendering_oracle", [&](PropertyResult& r) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_n(1, 8), pick_c(1, 4);
    std::uniform_real_distribution<double> sigma(0.0, 5.0), delta(0.0, 0.5), feat(-2.0, 2.0);
    double worst_weight = 0, worst_feature = 0, worst_sum = 0;
    const auto dbl = torch::TensorOptions().dtype(torch::kFloat64);
    for (int d = 0; d < draws; ++d) {
      const int n = pick_n(rng), c = pick_c(rng);
      std::vector<double> s(n), dl(n), f(n * c);
      for (int i = 0; i < n; ++i) s[i] = sigma(rng), dl[i] = delta(rng);
      for (auto& v : f) v = feat(rng);
      auto ts = torch::from_blob(s.data(), {1, n}, dbl).clone();
      auto td = torch::from_blob(dl.data(), {1, n}, dbl).clone();
      auto tf = torch::from_blob(f.data(), {1, n, c}, dbl).clone();
      auto w = compositing_weights(ts, td);
      auto px = render_pixel_feature(w, tf);
      double optical = 0, total_w = 0;
      std::vector<double> expect(c, 0.0);
      for (int i = 0; i < n; ++i) {
        double acc = 0;
        for (int j = 0; j < i; ++j) acc += s[j] * dl[j];
        const double wi = std::exp(-acc) * (1.0 - std::exp(-s[i] * dl[i]));
        worst_weight = std::max(worst_weight, std::abs(wi - w[0][i].item<double>()));
        for (int k = 0; k < c; ++k) expect[k] += wi * f[i * c + k];
        optical += s[i] * dl[i];
        total_w += w[0][i].item<double>();
      }
      for (int k = 0; k < c; ++k) worst_feature = std::max(worst_feature, std::abs(expect[k] - px[0][k].item<double>()));
      worst_sum = std::max(worst_sum, std::abs(total_w - (1.0 - std::exp(-optical))));
    }
    r.passed = worst_weight <= 1e-12 && worst_feature <= 1e-12 && worst_sum <= 1e-10;
    r.detail = "max |w - oracle| " + fmt(worst_weight) + ", max |F - oracle| " + fmt(worst_feature) +
               ", max |sum w - closed form| " + fmt(worst_sum);
  });
}

PropertyResult check_weight_bound(uint64_t seed, int draws) {
  return timed("weight_bound", [&](PropertyResult& r) {
    torch::manual_seed(seed);
    const auto dbl = torch::TensorOptions().dtype(torch::kFloat64);
    double min_w = 1, max_w = 0, max_sum = 0;
    for (int d = 0; d < draws; ++d) {
      const int64_t n = 1 + d % 64;
      auto s = torch::rand({4, n}, dbl) * std::pow(10.0, (d % 7) - 3);
      auto dl = torch::rand({4, n}, dbl) * 0.5;
      auto w = compositing_weights(s, dl);
      min_w = std::min(min_w, w.min().item<double>());
      max_w = std::max(max_w, w.max().item<double>());
      max_sum = std::max(max_sum, w.sum(1).max().item<double>());
    }
    r.passed = min_w >= 0 && max_w <= 1.0 && max_sum <= 1.0 + 1e-6;
    r.detail = "weights in [" + fmt(min_w) + ", " + fmt(max_w) + "], max weight sum - 1 = " + fmt(max_sum - 1.0);
  });
}

PropertyResult check_commutation(uint64_t seed, int draws) {
  return timed("render_inject_commutation", [&](PropertyResult& r) {
    torch::manual_seed(seed);
    double worst = 0;
    for (int d = 0; d < draws; ++d) {
      const int64_t n = 1 + d % 8, c = 1 + (d / 8) % 4;
      auto w = compositing_weights(torch::rand({1, n}) * 3, torch::rand({1, n}) * 0.5);
      auto f = torch::randn({1, n, c});
      InjectionParams params{torch::randn({c}), torch::randn({c})};
      auto pixel = render_pixel_feature(w, f).view({c, 1, 1});
      auto lhs = inject(pixel, params).view({c});
      auto rhs = render_pixel_feature(w, f * params.weight.view({1, 1, c})).view({c}) + params.bias;
      worst = std::max(worst, (lhs - rhs).abs().max().item<double>());
    }
    r.passed = worst <= 1e-6;
    r.detail = "max |inject(sum w f) - (sum w (f * weight) + bias)| " + fmt(worst);
  });
}

std::vector<GradientCheck> run_gradient_checks(uint64_t seed) {
  TinyRig rig = make_tiny_rig(seed);
  Model& m = rig.model;
  std::vector<GradientCheck> out;

  auto lf = [&] {
    return feature_supervision_loss(m.render_content(rig.cache, Stage::Stage1), rig.target_features);
  };
  auto lr = [&] { return rgb_recovery_loss(m.decode(m.render_content(rig.cache, Stage::Stage1)), rig.target); };
  auto lcs = [&] {
    auto stylized = m.decode(m.stylize_maps(m.apply_lin(rig.stage1_maps), rig.style_features));
    return style_content_loss(stylized, rig.stage1_maps[Level::High], rig.style_features, m.encoder, 30.0).total;
  };
  out.push_back(compare("L_f", "mlfa", m.adaptor_parameters(), lf));
  out.push_back(compare("L_r", "mlfa", m.adaptor_parameters(), lr));
  out.push_back(compare("L_r", "mlcd", m.decoder_parameters(), lr));
  out.push_back(compare("L_cs", "lin", m.lin_parameters(), lcs));
  out.push_back(compare("L_cs", "dsi", m.dsi_parameters(), lcs));
  out.push_back(compare("L_cs", "mlcd", m.decoder_parameters(), lcs));
  return out;
}

PropertyResult check_gradients(uint64_t seed) {
  return timed("gradient_check", [&](PropertyResult& r) {
    r.passed = true;
    std::ostringstream detail;
    for (const auto& g : run_gradient_checks(seed)) {
      const bool ok = g.relative_error <= kGradientTolerance && g.parameters <= 2000;
      r.passed = r.passed && ok;
      detail << g.loss << "/" << g.group << " (" << g.parameters << " params) rel " << fmt(g.relative_error)
             << (ok ? "" : " FAIL") << "; ";
    }
    r.detail = detail.str();
  });
}

PropertyResult check_checkpoint_roundtrip(const Checkpoint& ckpt, const std::filesystem::path& scratch) {
  return timed("checkpoint_roundtrip", [&](PropertyResult& r) {
    const auto first = scratch / "roundtrip_a";
    const auto second = scratch / "roundtrip_b";
    ckpt.save(first);
    Checkpoint::load(first).save(second);
    bool same = true;
    for (const char* file : {Checkpoint::kManifestName, Checkpoint::kBlobName}) {
      same = same && read_bytes(first / file) == read_bytes(second / file);
    }
    r.passed = same && diff_tensors(ckpt, Checkpoint::load(second)).empty();
    r.detail = std::to_string(ckpt.records().size()) + " tensors, " + (same ? "byte-identical" : "bytes differ");
  });
}

PropertyResult check_freezing(const Checkpoint& before, const Checkpoint& after,
                              const std::vector<std::string>& trainable, const std::vector<std::string>& frozen,
                              const std::string& name) {
  return timed(name, [&](PropertyResult& r) {
    std::vector<std::string> violations;
    for (const auto& changed : diff_tensors(before, after)) {
      const bool in_both = before.contains(changed) && after.contains(changed);
      if (in_both && !starts_with_any(changed, trainable)) violations.push_back(changed);
      if (!in_both && starts_with_any(changed, frozen)) violations.push_back(changed);
    }
    int frozen_count = 0;
    for (const auto& rec : before.records()) frozen_count += starts_with_any(rec.name, frozen) ? 1 : 0;
    r.passed = violations.empty() && frozen_count > 0;
    r.detail = std::to_string(frozen_count) + " frozen tensors checked";
    if (!violations.empty()) r.detail += ", unexpected change in " + violations.front();
  });
}

FreezingRun tiny_training_run(uint64_t seed) {
  RunConfig config;
  config.seed = seed;
  config.grid_resolution = 8;
  config.grid_rank = 2;
  config.basic_dim = 8;
  config.samples_per_ray = 16;
  config.stage0_iterations = 5;
  config.stage0_batch_rays = 256;
  config.stage1_iterations = 3;
  config.stage2_iterations = 3;
  auto scene = ToyScene::preset("single");
  TrainingViews views;
  for (const auto& cam : orbit_cameras(2, 16)) {
    views.cameras.push_back(cam);
    views.images.push_back(scene.render(cam).image);
  }
  auto styles = generate_style_corpus(2, 16, seed);

  FreezingRun run;
  auto options = ModelOptions::from_config(config);
  torch::manual_seed(seed);
  SceneField field(options.scene);
  run.stage0 = pretrain_scene(field, views, config).checkpoint;
  Model model = Model::around_scene(field, options, seed);
  model.render = render_settings_from(config);
  run.stage1 = train_stage1(model, views, config).checkpoint;
  run.stage2 = train_stage2(model, views, styles, config).checkpoint;
  return run;
}

std::vector<PropertyResult> run_property_suite(uint64_t seed, const std::filesystem::path& scratch,
                                               const Checkpoint* stage1, const Checkpoint* stage2) {
  std::vector<PropertyResult> results;
  results.push_back(check_volume_rendering(seed));
  results.push_back(check_weight_bound(seed));
  results.push_back(check_commutation(seed));
  results.push_back(check_gradients(seed));

  std::filesystem::create_directories(scratch);
  std::optional<FreezingRun> run;
  if (!stage1 || !stage2) {
    run = tiny_training_run(seed);
    stage1 = &run->stage1;
    stage2 = &run->stage2;
    results.push_back(check_freezing(run->stage0, run->stage1, {"mlfa.", "mlcd."}, {"scene."},
                                     "freezing_stage1"));
  }
  results.push_back(check_checkpoint_roundtrip(*stage2, scratch));
  results.push_back(check_freezing(*stage1, *stage2, {"lin.", "dsi.", "mlcd."}, {"scene.", "mlfa.", "enc."},
                                   "freezing_stage2"));
  return results;
}

}  // namespace stylefield
