// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include <gtest/gtest.h>

#include "stylefield/dsi.hpp"
#include "stylefield/error.hpp"
#include "stylefield/toy_scene.hpp"
#include "stylefield/trainer.hpp"
#include "test_util.hpp"

namespace stylefield {
namespace {

using testing::f64;

TEST(RgbLoss, Definition) {
  auto a = torch::rand({3, 4, 5}, f64());
  EXPECT_EQ(rgb_recovery_loss(a, a).item<double>(), 0.0);
  auto b = a.clone();
  b[1][2][3] += 0.4;
  EXPECT_NEAR(rgb_recovery_loss(a, b).item<double>(), 0.16 / (4 * 5 * 3), 1e-15);
  auto c = torch::rand({3, 4, 5}, f64());
  double sum = 0;
  for (int64_t i = 0; i < a.numel(); ++i) sum += std::pow(a.view(-1)[i].item<double>() - c.view(-1)[i].item<double>(), 2);
  EXPECT_NEAR(rgb_recovery_loss(a, c).item<double>(), sum / 60, 1e-12);
  EXPECT_THROW(rgb_recovery_loss(a, torch::rand({3, 5, 4}, f64())), ValidationError);
}

TEST(Psnr, KnownValue) {
  EXPECT_NEAR(psnr(torch::zeros({3, 2, 2}), torch::full({3, 2, 2}, 0.1)), 20.0, 1e-5);
  EXPECT_TRUE(std::isinf(psnr(torch::ones({3, 2, 2}), torch::ones({3, 2, 2}))));
}

StyleFeatures random_features(double scale) {
  StyleFeatures f;
  for (Level level : kAllLevels) {
    const int64_t s = 8 >> static_cast<int>(level);
    f[level] = torch::randn({2 + static_cast<int64_t>(level), s, s}, f64()) * scale + scale;
  }
  return f;
}

TEST(StyleLoss, MatchesMeanStdOracle) {
  torch::manual_seed(4);
  auto a = random_features(1.0), b = random_features(2.0);
  double expected = 0;
  for (Level level : kAllLevels) {
    const auto& x = a[level];
    const auto& y = b[level];
    const int64_t c = x.size(0);
    double mean_term = 0, std_term = 0;
    for (int64_t ch = 0; ch < c; ++ch) {
      auto stats = [&](const torch::Tensor& t) {
        const int64_t n = t[ch].numel();
        double m = 0, v = 0;
        for (int64_t i = 0; i < n; ++i) m += t[ch].reshape(-1)[i].item<double>();
        m /= static_cast<double>(n);
        for (int64_t i = 0; i < n; ++i) v += std::pow(t[ch].reshape(-1)[i].item<double>() - m, 2);
        return std::pair{m, std::sqrt(v / static_cast<double>(n) + kAdainEpsilon)};
      };
      auto [mx, sx] = stats(x);
      auto [my, sy] = stats(y);
      mean_term += (mx - my) * (mx - my);
      std_term += (sx - sy) * (sx - sy);
    }
    expected += (mean_term + std_term) / static_cast<double>(c);
  }
  EXPECT_NEAR(style_statistics_loss(a, b).item<double>(), expected, 1e-10);
}

TEST(StyleContentLoss, ZeroForTheStyleImageItself) {
  PerceptualEncoder enc(PerceptualEncoderImpl::tiny_random(3));
  enc->to(torch::kFloat64);
  auto image = torch::rand({3, 8, 8}, f64());
  auto feats = encode_levels(enc, image);
  auto loss = style_content_loss(image, upsample_to(feats[Level::High], 8, 8), feats, enc, 30.0);
  EXPECT_EQ(loss.style.item<double>(), 0.0);
  EXPECT_EQ(loss.content.item<double>(), 0.0);
}

TEST(StyleContentLoss, LambdaZeroIsContentOnly) {
  PerceptualEncoder enc(PerceptualEncoderImpl::tiny_random(3));
  auto style = encode_levels(enc, torch::rand({3, 8, 8}));
  auto loss = style_content_loss(torch::rand({3, 8, 8}), torch::rand({32, 8, 8}), style, enc, 0.0);
  EXPECT_GT(loss.style.item<double>(), 0.0);
  EXPECT_EQ(loss.total.item<double>(), loss.content.item<double>());
}

struct TinySetup {
  RunConfig config;
  TrainingViews views;
  std::vector<torch::Tensor> styles;

  TinySetup() {
    config.seed = 3;
    config.grid_resolution = 8;
    config.grid_rank = 2;
    config.basic_dim = 8;
    config.samples_per_ray = 12;
    config.stage0_iterations = 4;
    config.stage0_batch_rays = 128;
    config.stage1_iterations = 3;
    config.stage2_iterations = 4;
    auto scene = ToyScene::preset("single");
    for (const auto& cam : orbit_cameras(2, 16)) {
      views.cameras.push_back(cam);
      views.images.push_back(scene.render(cam).image);
    }
    styles = generate_style_corpus(3, 16, 5);
  }

  Model model() const {
    auto options = ModelOptions::from_config(config);
    torch::manual_seed(config.seed);
    SceneField field(options.scene);
    Model m = Model::around_scene(field, options, config.seed);
    m.render = render_settings_from(config);
    return m;
  }
};

void expect_same_values(const Checkpoint& a, const Checkpoint& b) {
  ASSERT_EQ(a.records().size(), b.records().size());
  for (std::size_t i = 0; i < a.records().size(); ++i) {
    EXPECT_EQ(a.records()[i].name, b.records()[i].name);
    EXPECT_EQ(a.records()[i].values, b.records()[i].values) << a.records()[i].name;
  }
}

void expect_same_report(const LossReport& a, const LossReport& b) {
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].view, b.rows[i].view);
    EXPECT_EQ(a.rows[i].style, b.rows[i].style);
    EXPECT_EQ(a.rows[i].rgb, b.rows[i].rgb);
    EXPECT_EQ(a.rows[i].feature, b.rows[i].feature);
    EXPECT_EQ(a.rows[i].content, b.rows[i].content);
    EXPECT_EQ(a.rows[i].style_loss, b.rows[i].style_loss);
    EXPECT_EQ(a.rows[i].total, b.rows[i].total);
  }
}

TEST(Training, ZeroIterationsLeaveParametersUnchanged) {
  TinySetup setup;
  setup.config.stage0_iterations = 0;
  setup.config.stage1_iterations = 0;
  setup.config.stage2_iterations = 0;
  Model model = setup.model();
  const auto before = model.to_checkpoint();
  pretrain_scene(model.scene, setup.views, setup.config);
  auto s1 = train_stage1(model, setup.views, setup.config);
  EXPECT_TRUE(s1.report.rows.empty());
  auto s2 = train_stage2(model, setup.views, setup.styles, setup.config);
  expect_same_values(before, model.to_checkpoint());
  expect_same_values(before, s2.checkpoint);
}

TEST(Training, FixedSeedReproducesLossReports) {
  TinySetup setup;
  auto run = [&] {
    Model model = setup.model();
    std::vector<LossReport> reports;
    reports.push_back(pretrain_scene(model.scene, setup.views, setup.config).report);
    reports.push_back(train_stage1(model, setup.views, setup.config).report);
    reports.push_back(train_stage2(model, setup.views, setup.styles, setup.config).report);
    return reports;
  };
  auto a = run(), b = run();
  for (std::size_t i = 0; i < a.size(); ++i) expect_same_report(a[i], b[i]);
  EXPECT_EQ(a[2].rows.size(), 4u);
  // The style sampling sequence follows the seed.
  setup.config.seed = 4;
  Model other = setup.model();
  train_stage1(other, setup.views, setup.config);
  auto c = train_stage2(other, setup.views, setup.styles, setup.config).report;
  bool differs = false;
  for (std::size_t i = 0; i < c.rows.size(); ++i)
    differs = differs || c.rows[i].style != a[2].rows[i].style || c.rows[i].view != a[2].rows[i].view;
  EXPECT_TRUE(differs);
}

TEST(Training, MissingInputsAreConfigErrors) {
  TinySetup setup;
  Model model = setup.model();
  EXPECT_THROW(train_stage1(model, TrainingViews{}, setup.config), ConfigError);
  EXPECT_THROW(pretrain_scene(model.scene, TrainingViews{}, setup.config), ConfigError);
  EXPECT_THROW(train_stage2(model, setup.views, {}, setup.config), ConfigError);
}

TEST(LossReport, CsvColumnsFollowTheStage) {
  LossReport r;
  r.stage = Stage::Stage2;
  r.rows.push_back({0, 1, 2, 0, 0, 0, 0.5, 0.25, 8.0, 0.1});
  r.rows.push_back({1, 0, 1, 0, 0, 0, 0.5, 0.25, 4.0, 0.2});
  EXPECT_EQ(r.csv().substr(0, r.csv().find('\n')), "iteration,view,style,L_c,L_s,L_cs,seconds");
  EXPECT_EQ(r.head_mean(1), 8.0);
  EXPECT_EQ(r.tail_mean(5), 6.0);
  r.stage = Stage::Stage1;
  EXPECT_EQ(r.csv().substr(0, r.csv().find('\n')), "iteration,view,L_f,L_r,L_g,seconds");
}

TEST(TrainingViews, LoadsWrittenToyDataset) {
  const auto dir = std::filesystem::temp_directory_path() / "stylefield_views_test";
  std::filesystem::remove_all(dir);
  auto scene = ToyScene::preset("single");
  auto cams = orbit_cameras(3, 8);
  write_toy_dataset(scene, cams, dir);
  auto views = TrainingViews::load(dir / "views.txt");
  ASSERT_EQ(views.size(), 3u);
  ASSERT_TRUE(views.bounds.has_value());
  EXPECT_EQ(views.images[0].sizes(), (std::vector<int64_t>{3, 8, 8}));
  // PNG quantization bounds the difference to half a gray level.
  EXPECT_LE(testing::max_diff(views.images[2], scene.render(cams[2]).image), 0.5 / 255 + 1e-6);
  EXPECT_EQ(views.subset({2}).size(), 1u);
  EXPECT_THROW(load_style_corpus(dir / "missing"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Workers, EnvironmentOverridesConfig) {
  RunConfig config;
  config.workers = 1;
  ::setenv("STYLEFIELD_WORKERS", "abc", 1);
  EXPECT_THROW(apply_workers(config), ConfigError);
  ::setenv("STYLEFIELD_WORKERS", "1", 1);
  EXPECT_EQ(apply_workers(config), 1);
  ::unsetenv("STYLEFIELD_WORKERS");
  config.workers = 0;
  EXPECT_THROW(apply_workers(config), ConfigError);
}

}  // namespace
}  // namespace stylefield
