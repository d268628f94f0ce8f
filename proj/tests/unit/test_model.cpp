// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "stylefield/error.hpp"
#include "model_rig.hpp"

namespace stylefield {
namespace {

TEST(Variant, LabelsRoundTrip) {
  ASSERT_EQ(Variant::all().size(), 4u);
  for (const auto& v : Variant::all()) EXPECT_EQ(Variant::parse(v.label()), v);
  EXPECT_EQ(Variant{}.label(), "multi_level+dsi");
  EXPECT_THROW(Variant::parse("triple_level+dsi"), ConfigError);
}

TEST(Model, CheckpointRecoversEveryVariant) {
  for (const auto& variant : Variant::all()) {
    Model model = testing::tiny_model(variant);
    model.stage = Stage::Stage2;
    auto back = Model::from_checkpoint(model.to_checkpoint(), model.render);
    EXPECT_EQ(back.variant, variant) << variant.label();
    EXPECT_EQ(back.dsi.is_empty(), variant.injection == Injection::Adain);
    const auto cam = Camera{look_at({0.5, 0.4, 3}, Eigen::Vector3d::Zero()), Intrinsics::from_fov(8, 8, 40), {}};
    auto style = torch::rand({3, 8, 8});
    EXPECT_TRUE(torch::equal(back.stylize_view(cam, style), model.stylize_view(cam, style))) << variant.label();
  }
}

TEST(Model, SceneOnlyCheckpointIsStageZero) {
  Model model = testing::tiny_model();
  auto ckpt = model.to_checkpoint();
  for (const char* prefix : {"mlfa.", "lin.", "dsi.", "mlcd.", "enc."}) ckpt.erase_prefix(prefix);
  auto back = Model::from_checkpoint(ckpt);
  EXPECT_FALSE(back.has_pipeline());
  EXPECT_THROW(back.reconstruct_view(Camera{Pose::Identity(), Intrinsics::from_fov(8, 8, 40), {}}), ValidationError);
}

TEST(Model, WrongShapeNamesTheTensor) {
  Model model = testing::tiny_model();
  auto ckpt = model.to_checkpoint();
  const std::string name = ckpt.names_with_prefix("mlcd.").front();
  auto t = ckpt.get(name);
  ckpt.put(name, torch::zeros({t.numel() + 1}));
  try {
    Model::from_checkpoint(ckpt);
    FAIL() << "expected an error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(name), std::string::npos);
  }
}

TEST(Model, CloneIsIndependent) {
  Model model = testing::tiny_model();
  Model copy = model.clone();
  {
    torch::NoGradGuard no_grad;
    copy.decoder->to_rgb->bias.add_(1.0);
  }
  EXPECT_FALSE(torch::equal(copy.decoder->to_rgb->bias, model.decoder->to_rgb->bias));
}

TEST(Model, ParameterGroupsPartitionTrainableModules) {
  Model model = testing::tiny_model();
  std::size_t total = 0;
  for (const auto& group : {model.scene_parameters(), model.adaptor_parameters(), model.lin_parameters(),
                            model.dsi_parameters(), model.decoder_parameters()})
    total += group.size();
  std::size_t modules = model.scene->parameters().size() + model.adaptor->parameters().size() +
                        model.lin->parameters().size() + model.dsi->parameters().size() +
                        model.decoder->parameters().size();
  EXPECT_EQ(total, modules);
}

}  // namespace
}  // namespace stylefield
