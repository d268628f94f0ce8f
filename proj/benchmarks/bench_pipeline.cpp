// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "stylefield/model.hpp"

namespace stylefield {
namespace {

Model bench_model() {
  RunConfig config;
  config.grid_resolution = 24;
  config.samples_per_ray = 32;
  auto options = ModelOptions::from_config(config);
  options.scene.initial_density = 1.0;
  Model model = Model::create(options, 1);
  model.render = render_settings_from(config);
  return model;
}

Camera bench_camera(int64_t size) {
  return {look_at({0.6, 0.9, 3.0}, Eigen::Vector3d::Zero()), Intrinsics::from_fov(size, size, 40), {}};
}

void BM_CacheView(benchmark::State& state) {
  Model model = bench_model();
  const auto cam = bench_camera(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(model.cache_view(cam));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_CacheView)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_RenderCached(benchmark::State& state) {
  Model model = bench_model();
  const auto cache = model.cache_view(bench_camera(state.range(0)));
  torch::NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(model.render_content(cache, Stage::Stage2));
}
BENCHMARK(BM_RenderCached)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Encode(benchmark::State& state) {
  Model model = bench_model();
  auto image = torch::rand({3, state.range(0), state.range(0)});
  torch::NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(model.encode_style(image));
}
BENCHMARK(BM_Encode)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Inject(benchmark::State& state) {
  Model model = bench_model();
  torch::NoGradGuard no_grad;
  auto content = model.render_content(bench_camera(state.range(0)), Stage::Stage2);
  auto style = model.encode_style(torch::rand({3, 64, 64}));
  for (auto _ : state) benchmark::DoNotOptimize(model.stylize_maps(content, style));
}
BENCHMARK(BM_Inject)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Decode(benchmark::State& state) {
  Model model = bench_model();
  torch::NoGradGuard no_grad;
  auto content = model.render_content(bench_camera(state.range(0)), Stage::Stage2);
  for (auto _ : state) benchmark::DoNotOptimize(model.decode(content));
}
BENCHMARK(BM_Decode)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace stylefield

BENCHMARK_MAIN();
