// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/model.hpp"

#include <algorithm>
#include <set>

#include "stylefield/error.hpp"

namespace stylefield {

namespace {

int count_indexed(const Checkpoint& ckpt, const std::string& prefix, const std::string& suffix) {
  std::set<std::string> seen;
  for (const auto& name : ckpt.names_with_prefix(prefix)) {
    auto rest = name.substr(prefix.size());
    auto dot = rest.find('.');
    if (dot != std::string::npos && rest.substr(dot) == suffix) seen.insert(rest.substr(0, dot));
  }
  return static_cast<int>(seen.size());
}

template <class Holder>
std::vector<torch::Tensor> params_of(const Holder& holder) {
  if (holder.is_empty()) return {};
  return holder->parameters();
}

}  // namespace

std::string Variant::label() const {
  return std::string(multi_level ? "multi_level" : "single_level") + (injection == Injection::Dsi ? "+dsi" : "+adain");
}

Variant Variant::parse(const std::string& label) {
  for (const Variant& v : all()) {
    if (v.label() == label) return v;
  }
  throw ConfigError("unknown variant '" + label + "' (expected e.g. multi_level+dsi or single_level+adain)");
}

std::vector<Variant> Variant::all() {
  return {{true, Injection::Dsi}, {true, Injection::Adain}, {false, Injection::Dsi}, {false, Injection::Adain}};
}

ModelOptions ModelOptions::from_config(const RunConfig& config) {
  ModelOptions o;
  const int64_t r = config.grid_resolution;
  o.scene.resolution = {r, r, r};
  o.scene.rank = config.grid_rank;
  o.scene.basic_dim = config.basic_dim;
  o.scene.bounds.min = Eigen::Vector3d::Constant(-config.scene_extent);
  o.scene.bounds.max = Eigen::Vector3d::Constant(config.scene_extent);
  o.adaptor_depth = config.adaptor_depth;
  o.generator.spatial_convs = config.generator_convs;
  o.generator.se_reduction = config.se_reduction;
  o.decoder.convs_per_stage = config.decoder_convs_per_stage;
  o.variant = Variant::parse(config.variant);
  o.encoder_weights = config.encoder_weights;
  o.encoder_seed = config.encoder_seed;
  o.encoder_resize = config.encoder_resize;
  return o;
}

RenderSettings render_settings_from(const RunConfig& config) {
  RenderSettings s;
  s.samples_per_ray = config.samples_per_ray;
  s.chunk_rays = config.chunk_rays;
  s.weight_epsilon = config.weight_epsilon;
  s.seed = config.seed;
  return s;
}

void load_module(torch::nn::Module& module, const Checkpoint& ckpt, const std::string& prefix) {
  torch::NoGradGuard no_grad;
  auto copy = [&](const std::string& name, torch::Tensor& tensor) {
    const auto key = prefix + name;
    auto stored = ckpt.get(key);
    if (stored.sizes() != tensor.sizes()) {
      throw ConfigError("checkpoint tensor '" + key + "' has shape " + c10::str(stored.sizes()) + ", expected " +
                        c10::str(tensor.sizes()));
    }
    tensor.copy_(stored.to(tensor.scalar_type()));
  };
  for (auto& item : module.named_parameters()) copy(item.key(), item.value());
  for (auto& item : module.named_buffers()) copy(item.key(), item.value());
}

void store_module(const torch::nn::Module& module, Checkpoint& ckpt, const std::string& prefix) {
  for (const auto& item : module.named_parameters()) ckpt.put(prefix + item.key(), item.value());
  for (const auto& item : module.named_buffers()) ckpt.put(prefix + item.key(), item.value());
}

Model Model::create(const ModelOptions& options, uint64_t seed) {
  torch::manual_seed(seed);
  return around_scene(SceneField(options.scene), options, seed);
}

Model Model::around_scene(const SceneField& scene, const ModelOptions& options, uint64_t seed) {
  torch::manual_seed(seed + 1);
  Model m;
  m.seed = seed;
  m.scene = scene;
  m.variant = options.variant;
  if (options.encoder_weights.empty()) {
    m.encoder = PerceptualEncoder(PerceptualEncoderImpl::tiny_random(options.encoder_seed));
  } else {
    m.encoder = PerceptualEncoder(PerceptualEncoderImpl::from_checkpoint(Checkpoint::load(options.encoder_weights)));
  }
  m.encoder->size_policy = options.encoder_resize ? SizePolicy::Resize : SizePolicy::Error;
  const auto channels = m.encoder->channels();
  const LevelSet levels = options.variant.levels();
  m.adaptor = MultiLevelAdaptor(scene->basic_dim(), channels, options.adaptor_depth, levels);
  m.lin = LearnableInstanceNorm(channels);
  if (options.variant.injection == Injection::Dsi) {
    m.dsi = DynamicStyleInjection(channels, options.generator, levels);
  }
  m.decoder = CascadeDecoder(channels, options.decoder);
  return m;
}

Checkpoint Model::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.stage = std::string(stage_name(stage));
  ckpt.seed = seed;
  ckpt.config_hash = config_hash;
  store_module(*scene, ckpt, "scene.");
  if (!has_pipeline()) return ckpt;
  encoder->write_to(ckpt);
  store_module(*adaptor, ckpt, "mlfa.");
  store_module(*lin, ckpt, "lin.");
  if (dsi) store_module(*dsi, ckpt, "dsi.");
  store_module(*decoder, ckpt, "mlcd.");
  return ckpt;
}

Model Model::from_checkpoint(const Checkpoint& ckpt, const RenderSettings& render) {
  Model m;
  m.stage = parse_stage(ckpt.stage);
  m.seed = ckpt.seed;
  m.config_hash = ckpt.config_hash;
  m.render = render;

  SceneFieldOptions so;
  const auto& plane0 = ckpt.record("scene.grid.plane0").shape;  // [1, rank, R_y, R_x]
  const auto& plane1 = ckpt.record("scene.grid.plane1").shape;  // [1, rank, R_z, R_x]
  so.rank = plane0.at(1);
  so.resolution = {plane0.at(3), plane0.at(2), plane1.at(2)};
  so.basic_dim = ckpt.record("scene.grid.projection").shape.at(0);
  auto bounds = ckpt.get("scene.bounds").to(torch::kFloat64);
  for (int i = 0; i < 3; ++i) {
    so.bounds.min[i] = bounds[0][i].item<double>();
    so.bounds.max[i] = bounds[1][i].item<double>();
  }
  m.scene = SceneField(so);
  load_module(*m.scene, ckpt, "scene.");
  if (ckpt.names_with_prefix("mlfa.").empty()) return m;

  m.encoder = PerceptualEncoder(PerceptualEncoderImpl::from_checkpoint(ckpt));
  const auto channels = m.encoder->channels();

  LevelSet levels;
  int depth = 0;
  for (Level level : kAllLevels) {
    const auto prefix = "mlfa." + std::string(level_name(level)) + ".";
    levels.active[level] = !ckpt.names_with_prefix(prefix).empty();
    if (levels.active[level]) depth = count_indexed(ckpt, prefix, ".weight");
  }
  m.variant.multi_level = levels.contains(Level::Low) && levels.contains(Level::Mid);
  if (!m.variant.multi_level && (levels.contains(Level::Low) || levels.contains(Level::Mid))) {
    throw ConfigError("checkpoint adaptor levels match no known variant");
  }
  m.adaptor = MultiLevelAdaptor(so.basic_dim, channels, depth, levels);
  load_module(*m.adaptor, ckpt, "mlfa.");
  m.lin = LearnableInstanceNorm(channels);
  load_module(*m.lin, ckpt, "lin.");

  m.variant.injection = ckpt.names_with_prefix("dsi.").empty() ? Injection::Adain : Injection::Dsi;
  if (m.variant.injection == Injection::Dsi) {
    const Level any = levels.contains(Level::Low) ? Level::Low : Level::High;
    const auto prefix = "dsi." + std::string(level_name(any)) + ".";
    GeneratorOptions go;
    go.spatial_convs = count_indexed(ckpt, prefix + "convs.", ".weight");
    const int64_t hidden = ckpt.record(prefix + "squeeze.weight").shape.at(0);
    go.se_reduction = static_cast<int>(std::max<int64_t>(1, channels[any] / hidden));
    m.dsi = DynamicStyleInjection(channels, go, levels);
    load_module(*m.dsi, ckpt, "dsi.");
  }
  DecoderOptions dec;
  dec.convs_per_stage = count_indexed(ckpt, "mlcd.fuse_low.", ".weight");
  m.decoder = CascadeDecoder(channels, dec);
  load_module(*m.decoder, ckpt, "mlcd.");
  return m;
}

Model Model::clone() const {
  Model copy = from_checkpoint(to_checkpoint(), render);
  if (!encoder.is_empty()) copy.encoder->size_policy = encoder->size_policy;
  const auto dtype = scene->grid->projection.scalar_type();
  if (dtype != torch::kFloat32) copy.to(dtype);
  return copy;
}

void Model::to(torch::Dtype dtype) {
  scene->to(dtype);
  if (!has_pipeline()) return;
  encoder->to(dtype);
  adaptor->to(dtype);
  lin->to(dtype);
  if (dsi) dsi->to(dtype);
  decoder->to(dtype);
}

ViewCache Model::cache_view(const Camera& camera) const { return build_view_cache(scene, camera, render); }

LevelFeatureMaps Model::render_content(const ViewCache& cache, Stage stage) const {
  STYLEFIELD_VALIDATE(has_pipeline(), "model has no feature pipeline (Stage0 checkpoint)");
  auto maps = render_cached(cache, adaptor, lin, Stage::Stage1);
  return stage == Stage::Stage2 ? apply_lin(maps) : maps;
}

LevelFeatureMaps Model::render_content(const Camera& camera, Stage stage) const {
  return render_content(cache_view(camera), stage);
}

LevelFeatureMaps Model::apply_lin(const LevelFeatureMaps& stage1_maps) const {
  return apply_lin_to_maps(stage1_maps, lin, levels());
}

PerLevel<std::optional<InjectionParams>> Model::injection_params(const StyleFeatures& style) const {
  STYLEFIELD_VALIDATE(dsi, "injection_params: AdaIN variants have no generators");
  PerLevel<std::optional<InjectionParams>> params;
  for (Level level : kAllLevels) {
    if (levels().contains(level)) params[level] = generate_params(style, level, dsi);
  }
  return params;
}

LevelFeatureMaps Model::stylize_maps(const LevelFeatureMaps& content, const StyleFeatures& style) const {
  if (variant.injection == Injection::Dsi) return inject_levels(content, injection_params(style));
  LevelFeatureMaps out = content;
  for (Level level : kAllLevels) {
    if (levels().contains(level)) out[level] = adain_inject(content[level], style[level]);
  }
  return out;
}

StyleFeatures Model::encode_style(const torch::Tensor& image, const std::optional<torch::Tensor>& mask) const {
  auto features = encode_levels(encoder, image);
  return mask ? mask_amplify(features, *mask) : features;
}

torch::Tensor Model::decode(const LevelFeatureMaps& maps) const { return stylefield::decode(decoder, maps); }

torch::Tensor Model::stylize_view(const Camera& camera, const torch::Tensor& style_image,
                                  const std::optional<torch::Tensor>& mask) const {
  torch::NoGradGuard no_grad;
  auto content = render_content(camera, Stage::Stage2);
  return decode(stylize_maps(content, encode_style(style_image, mask)));
}

torch::Tensor Model::reconstruct_view(const Camera& camera) const {
  torch::NoGradGuard no_grad;
  return decode(render_content(camera, Stage::Stage1));
}

std::vector<torch::Tensor> Model::scene_parameters() const { return params_of(scene); }
std::vector<torch::Tensor> Model::adaptor_parameters() const { return params_of(adaptor); }
std::vector<torch::Tensor> Model::lin_parameters() const { return params_of(lin); }
std::vector<torch::Tensor> Model::dsi_parameters() const { return params_of(dsi); }
std::vector<torch::Tensor> Model::decoder_parameters() const { return params_of(decoder); }

}  // namespace stylefield
