// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "stylefield/error.hpp"

namespace stylefield {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (!in || !in.eof()) throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
std::string show(const T& v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

#define SF_NUM(name)                                                                          \
  Field {                                                                                     \
    #name,                                                                                    \
        [](RunConfig& c, const std::string& k, const std::string& v) {                        \
          c.name = parse_number<decltype(c.name)>(k, v);                                      \
        },                                                                                    \
        [](const RunConfig& c) { return show(c.name); }                                       \
  }
#define SF_STR(name)                                                                          \
  Field {                                                                                     \
    #name, [](RunConfig& c, const std::string&, const std::string& v) { c.name = v; },        \
        [](const RunConfig& c) { return c.name; }                                             \
  }
#define SF_BOOL(name)                                                                         \
  Field {                                                                                     \
    #name,                                                                                    \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.name = parse_bool(k, v); }, \
        [](const RunConfig& c) { return std::string(c.name ? "true" : "false"); }             \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      SF_NUM(seed),
      SF_NUM(workers),
      SF_NUM(grid_resolution),
      SF_NUM(grid_rank),
      SF_NUM(basic_dim),
      SF_NUM(scene_extent),
      SF_STR(encoder_weights),
      SF_NUM(encoder_seed),
      SF_BOOL(encoder_resize),
      SF_NUM(adaptor_depth),
      SF_NUM(generator_convs),
      SF_NUM(se_reduction),
      SF_NUM(decoder_convs_per_stage),
      SF_STR(variant),
      SF_NUM(samples_per_ray),
      SF_NUM(chunk_rays),
      SF_NUM(weight_epsilon),
      SF_NUM(stage0_iterations),
      SF_NUM(stage0_lr),
      SF_NUM(stage0_density_lr),
      SF_NUM(stage0_batch_rays),
      SF_NUM(stage1_iterations),
      SF_NUM(stage1_lr),
      SF_NUM(stage2_iterations),
      SF_NUM(stage2_lr),
      SF_NUM(stage2_decoder_lr),
      SF_NUM(style_weight),
      SF_STR(views),
      SF_STR(style_corpus),
  };
  return table;
}

#undef SF_NUM
#undef SF_STR
#undef SF_BOOL

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
  };
  require(c.workers >= 1, "workers must be >= 1");
  require(c.grid_resolution >= 2, "grid_resolution must be >= 2");
  require(c.grid_rank >= 1, "grid_rank must be >= 1");
  require(c.basic_dim >= 1, "basic_dim must be >= 1");
  require(c.scene_extent > 0, "scene_extent must be > 0");
  require(c.adaptor_depth >= 1, "adaptor_depth must be >= 1");
  require(c.generator_convs >= 1, "generator_convs must be >= 1");
  require(c.se_reduction >= 1, "se_reduction must be >= 1");
  require(c.decoder_convs_per_stage >= 1, "decoder_convs_per_stage must be >= 1");
  require(c.samples_per_ray >= 1, "samples_per_ray must be >= 1");
  require(c.chunk_rays >= 1, "chunk_rays must be >= 1");
  require(c.weight_epsilon >= 0, "weight_epsilon must be >= 0");
  require(c.stage0_iterations >= 0 && c.stage1_iterations >= 0 && c.stage2_iterations >= 0,
          "iterations must be >= 0");
  require(c.stage0_lr > 0 && c.stage0_density_lr > 0 && c.stage1_lr > 0 && c.stage2_lr > 0 &&
              c.stage2_decoder_lr > 0,
          "learning rates must be > 0");
  require(c.stage0_batch_rays >= 1, "stage0_batch_rays must be >= 1");
  require(c.style_weight >= 0, "style_weight must be >= 0");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(*this, key, value);
      validate(*this);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  for (const auto& f : fields()) out << f.key << " = " << f.get(*this) << '\n';
  return out.str();
}

uint64_t RunConfig::hash() const {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : to_text()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

}  // namespace stylefield
