// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/toy_scene.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "stylefield/error.hpp"
#include "stylefield/image_io.hpp"

namespace stylefield {

namespace {

using Vec3 = Eigen::Vector3d;

Primitive sphere(Vec3 c, double r, Vec3 a, Vec3 b, double stripes) {
  return {Primitive::Kind::Sphere, c, Vec3::Constant(r), a, b, stripes};
}

Primitive box(Vec3 c, Vec3 half, Vec3 a, Vec3 b, double stripes) {
  return {Primitive::Kind::Box, c, half, a, b, stripes};
}

std::optional<std::pair<double, Vec3>> hit_sphere(const Primitive& p, const Vec3& o, const Vec3& d) {
  const Vec3 oc = o - p.center;
  const double r = p.size.x();
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - r * r;
  const double disc = b * b - c;
  if (disc < 0) return std::nullopt;
  const double s = std::sqrt(disc);
  double t = -b - s;
  if (t <= 1e-9) t = -b + s;
  if (t <= 1e-9) return std::nullopt;
  return std::make_pair(t, ((o + t * d) - p.center).normalized());
}

std::optional<std::pair<double, Vec3>> hit_box(const Primitive& p, const Vec3& o, const Vec3& d) {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  int axis0 = 0, axis1 = 0;
  for (int i = 0; i < 3; ++i) {
    const double lo = p.center[i] - p.size[i];
    const double hi = p.center[i] + p.size[i];
    if (std::abs(d[i]) < 1e-12) {
      if (o[i] < lo || o[i] > hi) return std::nullopt;
      continue;
    }
    double a = (lo - o[i]) / d[i];
    double b = (hi - o[i]) / d[i];
    if (a > b) std::swap(a, b);
    if (a > t0) t0 = a, axis0 = i;
    if (b < t1) t1 = b, axis1 = i;
  }
  if (t0 > t1 || t1 <= 1e-9) return std::nullopt;
  const bool entering = t0 > 1e-9;
  const double t = entering ? t0 : t1;
  const int axis = entering ? axis0 : axis1;
  Vec3 n = Vec3::Zero();
  n[axis] = (o[axis] + t * d[axis] - p.center[axis]) > 0 ? 1.0 : -1.0;
  return std::make_pair(t, n);
}

Vec3 palette_color(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> hue(0.0, 1.0), sat(0.5, 1.0), val(0.35, 1.0);
  const double h = hue(rng) * 6.0, s = sat(rng), v = val(rng);
  const double c = v * s, x = c * (1 - std::abs(std::fmod(h, 2.0) - 1)), m = v - c;
  Vec3 rgb;
  switch (static_cast<int>(h) % 6) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
  }
  return rgb.array() + m;
}

const char* kind_name(Primitive::Kind kind) { return kind == Primitive::Kind::Sphere ? "sphere" : "box"; }

}  // namespace

ToyScene ToyScene::preset(const std::string& name) {
  ToyScene s;
  if (name == "spheres") {
    s.primitives = {
        sphere({-0.42, -0.25, 0.2}, 0.38, {0.9, 0.35, 0.2}, {0.95, 0.8, 0.3}, 3.0),
        sphere({0.42, -0.3, -0.22}, 0.33, {0.2, 0.45, 0.9}, {0.6, 0.85, 0.95}, 2.0),
        sphere({0.05, 0.4, 0.05}, 0.32, {0.3, 0.8, 0.35}, {0.9, 0.9, 0.6}, 4.0),
    };
  } else if (name == "table") {
    s.primitives = {
        sphere({-0.4, -0.3, 0.2}, 0.3, {0.9, 0.35, 0.2}, {0.95, 0.8, 0.3}, 3.0),
        sphere({0.35, -0.35, -0.2}, 0.25, {0.2, 0.45, 0.9}, {0.6, 0.85, 0.95}, 2.0),
        box({0.0, -0.7, 0.0}, {0.85, 0.08, 0.7}, {0.7, 0.7, 0.72}, {0.45, 0.45, 0.5}, 1.5),
    };
  } else if (name == "single") {
    s.primitives = {sphere({0, 0, 0}, 0.6, {0.85, 0.5, 0.25}, {0.35, 0.25, 0.6}, 3.0)};
  } else if (name == "pillar") {
    s.primitives = {
        box({0.0, -0.45, 0.0}, {0.45, 0.25, 0.45}, {0.8, 0.3, 0.3}, {0.95, 0.7, 0.5}, 2.0),
        box({0.0, 0.1, 0.0}, {0.3, 0.3, 0.3}, {0.3, 0.6, 0.8}, {0.8, 0.9, 0.95}, 3.0),
        sphere({0.0, 0.62, 0.0}, 0.22, {0.9, 0.85, 0.3}, {0.5, 0.8, 0.3}, 2.0),
    };
  } else {
    throw ConfigError("unknown toy scene preset '" + name + "'");
  }
  return s;
}

std::vector<std::string> ToyScene::preset_names() { return {"spheres", "table", "single", "pillar"}; }

std::optional<SurfaceHit> ToyScene::trace(const Vec3& origin, const Vec3& direction) const {
  std::optional<SurfaceHit> best;
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    const auto& p = primitives[i];
    auto h = p.kind == Primitive::Kind::Sphere ? hit_sphere(p, origin, direction) : hit_box(p, origin, direction);
    if (!h || (best && h->first >= best->t)) continue;
    best = SurfaceHit{h->first, static_cast<int>(i), origin + h->first * direction, h->second};
  }
  return best;
}

Vec3 ToyScene::shade(const SurfaceHit& hit) const {
  const auto& p = primitives.at(hit.primitive);
  const Vec3 local = hit.point - p.center;
  const double phase = p.stripes * std::numbers::pi * (local.y() + 0.5 * local.x());
  const double mix = 0.5 + 0.5 * std::sin(phase);
  const Vec3 albedo = (1 - mix) * p.color_a + mix * p.color_b;
  const double lambert = std::max(0.0, hit.normal.dot(light));
  return (albedo * (0.35 + 0.65 * lambert)).cwiseMin(1.0);
}

ToyView ToyScene::render(const Camera& camera) const {
  const auto& k = camera.intrinsics;
  auto image = torch::zeros({3, k.height, k.width});
  auto mask = torch::zeros({k.height, k.width});
  auto img = image.accessor<float, 3>();
  auto msk = mask.accessor<float, 2>();
  const Vec3 origin = camera.world_from_camera.block<3, 1>(0, 3);
  for (int64_t v = 0; v < k.height; ++v) {
    for (int64_t u = 0; u < k.width; ++u) {
      auto hit = trace(origin, pixel_direction(camera, u, v));
      if (!hit) continue;
      const Vec3 c = shade(*hit);
      for (int ch = 0; ch < 3; ++ch) img[ch][v][u] = static_cast<float>(c[ch]);
      msk[v][u] = 1.0f;
    }
  }
  return {image, mask};
}

void ToyScene::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write scene description " + path.string());
  out.precision(17);
  out << "# stylefield toy scene\n";
  out << "light " << light.x() << ' ' << light.y() << ' ' << light.z() << '\n';
  for (const auto& p : primitives) {
    out << kind_name(p.kind);
    for (const Vec3* v : {&p.center, &p.size, &p.color_a, &p.color_b}) out << ' ' << v->x() << ' ' << v->y() << ' ' << v->z();
    out << ' ' << p.stripes << '\n';
  }
}

ToyScene ToyScene::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scene description " + path.string());
  ToyScene s;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "light") {
      if (!(ls >> s.light.x() >> s.light.y() >> s.light.z())) throw ConfigError("malformed light line");
      s.light.normalize();
      continue;
    }
    Primitive p;
    if (key == "sphere") {
      p.kind = Primitive::Kind::Sphere;
    } else if (key == "box") {
      p.kind = Primitive::Kind::Box;
    } else {
      throw ConfigError("unknown scene entry '" + key + "'");
    }
    for (Vec3* v : {&p.center, &p.size, &p.color_a, &p.color_b}) {
      if (!(ls >> v->x() >> v->y() >> v->z())) throw ConfigError("malformed " + key + " line");
    }
    if (!(ls >> p.stripes)) throw ConfigError("malformed " + key + " line");
    s.primitives.push_back(p);
  }
  return s;
}

std::vector<Camera> orbit_cameras(int count, int64_t resolution, double radius, double fov_y_degrees,
                                  double azimuth_offset_degrees) {
  STYLEFIELD_VALIDATE(count > 0 && resolution > 0, "orbit_cameras: count and resolution must be positive");
  std::vector<Camera> cams;
  const double deg = std::numbers::pi / 180.0;
  for (int i = 0; i < count; ++i) {
    const double az = (azimuth_offset_degrees + 360.0 * i / count) * deg;
    const double el = (i % 2 == 0 ? 18.0 : 34.0) * deg;
    const Vec3 eye(radius * std::cos(el) * std::sin(az), radius * std::sin(el), radius * std::cos(el) * std::cos(az));
    Camera cam;
    cam.world_from_camera = look_at(eye, Vec3::Zero());
    cam.intrinsics = Intrinsics::from_fov(resolution, resolution, fov_y_degrees);
    cams.push_back(cam);
  }
  return cams;
}

void write_toy_dataset(const ToyScene& scene, const std::vector<Camera>& cameras, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  CameraManifest manifest;
  manifest.bounds = scene.bounds;
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    Camera cam = cameras[i];
    char name[32];
    std::snprintf(name, sizeof(name), "view_%03zu.png", i);
    cam.image = name;
    write_png(dir / name, scene.render(cam).image);
    manifest.cameras.push_back(cam);
  }
  manifest.save(dir / "views.txt");
  scene.save(dir / "scene.txt");
}

std::vector<Correspondence> toy_correspondences(const ToyScene& scene, const Camera& a, const Camera& b,
                                                double tolerance) {
  std::vector<Correspondence> out;
  const Vec3 oa = a.world_from_camera.block<3, 1>(0, 3);
  const Vec3 ob = b.world_from_camera.block<3, 1>(0, 3);
  const auto& ka = a.intrinsics;
  const auto& kb = b.intrinsics;
  for (int64_t v = 0; v < ka.height; ++v) {
    for (int64_t u = 0; u < ka.width; ++u) {
      auto hit = scene.trace(oa, pixel_direction(a, u, v));
      if (!hit) continue;
      auto px = project(b, hit->point);
      if (!px) continue;
      const auto ub = static_cast<int64_t>(std::floor(px->x()));
      const auto vb = static_cast<int64_t>(std::floor(px->y()));
      if (ub < 0 || vb < 0 || ub >= kb.width || vb >= kb.height) continue;
      auto back = scene.trace(ob, pixel_direction(b, ub, vb));
      if (!back || back->primitive != hit->primitive || (back->point - hit->point).norm() > tolerance) continue;
      out.push_back({u, v, ub, vb});
    }
  }
  return out;
}

std::vector<torch::Tensor> generate_style_corpus(int count, int64_t resolution, uint64_t seed) {
  STYLEFIELD_VALIDATE(count >= 0 && resolution > 0, "generate_style_corpus: bad size");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<torch::Tensor> out;
  for (int i = 0; i < count; ++i) {
    const Vec3 c0 = palette_color(rng), c1 = palette_color(rng), c2 = palette_color(rng);
    const int pattern = i % 4;
    const double freq = 2.0 + 6.0 * unit(rng);
    const double angle = std::numbers::pi * unit(rng);
    const double ca = std::cos(angle), sa = std::sin(angle);
    std::array<Vec3, 4> blobs;
    for (auto& bl : blobs) bl = {unit(rng), unit(rng), 0.08 + 0.2 * unit(rng)};
    auto img = torch::zeros({3, resolution, resolution});
    auto acc = img.accessor<float, 3>();
    for (int64_t y = 0; y < resolution; ++y) {
      for (int64_t x = 0; x < resolution; ++x) {
        const double fx = (x + 0.5) / resolution, fy = (y + 0.5) / resolution;
        const double along = ca * fx + sa * fy;
        double m0 = 0, m1 = 0;
        switch (pattern) {
          case 0:  // stripes
            m0 = 0.5 + 0.5 * std::sin(2 * std::numbers::pi * freq * along);
            m1 = 0.5 + 0.5 * std::sin(2 * std::numbers::pi * 0.5 * freq * (ca * fy - sa * fx));
            break;
          case 1:  // checkers
            m0 = ((static_cast<int>(fx * freq) + static_cast<int>(fy * freq)) % 2) ? 1.0 : 0.0;
            m1 = fy;
            break;
          case 2: {  // rings
            const double r = std::hypot(fx - 0.5, fy - 0.5);
            m0 = 0.5 + 0.5 * std::cos(2 * std::numbers::pi * freq * r);
            m1 = std::min(1.0, 2 * r);
            break;
          }
          default:  // blobs
            for (const auto& bl : blobs) {
              m0 = std::max(m0, std::exp(-(std::pow(fx - bl.x(), 2) + std::pow(fy - bl.y(), 2)) / (bl.z() * bl.z())));
            }
            m1 = along;
            break;
        }
        const Vec3 c = (1 - m0) * ((1 - m1) * c0 + m1 * c2) + m0 * c1;
        for (int ch = 0; ch < 3; ++ch) acc[ch][y][x] = static_cast<float>(std::clamp(c[ch], 0.0, 1.0));
      }
    }
    out.push_back(img);
  }
  return out;
}

}  // namespace stylefield
