// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/camera.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "stylefield/error.hpp"

namespace stylefield {

Intrinsics Intrinsics::from_fov(int64_t width, int64_t height, double fov_y_degrees) {
  Intrinsics k;
  k.width = width;
  k.height = height;
  k.fy = 0.5 * static_cast<double>(height) / std::tan(0.5 * fov_y_degrees * std::numbers::pi / 180.0);
  k.fx = k.fy;
  k.cx = 0.5 * static_cast<double>(width);
  k.cy = 0.5 * static_cast<double>(height);
  return k;
}

bool Aabb::contains(const Eigen::Vector3d& p) const {
  return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
}

bool is_rigid(const Pose& pose, double tolerance) {
  if (!pose.allFinite()) return false;
  const Eigen::Matrix3d r = pose.topLeftCorner<3, 3>();
  if ((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tolerance) return false;
  if (std::abs(r.determinant() - 1.0) > tolerance) return false;
  const Eigen::RowVector4d bottom = pose.row(3);
  return (bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() <= tolerance;
}

Pose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, const Eigen::Vector3d& up) {
  const Eigen::Vector3d z = (target - eye).normalized();
  Eigen::Vector3d x = z.cross(up);
  if (x.norm() < 1e-9) x = z.cross(Eigen::Vector3d::UnitX());
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);
  Pose pose = Pose::Identity();
  pose.block<3, 1>(0, 0) = x;
  pose.block<3, 1>(0, 1) = y;
  pose.block<3, 1>(0, 2) = z;
  pose.block<3, 1>(0, 3) = eye;
  return pose;
}

Pose rigid_inverse(const Pose& pose) {
  Pose inv = Pose::Identity();
  const Eigen::Matrix3d rt = pose.topLeftCorner<3, 3>().transpose();
  inv.topLeftCorner<3, 3>() = rt;
  inv.block<3, 1>(0, 3) = -rt * pose.block<3, 1>(0, 3);
  return inv;
}

Eigen::Vector3d pixel_direction(const Camera& camera, int64_t u, int64_t v) {
  const auto& k = camera.intrinsics;
  const Eigen::Vector3d dir_cam((static_cast<double>(u) + 0.5 - k.cx) / k.fx,
                                (static_cast<double>(v) + 0.5 - k.cy) / k.fy, 1.0);
  return (camera.world_from_camera.topLeftCorner<3, 3>() * dir_cam).normalized();
}

std::optional<Eigen::Vector2d> project(const Camera& camera, const Eigen::Vector3d& world) {
  const Pose cam_from_world = rigid_inverse(camera.world_from_camera);
  const Eigen::Vector3d p = cam_from_world.topLeftCorner<3, 3>() * world + cam_from_world.block<3, 1>(0, 3);
  if (p.z() <= 1e-9) return std::nullopt;
  const auto& k = camera.intrinsics;
  return Eigen::Vector2d(k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy);
}

RayBundle generate_rays(const Camera& camera, torch::Dtype dtype) {
  const auto& k = camera.intrinsics;
  STYLEFIELD_VALIDATE(k.width > 0 && k.height > 0, "camera resolution must be positive");
  auto opts = torch::TensorOptions().dtype(torch::kFloat64);
  auto us = torch::arange(k.width, opts).add(0.5).sub(k.cx).div(k.fx);
  auto vs = torch::arange(k.height, opts).add(0.5).sub(k.cy).div(k.fy);
  auto grid = torch::meshgrid({vs, us}, "ij");
  auto dirs_cam = torch::stack({grid[1].reshape(-1), grid[0].reshape(-1), torch::ones({k.width * k.height}, opts)}, 1);

  Eigen::Matrix<double, 3, 3, Eigen::RowMajor> rot = camera.world_from_camera.topLeftCorner<3, 3>();
  auto r = torch::from_blob(rot.data(), {3, 3}, opts).clone();
  auto dirs = torch::matmul(dirs_cam, r.t());
  dirs = dirs / dirs.norm(2, 1, true);
  Eigen::Vector3d t = camera.world_from_camera.block<3, 1>(0, 3);
  auto origin = torch::tensor({t.x(), t.y(), t.z()}, opts);
  return {origin.expand({k.width * k.height, 3}).contiguous().to(dtype), dirs.to(dtype)};
}

std::tuple<torch::Tensor, torch::Tensor, torch::Tensor> intersect_aabb(const Aabb& box,
                                                                       const torch::Tensor& origins,
                                                                       const torch::Tensor& directions) {
  auto opts = origins.options();
  auto lo = torch::tensor({box.min.x(), box.min.y(), box.min.z()}, opts);
  auto hi = torch::tensor({box.max.x(), box.max.y(), box.max.z()}, opts);
  // Replace exact zeros so the slab division stays finite.
  auto safe = torch::where(directions.abs() < 1e-12, torch::full_like(directions, 1e-12), directions);
  auto t0 = (lo - origins) / safe;
  auto t1 = (hi - origins) / safe;
  auto tmin = torch::minimum(t0, t1).amax(1);
  auto tmax = torch::maximum(t0, t1).amin(1);
  auto near = tmin.clamp_min(0.0);
  auto hit = tmax > near;
  return {near, tmax, hit};
}

void CameraManifest::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write camera manifest " + path.string());
  out.precision(17);
  out << "# stylefield camera manifest\n";
  if (bounds) {
    out << "bounds " << bounds->min.x() << ' ' << bounds->min.y() << ' ' << bounds->min.z() << ' '
        << bounds->max.x() << ' ' << bounds->max.y() << ' ' << bounds->max.z() << '\n';
  }
  for (const auto& cam : cameras) {
    const auto& k = cam.intrinsics;
    out << "view " << (cam.image.empty() ? "-" : cam.image) << ' ' << k.width << ' ' << k.height << ' ' << k.fx
        << ' ' << k.fy << ' ' << k.cx << ' ' << k.cy;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) out << ' ' << cam.world_from_camera(r, c);
    out << '\n';
  }
}

CameraManifest CameraManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open camera manifest " + path.string());
  CameraManifest manifest;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream s(line);
    std::string key;
    s >> key;
    auto fail = [&](const std::string& why) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + why);
    };
    if (key == "bounds") {
      Aabb box;
      if (!(s >> box.min.x() >> box.min.y() >> box.min.z() >> box.max.x() >> box.max.y() >> box.max.z())) {
        fail("malformed bounds");
      }
      manifest.bounds = box;
    } else if (key == "view") {
      Camera cam;
      auto& k = cam.intrinsics;
      if (!(s >> cam.image >> k.width >> k.height >> k.fx >> k.fy >> k.cx >> k.cy)) fail("malformed view");
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          if (!(s >> cam.world_from_camera(r, c))) fail("view pose needs 16 numbers");
      if (cam.image == "-") cam.image.clear();
      if (!is_rigid(cam.world_from_camera, 1e-5)) fail("view pose is not a rigid transform");
      manifest.cameras.push_back(cam);
    } else {
      fail("unknown record '" + key + "'");
    }
  }
  return manifest;
}

std::vector<Pose> load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory " + path.string());
  std::vector<Pose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream s(line);
    Pose pose;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        if (!(s >> pose(r, c))) {
          throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": pose needs 16 numbers");
        }
    if (!is_rigid(pose, 1e-5)) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": pose is not rigid");
    }
    poses.push_back(pose);
  }
  if (poses.empty()) throw ConfigError("trajectory " + path.string() + " is empty");
  return poses;
}

void save_trajectory(const std::filesystem::path& path, const std::vector<Pose>& poses) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trajectory " + path.string());
  out.precision(17);
  for (const auto& pose : poses) {
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) out << (r || c ? " " : "") << pose(r, c);
    out << '\n';
  }
}

}  // namespace stylefield
