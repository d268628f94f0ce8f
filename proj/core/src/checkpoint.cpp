// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#include "stylefield/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <zlib.h>

#include "stylefield/error.hpp"

namespace stylefield {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written as native little-endian float32");

namespace {

std::string shape_string(const std::vector<int64_t>& shape) {
  if (shape.empty()) return "scalar";
  std::ostringstream out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  return out.str();
}

std::vector<int64_t> parse_shape(const std::string& text) {
  std::vector<int64_t> shape;
  if (text == "scalar") return shape;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(part, &used);
      if (used != part.size() || v < 0) throw std::invalid_argument(part);
      shape.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("checkpoint manifest: bad shape '" + text + "'");
    }
  }
  return shape;
}

int64_t numel_of(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string hex(uint64_t value, int width) {
  std::ostringstream out;
  out << std::hex << std::setw(width) << std::setfill('0') << value;
  return out.str();
}

}  // namespace

uint32_t checksum(const void* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, static_cast<const Bytef*>(data), static_cast<uInt>(size));
  return static_cast<uint32_t>(crc);
}

void Checkpoint::put(const std::string& name, const torch::Tensor& tensor) {
  STYLEFIELD_VALIDATE(!name.empty() && name.find_first_of(" \t\n") == std::string::npos,
                      "checkpoint tensor names must be non-empty and whitespace-free");
  auto t = tensor.detach().to(torch::kCPU, torch::kFloat32).contiguous();
  Record rec;
  rec.name = name;
  rec.shape.assign(t.sizes().begin(), t.sizes().end());
  rec.values.assign(t.data_ptr<float>(), t.data_ptr<float>() + t.numel());
  auto it = std::find_if(records_.begin(), records_.end(),
                         [&](const Record& r) { return r.name == name; });
  if (it != records_.end()) {
    *it = std::move(rec);
  } else {
    records_.push_back(std::move(rec));
  }
}

bool Checkpoint::contains(const std::string& name) const {
  return std::any_of(records_.begin(), records_.end(),
                     [&](const Record& r) { return r.name == name; });
}

const Checkpoint::Record& Checkpoint::record(const std::string& name) const {
  auto it = std::find_if(records_.begin(), records_.end(),
                         [&](const Record& r) { return r.name == name; });
  if (it == records_.end()) throw ConfigError("checkpoint has no tensor named '" + name + "'");
  return *it;
}

torch::Tensor Checkpoint::get(const std::string& name) const {
  const Record& rec = record(name);
  auto t = torch::empty(rec.shape, torch::kFloat32);
  std::memcpy(t.data_ptr<float>(), rec.values.data(), rec.values.size() * sizeof(float));
  return t;
}

std::vector<std::string> Checkpoint::names_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& r : records_) {
    if (r.name.rfind(prefix, 0) == 0) out.push_back(r.name);
  }
  return out;
}

void Checkpoint::erase_prefix(const std::string& prefix) {
  std::erase_if(records_, [&](const Record& r) { return r.name.rfind(prefix, 0) == 0; });
}

void Checkpoint::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream blob(dir / kBlobName, std::ios::binary | std::ios::trunc);
  std::ofstream manifest(dir / kManifestName, std::ios::trunc);
  if (!blob || !manifest) throw ConfigError("cannot write checkpoint to " + dir.string());

  manifest << "stylefield-checkpoint " << kFormatVersion << '\n';
  manifest << "stage " << stage << '\n';
  manifest << "config_hash " << hex(config_hash, 16) << '\n';
  manifest << "seed " << seed << '\n';
  uint64_t offset = 0;
  for (const auto& rec : records_) {
    const std::size_t bytes = rec.values.size() * sizeof(float);
    blob.write(reinterpret_cast<const char*>(rec.values.data()), static_cast<std::streamsize>(bytes));
    manifest << "tensor " << rec.name << " f32 " << shape_string(rec.shape) << ' ' << offset << ' '
             << bytes << ' ' << hex(checksum(rec.values.data(), bytes), 8) << '\n';
    offset += bytes;
  }
  if (!blob || !manifest) throw ConfigError("failed writing checkpoint to " + dir.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / kManifestName);
  if (!manifest) throw ConfigError("missing checkpoint manifest in " + dir.string());
  std::ifstream blob_file(dir / kBlobName, std::ios::binary);
  if (!blob_file) throw ConfigError("missing checkpoint blob in " + dir.string());
  std::vector<char> blob((std::istreambuf_iterator<char>(blob_file)), std::istreambuf_iterator<char>());

  Checkpoint ckpt;
  std::string line;
  int line_no = 0;
  bool saw_version = false;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string key;
    in >> key;
    auto fail = [&](const std::string& why) {
      throw ConfigError("checkpoint manifest line " + std::to_string(line_no) + ": " + why);
    };
    if (key == "stylefield-checkpoint") {
      int version = 0;
      in >> version;
      if (version != kFormatVersion) fail("unsupported format version " + std::to_string(version));
      saw_version = true;
    } else if (key == "stage") {
      in >> ckpt.stage;
    } else if (key == "config_hash") {
      std::string h;
      in >> h;
      ckpt.config_hash = std::stoull(h, nullptr, 16);
    } else if (key == "seed") {
      in >> ckpt.seed;
    } else if (key == "tensor") {
      std::string name, dtype, shape, crc_hex;
      uint64_t offset = 0, length = 0;
      if (!(in >> name >> dtype >> shape >> offset >> length >> crc_hex)) fail("malformed tensor record");
      if (dtype != "f32") fail("unsupported dtype '" + dtype + "'");
      Record rec;
      rec.name = name;
      rec.shape = parse_shape(shape);
      const uint64_t expected = static_cast<uint64_t>(numel_of(rec.shape)) * sizeof(float);
      if (length != expected) fail("byte length does not match shape for '" + name + "'");
      if (offset > blob.size() || length > blob.size() - offset) fail("extent of '" + name + "' lies outside the blob");
      if (checksum(blob.data() + offset, length) != static_cast<uint32_t>(std::stoul(crc_hex, nullptr, 16))) {
        fail("checksum mismatch for '" + name + "'");
      }
      rec.values.resize(length / sizeof(float));
      std::memcpy(rec.values.data(), blob.data() + offset, length);
      if (ckpt.contains(name)) fail("duplicate tensor '" + name + "'");
      ckpt.records_.push_back(std::move(rec));
    } else {
      fail("unknown record '" + key + "'");
    }
  }
  if (!saw_version) throw ConfigError("checkpoint manifest lacks a format header");
  return ckpt;
}

std::vector<std::string> diff_tensors(const Checkpoint& a, const Checkpoint& b) {
  std::vector<std::string> changed;
  for (const auto& ra : a.records()) {
    if (!b.contains(ra.name)) {
      changed.push_back(ra.name);
      continue;
    }
    const auto& rb = b.record(ra.name);
    if (ra.shape != rb.shape ||
        std::memcmp(ra.values.data(), rb.values.data(), ra.values.size() * sizeof(float)) != 0) {
      changed.push_back(ra.name);
    }
  }
  for (const auto& rb : b.records()) {
    if (!a.contains(rb.name)) changed.push_back(rb.name);
  }
  return changed;
}

}  // namespace stylefield
