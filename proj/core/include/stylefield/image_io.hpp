// Copyright 2026 The Stylefield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <vector>

#include <torch/torch.h>

namespace stylefield {

/// Reads an 8-bit PNG (gray, RGB or RGBA) as a float32 [3, H, W] tensor in [0, 1].
torch::Tensor read_png(const std::filesystem::path& path);
/// Writes a [3, H, W] (or [H, W] gray) tensor as 8-bit PNG, clamping to [0, 1].
void write_png(const std::filesystem::path& path, const torch::Tensor& image);

/// 8-bit quantization used on export: round(clamp(x, 0, 1) * 255).
torch::Tensor quantize_u8(const torch::Tensor& image);

/// All *.png files in a directory, sorted by filename.
std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir);

}  // namespace stylefield
