// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nn/tensor.hpp"

namespace armview::world {

/// Planar [channel][row][col] image with intensities in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> pixels;

  Image() = default;
  Image(int h, int w, int c, float fill = 0.0f)
      : height(h), width(w), channels(c),
        pixels(static_cast<std::size_t>(h) * w * c, fill) {}

  std::size_t size() const { return pixels.size(); }
  float& at(int c, int y, int x) {
    return pixels[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return pixels[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }

  nn::Tensor to_tensor() const;
  static Image from_tensor(std::span<const float> values, int channels, int height, int width);

  bool operator==(const Image&) const = default;
};

/// Binary H x W mask.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(int h, int w, bool fill = false)
      : height(h), width(w), bits(static_cast<std::size_t>(h) * w, fill ? 1 : 0) {}

  bool at(int y, int x) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int y, int x, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t count() const;
  bool any() const { return count() > 0; }

  bool operator==(const Mask&) const = default;
};

/// Rounds every intensity to the nearest multiple of 1/255, the precision the
/// 8-bit image files keep.
void quantize(Image& image);

/// Binary PPM (P6, maxval 255) for 3-channel images; P5 for 1-channel ones.
void write_pnm(const Image& image, const std::filesystem::path& path);
Image read_pnm(const std::filesystem::path& path);

/// P5 PGM with 0 = false, 255 = true.
void write_mask(const Mask& mask, const std::filesystem::path& path);
Mask read_mask(const std::filesystem::path& path);

}  // namespace armview::world
