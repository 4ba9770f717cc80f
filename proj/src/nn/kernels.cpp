// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/kernels.hpp"

namespace armview::nn::detail {
namespace {

template <typename T>
MatD unfold(std::span<const T> image, int channels, int height, int width,
            const ConvGeometry& geo, int out_h, int out_w) {
  const int k = geo.kernel;
  MatD cols = MatD::Zero(static_cast<Eigen::Index>(channels) * k * k,
                         static_cast<Eigen::Index>(out_h) * out_w);
  for (int c = 0; c < channels; ++c) {
    const T* plane = image.data() + static_cast<std::size_t>(c) * height * width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* row = cols.row((c * k + ky) * k + kx).data();
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * geo.stride - geo.padding + ky;
          if (iy < 0 || iy >= height) continue;
          const T* src = plane + static_cast<std::size_t>(iy) * width;
          double* dst = row + static_cast<std::size_t>(oy) * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * geo.stride - geo.padding + kx;
            if (ix >= 0 && ix < width) dst[ox] = static_cast<double>(src[ix]);
          }
        }
      }
    }
  }
  return cols;
}

}  // namespace

MatD im2col(std::span<const float> image, int channels, int height, int width,
            const ConvGeometry& geo, int out_h, int out_w) {
  return unfold(image, channels, height, width, geo, out_h, out_w);
}

MatD im2col(std::span<const double> image, int channels, int height, int width,
            const ConvGeometry& geo, int out_h, int out_w) {
  return unfold(image, channels, height, width, geo, out_h, out_w);
}

std::vector<double> col2im(const MatD& cols, int channels, int height, int width,
                           const ConvGeometry& geo, int out_h, int out_w) {
  const int k = geo.kernel;
  std::vector<double> image(static_cast<std::size_t>(channels) * height * width, 0.0);
  for (int c = 0; c < channels; ++c) {
    double* plane = image.data() + static_cast<std::size_t>(c) * height * width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* row = cols.row((c * k + ky) * k + kx).data();
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * geo.stride - geo.padding + ky;
          if (iy < 0 || iy >= height) continue;
          double* dst = plane + static_cast<std::size_t>(iy) * width;
          const double* src = row + static_cast<std::size_t>(oy) * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * geo.stride - geo.padding + kx;
            if (ix >= 0 && ix < width) dst[ix] += src[ox];
          }
        }
      }
    }
  }
  return image;
}

}  // namespace armview::nn::detail
