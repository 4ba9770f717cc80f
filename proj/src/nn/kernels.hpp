// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "nn/layers.hpp"

namespace armview::nn::detail {

using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Unfolds a [channels, height, width] image into patch columns of shape
/// [channels*k*k, out_h*out_w] for the given geometry.
MatD im2col(std::span<const float> image, int channels, int height, int width,
            const ConvGeometry& geo, int out_h, int out_w);
MatD im2col(std::span<const double> image, int channels, int height, int width,
            const ConvGeometry& geo, int out_h, int out_w);

/// Adjoint of im2col: scatter-adds patch columns back onto a
/// [channels, height, width] image.
std::vector<double> col2im(const MatD& cols, int channels, int height, int width,
                           const ConvGeometry& geo, int out_h, int out_w);

inline MatD to_double(const Tensor& t, int rows, int cols) {
  return Eigen::Map<const MatF>(t.data(), rows, cols).cast<double>();
}

}  // namespace armview::nn::detail

namespace armview::nn::detail {

inline MatD to_double_span(std::span<const float> values, int rows, int cols) {
  return Eigen::Map<const MatF>(values.data(), rows, cols).cast<double>();
}

}  // namespace armview::nn::detail
