// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace armview::nn {

using Shape = std::vector<int>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of 32-bit reals.
///
/// Layers treat the leading dimension as the batch axis; everything after it
/// is the per-sample shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> values);

  const Shape& shape() const noexcept { return shape_; }
  int rank() const noexcept { return static_cast<int>(shape_.size()); }
  int dim(int axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  float* data() noexcept { return data_.data(); }
  const float* data() const noexcept { return data_.data(); }
  std::span<float> values() noexcept { return data_; }
  std::span<const float> values() const noexcept { return data_; }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  int batch() const { return shape_.empty() ? 0 : shape_[0]; }
  Shape sample_shape() const;
  std::size_t sample_size() const;
  std::span<float> sample(int b);
  std::span<const float> sample(int b) const;

  /// Same data under a new shape of equal element count.
  Tensor reshaped(Shape shape) const;
  void fill(float value);

  bool all_finite() const;
  double squared_norm() const;

 private:
  Shape shape_;
  std::vector<float> data_;
};

/// Stacks equally-shaped per-sample tensors (no batch axis) into one batch.
Tensor stack(std::span<const Tensor> samples);

}  // namespace armview::nn
