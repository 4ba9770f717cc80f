// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "common/error.hpp"

namespace armview::nn {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw shape_error("non-positive dimension in " + shape_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, float fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_size(shape_) != data_.size()) {
    throw shape_error("tensor data length " + std::to_string(data_.size()) +
                      " does not match shape " + shape_string(shape_));
  }
}

Shape Tensor::sample_shape() const {
  if (shape_.empty()) return {};
  return Shape(shape_.begin() + 1, shape_.end());
}

std::size_t Tensor::sample_size() const {
  return shape_.empty() || shape_[0] == 0 ? 0 : data_.size() / static_cast<std::size_t>(shape_[0]);
}

std::span<float> Tensor::sample(int b) {
  const std::size_t n = sample_size();
  return std::span<float>(data_).subspan(static_cast<std::size_t>(b) * n, n);
}

std::span<const float> Tensor::sample(int b) const {
  const std::size_t n = sample_size();
  return std::span<const float>(data_).subspan(static_cast<std::size_t>(b) * n, n);
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw shape_error("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  Tensor out;
  out.shape_ = std::move(shape);
  out.data_ = data_;
  return out;
}

void Tensor::fill(float value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

double Tensor::squared_norm() const {
  double s = 0.0;
  for (float v : data_) s += static_cast<double>(v) * v;
  return s;
}

Tensor stack(std::span<const Tensor> samples) {
  if (samples.empty()) throw invalid_argument("stack: no samples");
  Shape shape = samples.front().shape();
  shape.insert(shape.begin(), static_cast<int>(samples.size()));
  std::vector<float> values;
  values.reserve(shape_size(shape));
  for (const Tensor& t : samples) {
    if (t.shape() != samples.front().shape()) {
      throw shape_error("stack: mismatched sample shapes " + shape_string(t.shape()) + " vs " +
                        shape_string(samples.front().shape()));
    }
    values.insert(values.end(), t.values().begin(), t.values().end());
  }
  return Tensor(std::move(shape), std::move(values));
}

}  // namespace armview::nn
