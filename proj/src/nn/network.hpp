// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nn/layers.hpp"
#include "nn/tensor.hpp"

namespace armview::nn {

/// Cached activations of one forward pass; produced by Network::forward and
/// consumed by backward and tangent passes.
struct Trace {
  std::vector<LayerCache> layers;
  Mode mode = Mode::kEval;
  bool valid = false;
};

/// Per-parameter gradient buffers aligned with Network::parameter_names().
using Gradients = std::vector<Tensor>;

enum class JacobianMode {
  kAuto,     // tangent (column) pass when inputs < outputs, else reverse
  kReverse,  // one backward pass per output row
  kForward,  // one tangent pass per input column
};

/// Feed-forward chain of layers with a stable parameter registry.
class Network {
 public:
  explicit Network(Shape input_shape);
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  /// Appends a layer; its expected input must match the current output shape.
  Network& add(std::unique_ptr<Layer> layer);
  template <typename L, typename... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    add(std::move(layer));
    return ref;
  }

  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const { return shapes_.back(); }
  std::size_t input_size() const { return shape_size(input_shape_); }
  std::size_t output_size() const { return shape_size(output_shape()); }
  std::size_t num_layers() const { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  bool has_dropout() const;

  /// Parameters in registry order; indices are stable after construction.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  const std::vector<std::string>& parameter_names() const { return names_; }
  std::size_t parameter_count() const;
  Gradients zero_gradients() const;

  void initialize(std::uint64_t seed);

  /// Accepts a single sample shaped like `input_shape()` or a batch.
  Tensor forward(const Tensor& input, Mode mode, Trace& trace, Rng* rng = nullptr) const;
  /// Eval-mode pass that keeps no trace.
  Tensor infer(const Tensor& input) const;

  /// Returns the input gradient. Parameter gradients are accumulated into
  /// `grads` when given. Without `grads`, a single traced sample is broadcast
  /// across a batch of output gradients.
  Tensor backward(const Trace& trace, const Tensor& output_grad, Gradients* grads = nullptr) const;

  /// Pushes a batch of input tangents through the layer Jacobians at the
  /// traced point.
  Tensor jvp(const Trace& trace, const Tensor& tangents) const;

  /// m x n Jacobian of the flattened output w.r.t. the flattened input at a
  /// single sample, evaluated in eval mode.
  Eigen::MatrixXd jacobian(const Tensor& input, JacobianMode mode = JacobianMode::kAuto) const;

  /// Eval-mode pass carried out entirely in double precision. Only networks
  /// built from dense, relu, reshape and dropout layers support it.
  bool supports_double() const;
  Eigen::VectorXd evaluate_double(const Eigen::VectorXd& input) const;

 private:
  Tensor as_batch(const Tensor& input) const;

  Shape input_shape_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<Shape> shapes_;  // shapes_[i] = per-sample output of layer i-1
  std::vector<std::string> names_;
  std::vector<std::pair<std::size_t, std::size_t>> index_;  // (layer, param slot)
};

}  // namespace armview::nn
