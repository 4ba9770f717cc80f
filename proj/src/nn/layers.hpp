// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nn/tensor.hpp"

namespace armview::nn {

enum class Mode { kTrain, kEval };

enum class LayerKind { kDense, kConv2d, kConvTranspose2d, kRelu, kReshape, kDropout };

std::string_view layer_kind_name(LayerKind kind);

using Rng = std::mt19937_64;

/// What a layer remembers from its forward pass. Backward and tangent passes
/// read it and never modify it, so a layer itself stays immutable.
struct LayerCache {
  Tensor input;
  Tensor mask;        // dropout keep-mask (already scaled), train mode only
  Shape input_shape;  // per-sample input shape
  Mode mode = Mode::kEval;
  bool valid = false;
};

class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;

  /// Per-sample output shape; throws a shape error for an incompatible input.
  virtual Shape output_shape(const Shape& input) const = 0;

  virtual Tensor forward(const Tensor& x, Mode mode, LayerCache& cache, Rng* rng) const = 0;

  /// Input gradient for a batch of output gradients. When `param_grads` is
  /// non-empty the parameter gradients are accumulated into it, which needs
  /// the cached batch to match `dy`. Without parameter gradients a cached
  /// batch of one is broadcast across every row of `dy`.
  virtual Tensor backward(const Tensor& dy, const LayerCache& cache,
                          std::span<Tensor> param_grads) const = 0;

  /// Applies the layer Jacobian at the cached point to a batch of tangents.
  virtual Tensor jvp(const Tensor& dx, const LayerCache& cache) const = 0;

  virtual std::span<Tensor> parameters() { return {}; }
  virtual std::span<const Tensor> parameters() const { return {}; }
  virtual std::vector<std::string> parameter_suffixes() const { return {}; }
  virtual std::unique_ptr<Layer> clone() const = 0;

  /// Glorot-uniform weights, zero biases.
  virtual void initialize(Rng& /*rng*/) {}

  virtual int fan_in() const { return 0; }
  virtual int fan_out() const { return 0; }
};

class Dense final : public Layer {
 public:
  Dense(int in_features, int out_features);

  LayerKind kind() const override { return LayerKind::kDense; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, Mode mode, LayerCache& cache, Rng* rng) const override;
  Tensor backward(const Tensor& dy, const LayerCache& cache,
                  std::span<Tensor> param_grads) const override;
  Tensor jvp(const Tensor& dx, const LayerCache& cache) const override;
  std::span<Tensor> parameters() override { return params_; }
  std::span<const Tensor> parameters() const override { return params_; }
  std::vector<std::string> parameter_suffixes() const override { return {"weight", "bias"}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }
  void initialize(Rng& rng) override;
  int fan_in() const override { return in_; }
  int fan_out() const override { return out_; }

  Tensor& weight() { return params_[0]; }
  Tensor& bias() { return params_[1]; }

 private:
  int in_;
  int out_;
  std::array<Tensor, 2> params_;  // weight [out, in], bias [out]
};

struct ConvGeometry {
  int kernel = 3;
  int stride = 1;
  int padding = 1;
};

/// 2-D cross-correlation over [C, H, W] samples.
class Conv2d final : public Layer {
 public:
  Conv2d(int in_channels, int out_channels, ConvGeometry geometry);

  LayerKind kind() const override { return LayerKind::kConv2d; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, Mode mode, LayerCache& cache, Rng* rng) const override;
  Tensor backward(const Tensor& dy, const LayerCache& cache,
                  std::span<Tensor> param_grads) const override;
  Tensor jvp(const Tensor& dx, const LayerCache& cache) const override;
  std::span<Tensor> parameters() override { return params_; }
  std::span<const Tensor> parameters() const override { return params_; }
  std::vector<std::string> parameter_suffixes() const override { return {"weight", "bias"}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }
  void initialize(Rng& rng) override;
  int fan_in() const override;
  int fan_out() const override;

  Tensor& weight() { return params_[0]; }
  Tensor& bias() { return params_[1]; }

 private:
  Tensor apply(const Tensor& x, bool with_bias) const;

  int in_ch_;
  int out_ch_;
  ConvGeometry geo_;
  std::array<Tensor, 2> params_;  // weight [out, in, k, k], bias [out]
};

/// Transposed convolution (the adjoint of Conv2d with the same geometry).
/// Kernel 4, stride 2, padding 1 doubles the spatial resolution.
class ConvTranspose2d final : public Layer {
 public:
  ConvTranspose2d(int in_channels, int out_channels, ConvGeometry geometry);

  LayerKind kind() const override { return LayerKind::kConvTranspose2d; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, Mode mode, LayerCache& cache, Rng* rng) const override;
  Tensor backward(const Tensor& dy, const LayerCache& cache,
                  std::span<Tensor> param_grads) const override;
  Tensor jvp(const Tensor& dx, const LayerCache& cache) const override;
  std::span<Tensor> parameters() override { return params_; }
  std::span<const Tensor> parameters() const override { return params_; }
  std::vector<std::string> parameter_suffixes() const override { return {"weight", "bias"}; }
  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<ConvTranspose2d>(*this);
  }
  void initialize(Rng& rng) override;
  int fan_in() const override;
  int fan_out() const override;

  Tensor& weight() { return params_[0]; }
  Tensor& bias() { return params_[1]; }

 private:
  Tensor apply(const Tensor& x, bool with_bias) const;

  int in_ch_;
  int out_ch_;
  ConvGeometry geo_;
  std::array<Tensor, 2> params_;  // weight [in, out, k, k], bias [out]
};

class Relu final : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::kRelu; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& x, Mode mode, LayerCache& cache, Rng* rng) const override;
  Tensor backward(const Tensor& dy, const LayerCache& cache,
                  std::span<Tensor> param_grads) const override;
  Tensor jvp(const Tensor& dx, const LayerCache& cache) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }
};

class Reshape final : public Layer {
 public:
  explicit Reshape(Shape target) : target_(std::move(target)) {}
  LayerKind kind() const override { return LayerKind::kReshape; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, Mode mode, LayerCache& cache, Rng* rng) const override;
  Tensor backward(const Tensor& dy, const LayerCache& cache,
                  std::span<Tensor> param_grads) const override;
  Tensor jvp(const Tensor& dx, const LayerCache& cache) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Reshape>(*this); }

 private:
  Shape target_;
};

/// Inverted dropout: kept units are scaled by 1/(1-p) in train mode, so eval
/// mode is the identity.
class Dropout final : public Layer {
 public:
  explicit Dropout(double probability);
  LayerKind kind() const override { return LayerKind::kDropout; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& x, Mode mode, LayerCache& cache, Rng* rng) const override;
  Tensor backward(const Tensor& dy, const LayerCache& cache,
                  std::span<Tensor> param_grads) const override;
  Tensor jvp(const Tensor& dx, const LayerCache& cache) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dropout>(*this); }
  double probability() const { return p_; }

 private:
  double p_;
};

}  // namespace armview::nn
