// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/network.hpp"

#include <utility>

#include "common/error.hpp"
#include "nn/kernels.hpp"

namespace armview::nn {

Network::Network(Shape input_shape) : input_shape_(std::move(input_shape)) {
  shape_size(input_shape_);
  shapes_.push_back(input_shape_);
}

Network::Network(const Network& other)
    : input_shape_(other.input_shape_),
      shapes_(other.shapes_),
      names_(other.names_),
      index_(other.index_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Network& Network::add(std::unique_ptr<Layer> layer) {
  const std::size_t li = layers_.size();
  Shape out;
  try {
    out = layer->output_shape(shapes_.back());
  } catch (const Error& e) {
    throw shape_error("layer " + std::to_string(li) + " (" +
                      std::string(layer_kind_name(layer->kind())) + "): " + e.what());
  }
  const auto suffixes = layer->parameter_suffixes();
  for (std::size_t s = 0; s < suffixes.size(); ++s) {
    names_.push_back(std::string(layer_kind_name(layer->kind())) + std::to_string(li) + "." +
                     suffixes[s]);
    index_.emplace_back(li, s);
  }
  shapes_.push_back(std::move(out));
  layers_.push_back(std::move(layer));
  return *this;
}

bool Network::has_dropout() const {
  for (const auto& l : layers_) {
    if (l->kind() == LayerKind::kDropout) return true;
  }
  return false;
}

std::vector<Tensor*> Network::parameters() {
  std::vector<Tensor*> out;
  for (auto [li, s] : index_) out.push_back(&layers_[li]->parameters()[s]);
  return out;
}

std::vector<const Tensor*> Network::parameters() const {
  std::vector<const Tensor*> out;
  for (auto [li, s] : index_) {
    const Layer& l = *layers_[li];
    out.push_back(&l.parameters()[s]);
  }
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* p : parameters()) n += p->size();
  return n;
}

Gradients Network::zero_gradients() const {
  Gradients g;
  for (const Tensor* p : parameters()) g.emplace_back(p->shape());
  return g;
}

void Network::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& l : layers_) l->initialize(rng);
}

Tensor Network::as_batch(const Tensor& input) const {
  if (input.shape() == input_shape_) {
    Shape s = input_shape_;
    s.insert(s.begin(), 1);
    return input.reshaped(std::move(s));
  }
  if (input.rank() >= 1 && input.sample_shape() == input_shape_ && input.batch() > 0) {
    return input;
  }
  throw shape_error("network: expected input " + shape_string(input_shape_) +
                    " (optionally batched), got " + shape_string(input.shape()));
}

Tensor Network::forward(const Tensor& input, Mode mode, Trace& trace, Rng* rng) const {
  Tensor x = as_batch(input);
  trace.layers.assign(layers_.size(), LayerCache{});
  trace.mode = mode;
  trace.valid = false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    try {
      x = layers_[i]->forward(x, mode, trace.layers[i], rng);
    } catch (const Error& e) {
      throw Error(e.code(), "layer " + std::to_string(i) + " (" +
                                std::string(layer_kind_name(layers_[i]->kind())) + "): " +
                                e.what());
    }
  }
  trace.valid = true;
  return x;
}

Tensor Network::infer(const Tensor& input) const {
  Trace trace;
  return forward(input, Mode::kEval, trace);
}

Tensor Network::backward(const Trace& trace, const Tensor& output_grad, Gradients* grads) const {
  if (!trace.valid || trace.layers.size() != layers_.size()) {
    throw state_error("network: backward called before forward");
  }
  Tensor g = output_grad;
  if (g.shape() == output_shape()) {
    Shape s = output_shape();
    s.insert(s.begin(), 1);
    g = g.reshaped(std::move(s));
  }
  if (g.sample_shape() != output_shape()) {
    throw shape_error("network: output gradient " + shape_string(output_grad.shape()) +
                      " does not match output " + shape_string(output_shape()));
  }
  if (grads != nullptr && grads->size() != index_.size()) {
    throw shape_error("network: gradient buffer has wrong parameter count");
  }
  // Parameter slots are contiguous per layer in registry order.
  std::vector<std::size_t> first(layers_.size() + 1, index_.size());
  for (std::size_t p = index_.size(); p-- > 0;) first[index_[p].first] = p;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    std::span<Tensor> pg;
    const std::size_t np = layers_[i]->parameters().size();
    if (grads != nullptr && np > 0) pg = std::span<Tensor>(grads->data() + first[i], np);
    try {
      g = layers_[i]->backward(g, trace.layers[i], pg);
    } catch (const Error& e) {
      throw Error(e.code(), "layer " + std::to_string(i) + " (" +
                                std::string(layer_kind_name(layers_[i]->kind())) + "): " +
                                e.what());
    }
  }
  return g;
}

Tensor Network::jvp(const Trace& trace, const Tensor& tangents) const {
  if (!trace.valid || trace.layers.size() != layers_.size()) {
    throw state_error("network: tangent pass called before forward");
  }
  Tensor t = as_batch(tangents);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    try {
      t = layers_[i]->jvp(t, trace.layers[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "layer " + std::to_string(i) + " (" +
                                std::string(layer_kind_name(layers_[i]->kind())) + "): " +
                                e.what());
    }
  }
  return t;
}

Eigen::MatrixXd Network::jacobian(const Tensor& input, JacobianMode mode) const {
  Tensor x = as_batch(input);
  if (x.batch() != 1) throw shape_error("network: jacobian needs a single sample");
  Trace trace;
  forward(x, Mode::kEval, trace);
  const int n = static_cast<int>(input_size());
  const int m = static_cast<int>(output_size());
  if (mode == JacobianMode::kAuto) mode = n < m ? JacobianMode::kForward : JacobianMode::kReverse;
  Eigen::MatrixXd jac(m, n);
  if (mode == JacobianMode::kReverse) {
    Shape s = output_shape();
    s.insert(s.begin(), 1);
    for (int i = 0; i < m; ++i) {
      Tensor onehot(s);
      onehot[static_cast<std::size_t>(i)] = 1.0f;
      const Tensor row = backward(trace, onehot);
      for (int j = 0; j < n; ++j) jac(i, j) = row[static_cast<std::size_t>(j)];
    }
  } else {
    Shape s = input_shape_;
    s.insert(s.begin(), n);
    Tensor tangents(s);
    for (int j = 0; j < n; ++j) tangents[static_cast<std::size_t>(j) * n + j] = 1.0f;
    const Tensor cols = jvp(trace, tangents);
    for (int j = 0; j < n; ++j) {
      auto col = cols.sample(j);
      for (int i = 0; i < m; ++i) jac(i, j) = col[static_cast<std::size_t>(i)];
    }
  }
  return jac;
}

bool Network::supports_double() const {
  for (const auto& l : layers_) {
    if (l->kind() == LayerKind::kConv2d || l->kind() == LayerKind::kConvTranspose2d) return false;
  }
  return true;
}

Eigen::VectorXd Network::evaluate_double(const Eigen::VectorXd& input) const {
  if (!supports_double()) throw state_error("network: double-precision pass needs a convolution-free network");
  if (static_cast<std::size_t>(input.size()) != input_size()) {
    throw shape_error("network: double-precision input has " + std::to_string(input.size()) +
                      " entries, expected " + std::to_string(input_size()));
  }
  Eigen::VectorXd x = input;
  for (const auto& l : layers_) {
    if (l->kind() == LayerKind::kDense) {
      const auto p = std::as_const(*l).parameters();
      const int out = p[0].dim(0), in = p[0].dim(1);
      const Eigen::MatrixXd w =
          Eigen::Map<const detail::MatF>(p[0].data(), out, in).cast<double>();
      const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXf>(p[1].data(), out).cast<double>();
      x = w * x + b;
    } else if (l->kind() == LayerKind::kRelu) {
      x = x.cwiseMax(0.0);
    }
  }
  return x;
}

}  // namespace armview::nn
