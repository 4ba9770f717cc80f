// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/layers.hpp"

#include <cmath>

#include "common/error.hpp"
#include "nn/kernels.hpp"

namespace armview::nn {

using detail::MatD;
using detail::MatF;

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kConv2d: return "conv";
    case LayerKind::kConvTranspose2d: return "deconv";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kReshape: return "reshape";
    case LayerKind::kDropout: return "dropout";
  }
  return "unknown";
}

namespace {

void glorot(Tensor& w, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (float& v : w.values()) v = static_cast<float>(dist(rng));
}

void require_batched(const Tensor& x, std::string_view who) {
  if (x.rank() < 2 || x.batch() <= 0) {
    throw shape_error(std::string(who) + ": expected a batched tensor, got " +
                      shape_string(x.shape()));
  }
}

void require_params(std::span<Tensor> grads, const Tensor& cached, const Tensor& dy,
                    std::string_view who) {
  if (!grads.empty() && cached.batch() != dy.batch()) {
    throw shape_error(std::string(who) +
                      ": parameter gradients need matching forward and backward batches");
  }
}

Tensor with_batch(int batch, const Shape& sample) {
  Shape s = sample;
  s.insert(s.begin(), batch);
  return Tensor(std::move(s));
}

// Row of the cached forward batch that pairs with row `b` of a gradient or
// tangent batch: identical batches pair up, a single cached sample broadcasts.
int cached_row(const Tensor& cached, int b) { return cached.batch() == 1 ? 0 : b; }

void require_cache(const LayerCache& cache, std::string_view who) {
  if (!cache.valid) {
    throw state_error(std::string(who) + ": no cached forward pass");
  }
}

}  // namespace

// ---------------------------------------------------------------- Dense

Dense::Dense(int in_features, int out_features)
    : in_(in_features),
      out_(out_features),
      params_{Tensor({out_features, in_features}), Tensor({out_features})} {}

Shape Dense::output_shape(const Shape& input) const {
  if (input != Shape{in_}) {
    throw shape_error("dense: expected input " + shape_string({in_}) + ", got " +
                      shape_string(input));
  }
  return {out_};
}

void Dense::initialize(Rng& rng) {
  glorot(params_[0], in_, out_, rng);
  params_[1].fill(0.0f);
}

Tensor Dense::forward(const Tensor& x, Mode mode, LayerCache& cache, Rng*) const {
  require_batched(x, "dense");
  output_shape(x.sample_shape());
  cache.input = x;
  cache.input_shape = x.sample_shape();
  cache.mode = mode;
  cache.valid = true;
  const MatD w = detail::to_double(params_[0], out_, in_);
  Tensor y = with_batch(x.batch(), {out_});
  for (int b = 0; b < x.batch(); ++b) {
    const Eigen::VectorXd xb =
        Eigen::Map<const Eigen::VectorXf>(x.sample(b).data(), in_).cast<double>();
    const Eigen::VectorXd yb = w * xb;
    auto out = y.sample(b);
    for (int o = 0; o < out_; ++o) out[o] = static_cast<float>(yb[o] + params_[1][o]);
  }
  return y;
}

Tensor Dense::backward(const Tensor& dy, const LayerCache& cache,
                       std::span<Tensor> param_grads) const {
  require_cache(cache, "dense");
  require_params(param_grads, cache.input, dy, "dense");
  const MatD w = detail::to_double(params_[0], out_, in_);
  Tensor dx = with_batch(dy.batch(), {in_});
  MatD dw;
  Eigen::VectorXd db;
  if (!param_grads.empty()) {
    dw = MatD::Zero(out_, in_);
    db = Eigen::VectorXd::Zero(out_);
  }
  for (int b = 0; b < dy.batch(); ++b) {
    const Eigen::VectorXd g =
        Eigen::Map<const Eigen::VectorXf>(dy.sample(b).data(), out_).cast<double>();
    const Eigen::VectorXd gx = w.transpose() * g;
    auto out = dx.sample(b);
    for (int i = 0; i < in_; ++i) out[i] = static_cast<float>(gx[i]);
    if (!param_grads.empty()) {
      const Eigen::VectorXd xb =
          Eigen::Map<const Eigen::VectorXf>(cache.input.sample(b).data(), in_).cast<double>();
      dw.noalias() += g * xb.transpose();
      db += g;
    }
  }
  if (!param_grads.empty()) {
    Eigen::Map<MatF>(param_grads[0].data(), out_, in_) += dw.cast<float>();
    Eigen::Map<Eigen::VectorXf>(param_grads[1].data(), out_) += db.cast<float>();
  }
  return dx;
}

Tensor Dense::jvp(const Tensor& dx, const LayerCache&) const {
  require_batched(dx, "dense");
  output_shape(dx.sample_shape());
  const MatD w = detail::to_double(params_[0], out_, in_);
  Tensor dy = with_batch(dx.batch(), {out_});
  for (int b = 0; b < dx.batch(); ++b) {
    const Eigen::VectorXd t =
        Eigen::Map<const Eigen::VectorXf>(dx.sample(b).data(), in_).cast<double>();
    const Eigen::VectorXd r = w * t;
    auto out = dy.sample(b);
    for (int o = 0; o < out_; ++o) out[o] = static_cast<float>(r[o]);
  }
  return dy;
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_channels, int out_channels, ConvGeometry geometry)
    : in_ch_(in_channels),
      out_ch_(out_channels),
      geo_(geometry),
      params_{Tensor({out_channels, in_channels, geometry.kernel, geometry.kernel}),
              Tensor({out_channels})} {}

int Conv2d::fan_in() const { return in_ch_ * geo_.kernel * geo_.kernel; }
int Conv2d::fan_out() const { return out_ch_ * geo_.kernel * geo_.kernel; }

void Conv2d::initialize(Rng& rng) {
  glorot(params_[0], fan_in(), fan_out(), rng);
  params_[1].fill(0.0f);
}

Shape Conv2d::output_shape(const Shape& input) const {
  if (input.size() != 3 || input[0] != in_ch_) {
    throw shape_error("conv: expected input [" + std::to_string(in_ch_) + ",H,W], got " +
                      shape_string(input));
  }
  const int h = (input[1] + 2 * geo_.padding - geo_.kernel) / geo_.stride + 1;
  const int w = (input[2] + 2 * geo_.padding - geo_.kernel) / geo_.stride + 1;
  if (h <= 0 || w <= 0) throw shape_error("conv: input " + shape_string(input) + " too small");
  return {out_ch_, h, w};
}

Tensor Conv2d::apply(const Tensor& x, bool with_bias) const {
  require_batched(x, "conv");
  const Shape out_shape = output_shape(x.sample_shape());
  const int h = x.dim(2), w = x.dim(3), oh = out_shape[1], ow = out_shape[2];
  const int patch = in_ch_ * geo_.kernel * geo_.kernel;
  const MatD wm = detail::to_double(params_[0], out_ch_, patch);
  Tensor y = with_batch(x.batch(), out_shape);
  for (int b = 0; b < x.batch(); ++b) {
    const MatD cols = detail::im2col(x.sample(b), in_ch_, h, w, geo_, oh, ow);
    const MatD yb = wm * cols;
    auto out = y.sample(b);
    for (int c = 0; c < out_ch_; ++c) {
      const double bias = with_bias ? params_[1][c] : 0.0;
      for (int i = 0; i < oh * ow; ++i) {
        out[static_cast<std::size_t>(c) * oh * ow + i] = static_cast<float>(yb(c, i) + bias);
      }
    }
  }
  return y;
}

Tensor Conv2d::forward(const Tensor& x, Mode mode, LayerCache& cache, Rng*) const {
  cache.input = x;
  cache.input_shape = x.sample_shape();
  cache.mode = mode;
  cache.valid = true;
  return apply(x, true);
}

Tensor Conv2d::jvp(const Tensor& dx, const LayerCache&) const { return apply(dx, false); }

Tensor Conv2d::backward(const Tensor& dy, const LayerCache& cache,
                        std::span<Tensor> param_grads) const {
  require_cache(cache, "conv");
  require_params(param_grads, cache.input, dy, "conv");
  const Tensor& x = cache.input;
  const int h = x.dim(2), w = x.dim(3);
  const int oh = dy.dim(2), ow = dy.dim(3);
  const int patch = in_ch_ * geo_.kernel * geo_.kernel;
  const MatD wm = detail::to_double(params_[0], out_ch_, patch);
  Tensor dx = with_batch(dy.batch(), {in_ch_, h, w});
  MatD dw;
  Eigen::VectorXd db;
  if (!param_grads.empty()) {
    dw = MatD::Zero(out_ch_, patch);
    db = Eigen::VectorXd::Zero(out_ch_);
  }
  for (int b = 0; b < dy.batch(); ++b) {
    const MatD g = detail::to_double_span(dy.sample(b), out_ch_, oh * ow);
    const MatD dcols = wm.transpose() * g;
    const std::vector<double> img = detail::col2im(dcols, in_ch_, h, w, geo_, oh, ow);
    auto out = dx.sample(b);
    for (std::size_t i = 0; i < img.size(); ++i) out[i] = static_cast<float>(img[i]);
    if (!param_grads.empty()) {
      const MatD cols = detail::im2col(x.sample(b), in_ch_, h, w, geo_, oh, ow);
      dw.noalias() += g * cols.transpose();
      db += g.rowwise().sum();
    }
  }
  if (!param_grads.empty()) {
    Eigen::Map<MatF>(param_grads[0].data(), out_ch_, patch) += dw.cast<float>();
    Eigen::Map<Eigen::VectorXf>(param_grads[1].data(), out_ch_) += db.cast<float>();
  }
  return dx;
}

// ---------------------------------------------------------------- ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(int in_channels, int out_channels, ConvGeometry geometry)
    : in_ch_(in_channels),
      out_ch_(out_channels),
      geo_(geometry),
      params_{Tensor({in_channels, out_channels, geometry.kernel, geometry.kernel}),
              Tensor({out_channels})} {}

int ConvTranspose2d::fan_in() const { return in_ch_ * geo_.kernel * geo_.kernel; }
int ConvTranspose2d::fan_out() const { return out_ch_ * geo_.kernel * geo_.kernel; }

void ConvTranspose2d::initialize(Rng& rng) {
  glorot(params_[0], fan_in(), fan_out(), rng);
  params_[1].fill(0.0f);
}

Shape ConvTranspose2d::output_shape(const Shape& input) const {
  if (input.size() != 3 || input[0] != in_ch_) {
    throw shape_error("deconv: expected input [" + std::to_string(in_ch_) + ",H,W], got " +
                      shape_string(input));
  }
  const int h = (input[1] - 1) * geo_.stride - 2 * geo_.padding + geo_.kernel;
  const int w = (input[2] - 1) * geo_.stride - 2 * geo_.padding + geo_.kernel;
  if (h <= 0 || w <= 0) throw shape_error("deconv: input " + shape_string(input) + " too small");
  return {out_ch_, h, w};
}

Tensor ConvTranspose2d::apply(const Tensor& x, bool with_bias) const {
  require_batched(x, "deconv");
  const Shape out_shape = output_shape(x.sample_shape());
  const int h = x.dim(2), w = x.dim(3), oh = out_shape[1], ow = out_shape[2];
  const int patch = out_ch_ * geo_.kernel * geo_.kernel;
  const MatD wm = detail::to_double(params_[0], in_ch_, patch);
  Tensor y = with_batch(x.batch(), out_shape);
  for (int b = 0; b < x.batch(); ++b) {
    const MatD xb = detail::to_double_span(x.sample(b), in_ch_, h * w);
    const MatD cols = wm.transpose() * xb;
    const std::vector<double> img = detail::col2im(cols, out_ch_, oh, ow, geo_, h, w);
    auto out = y.sample(b);
    for (int c = 0; c < out_ch_; ++c) {
      const double bias = with_bias ? params_[1][c] : 0.0;
      for (int i = 0; i < oh * ow; ++i) {
        const std::size_t idx = static_cast<std::size_t>(c) * oh * ow + i;
        out[idx] = static_cast<float>(img[idx] + bias);
      }
    }
  }
  return y;
}

Tensor ConvTranspose2d::forward(const Tensor& x, Mode mode, LayerCache& cache, Rng*) const {
  cache.input = x;
  cache.input_shape = x.sample_shape();
  cache.mode = mode;
  cache.valid = true;
  return apply(x, true);
}

Tensor ConvTranspose2d::jvp(const Tensor& dx, const LayerCache&) const {
  return apply(dx, false);
}

Tensor ConvTranspose2d::backward(const Tensor& dy, const LayerCache& cache,
                                 std::span<Tensor> param_grads) const {
  require_cache(cache, "deconv");
  require_params(param_grads, cache.input, dy, "deconv");
  const Tensor& x = cache.input;
  const int h = x.dim(2), w = x.dim(3);
  const int oh = dy.dim(2), ow = dy.dim(3);
  const int patch = out_ch_ * geo_.kernel * geo_.kernel;
  const MatD wm = detail::to_double(params_[0], in_ch_, patch);
  Tensor dx = with_batch(dy.batch(), {in_ch_, h, w});
  MatD dw;
  Eigen::VectorXd db;
  if (!param_grads.empty()) {
    dw = MatD::Zero(in_ch_, patch);
    db = Eigen::VectorXd::Zero(out_ch_);
  }
  for (int b = 0; b < dy.batch(); ++b) {
    const MatD gcols = detail::im2col(dy.sample(b), out_ch_, oh, ow, geo_, h, w);
    const MatD gx = wm * gcols;
    auto out = dx.sample(b);
    for (int i = 0; i < in_ch_ * h * w; ++i) out[i] = static_cast<float>(gx.data()[i]);
    if (!param_grads.empty()) {
      const MatD xb = detail::to_double_span(x.sample(b), in_ch_, h * w);
      dw.noalias() += xb * gcols.transpose();
      const MatD g = detail::to_double_span(dy.sample(b), out_ch_, oh * ow);
      db += g.rowwise().sum();
    }
  }
  if (!param_grads.empty()) {
    Eigen::Map<MatF>(param_grads[0].data(), in_ch_, patch) += dw.cast<float>();
    Eigen::Map<Eigen::VectorXf>(param_grads[1].data(), out_ch_) += db.cast<float>();
  }
  return dx;
}

// ---------------------------------------------------------------- Relu

Tensor Relu::forward(const Tensor& x, Mode mode, LayerCache& cache, Rng*) const {
  cache.input = x;
  cache.input_shape = x.sample_shape();
  cache.mode = mode;
  cache.valid = true;
  Tensor y = x;
  for (float& v : y.values()) v = v > 0.0f ? v : 0.0f;
  return y;
}

namespace {

Tensor gate_by_positive(const Tensor& g, const Tensor& cached, std::string_view who) {
  if (g.sample_shape() != cached.sample_shape() ||
      (cached.batch() != 1 && cached.batch() != g.batch())) {
    throw shape_error(std::string(who) + ": gradient " + shape_string(g.shape()) +
                      " incompatible with cached input " + shape_string(cached.shape()));
  }
  Tensor out = g;
  for (int b = 0; b < g.batch(); ++b) {
    auto row = out.sample(b);
    auto x = cached.sample(cached_row(cached, b));
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!(x[i] > 0.0f)) row[i] = 0.0f;
    }
  }
  return out;
}

}  // namespace

Tensor Relu::backward(const Tensor& dy, const LayerCache& cache, std::span<Tensor>) const {
  require_cache(cache, "relu");
  return gate_by_positive(dy, cache.input, "relu");
}

Tensor Relu::jvp(const Tensor& dx, const LayerCache& cache) const {
  require_cache(cache, "relu");
  return gate_by_positive(dx, cache.input, "relu");
}

// ---------------------------------------------------------------- Reshape

Shape Reshape::output_shape(const Shape& input) const {
  if (shape_size(input) != shape_size(target_)) {
    throw shape_error("reshape: cannot map " + shape_string(input) + " to " +
                      shape_string(target_));
  }
  return target_;
}

Tensor Reshape::forward(const Tensor& x, Mode mode, LayerCache& cache, Rng*) const {
  require_batched(x, "reshape");
  cache.input = Tensor();
  cache.mode = mode;
  cache.valid = true;
  const Shape src = x.sample_shape();
  cache.input_shape = src;
  Shape out = output_shape(src);
  out.insert(out.begin(), x.batch());
  return x.reshaped(std::move(out));
}

Tensor Reshape::backward(const Tensor& dy, const LayerCache& cache, std::span<Tensor>) const {
  require_cache(cache, "reshape");
  Shape src = cache.input_shape;
  src.insert(src.begin(), dy.batch());
  return dy.reshaped(std::move(src));
}

Tensor Reshape::jvp(const Tensor& dx, const LayerCache&) const {
  require_batched(dx, "reshape");
  Shape out = output_shape(dx.sample_shape());
  out.insert(out.begin(), dx.batch());
  return dx.reshaped(std::move(out));
}

// ---------------------------------------------------------------- Dropout

Dropout::Dropout(double probability) : p_(probability) {
  if (!(probability >= 0.0 && probability < 1.0)) {
    throw invalid_argument("dropout probability must lie in [0, 1)");
  }
}

Tensor Dropout::forward(const Tensor& x, Mode mode, LayerCache& cache, Rng* rng) const {
  cache.input = x;
  cache.input_shape = x.sample_shape();
  cache.mode = mode;
  cache.valid = true;
  if (mode == Mode::kEval || p_ == 0.0) {
    cache.mask = Tensor();
    return x;
  }
  if (rng == nullptr) throw invalid_argument("dropout: train mode needs a random generator");
  cache.mask = Tensor(x.shape());
  const float keep = static_cast<float>(1.0 / (1.0 - p_));
  std::bernoulli_distribution drop(p_);
  for (float& m : cache.mask.values()) m = drop(*rng) ? 0.0f : keep;
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= cache.mask[i];
  return y;
}

Tensor Dropout::backward(const Tensor& dy, const LayerCache& cache, std::span<Tensor>) const {
  require_cache(cache, "dropout");
  if (cache.mask.empty()) return dy;
  if (dy.shape() != cache.mask.shape()) {
    throw shape_error("dropout: train-mode backward needs the forward batch shape");
  }
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= cache.mask[i];
  return dx;
}

Tensor Dropout::jvp(const Tensor& dx, const LayerCache& cache) const {
  if (cache.mode == Mode::kTrain && p_ > 0.0) {
    throw state_error("dropout: tangent pass through a train-mode dropout is not differentiable");
  }
  return dx;
}

}  // namespace armview::nn
