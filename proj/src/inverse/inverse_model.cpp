// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "inverse/inverse_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.hpp"
#include "nn/adam.hpp"

namespace armview::inverse {

namespace {

constexpr int kConvChannels[] = {16, 32, 64, 64, 64};
constexpr int kFcWidths[] = {512, 128, 64};

}  // namespace

nn::Network build_inverse_net(int dof, int image_size, std::uint64_t seed, double dropout) {
  if (dof < 1) throw invalid_argument("inverse net needs dof >= 1");
  if (image_size < 32 || image_size % 32 != 0) {
    throw invalid_argument("inverse net: image size " + std::to_string(image_size) + " is not a multiple of 32");
  }
  nn::Network net({3, image_size, image_size});
  int channels = 3;
  for (int c : kConvChannels) {
    net.emplace<nn::Conv2d>(channels, c, nn::ConvGeometry{3, 2, 1});
    net.emplace<nn::Relu>();
    channels = c;
  }
  const int side = image_size / 32;
  int width = channels * side * side;
  net.emplace<nn::Reshape>(nn::Shape{width});
  for (std::size_t i = 0; i < std::size(kFcWidths); ++i) {
    net.emplace<nn::Dense>(width, kFcWidths[i]);
    net.emplace<nn::Relu>();
    if (i == 0) net.emplace<nn::Dropout>(dropout);
    width = kFcWidths[i];
  }
  net.emplace<nn::Dense>(width, dof);
  net.initialize(seed);
  // Glorot limits rescaled to He: sqrt(6 / fan_in). Without it the five-conv
  // stack starts with vanishing activations and regresses the mean for epochs.
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    nn::Layer& layer = net.layer(i);
    if (layer.fan_in() == 0) continue;
    const float scale = static_cast<float>(
        std::sqrt(static_cast<double>(layer.fan_in() + layer.fan_out()) / layer.fan_in()));
    for (float& v : layer.parameters()[0].values()) v *= scale;
  }
  return net;
}

InverseModel::InverseModel(nn::Network net) : net_(std::move(net)) {
  const nn::Shape& in = net_.input_shape();
  if (in.size() != 3 || in[0] != 3 || in[1] != in[2] || net_.output_shape().size() != 1) {
    throw shape_error("inverse model must map [3, S, S] to joints, got " + nn::shape_string(in));
  }
}

world::JointConfig InverseModel::infer_state(const world::Image& image) const {
  if (image.channels != 3 || image.height != image_size() || image.width != image_size()) {
    throw shape_error("infer_state: expected a 3x" + std::to_string(image_size()) + "x" +
                      std::to_string(image_size()) + " image");
  }
  const nn::Tensor out = net_.infer(image.to_tensor());
  return world::JointConfig(out.values().begin(), out.values().end());
}

InverseLoss inverse_batch_loss(const InverseModel& model, std::span<const world::Record* const> batch,
                               double lambda, nn::Rng& rng) {
  if (batch.empty()) throw invalid_argument("inverse loss needs a non-empty batch");
  const int s = model.image_size();
  const int n = model.dof();
  nn::Tensor in({static_cast<int>(batch.size()), 3, s, s});
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& img = batch[b]->image;
    if (img.channels != 3 || img.height != s || img.width != s) throw shape_error("inverse loss: image shape");
    if (static_cast<int>(batch[b]->q.size()) != n) throw shape_error("inverse loss: joint count");
    std::copy(img.pixels.begin(), img.pixels.end(), in.sample(static_cast<int>(b)).begin());
  }
  nn::Trace trace;
  const nn::Tensor out = model.net().forward(in, nn::Mode::kTrain, trace, &rng);
  nn::Tensor grad(out.shape());
  const double scale = 1.0 / static_cast<double>(batch.size());
  double sse = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto pred = out.sample(static_cast<int>(b));
    auto g = grad.sample(static_cast<int>(b));
    for (int d = 0; d < n; ++d) {
      const double r = static_cast<double>(pred[d]) - batch[b]->q[d];
      sse += r * r;
      g[d] = static_cast<float>(2.0 * r * scale);
    }
  }
  InverseLoss res;
  res.sse = sse * scale;
  res.grads = model.net().zero_gradients();
  model.net().backward(trace, grad, &res.grads);
  res.loss = res.sse + nn::apply_weight_decay(model.net(), res.grads, lambda);
  return res;
}

nn::TrainLog train_inverse(InverseModel& model, const world::Dataset& train, const nn::TrainConfig& cfg) {
  if (cfg.epochs < 0 || cfg.batch_size < 1 || !(cfg.lr_decay > 0.0 && cfg.lr_decay <= 1.0)) {
    throw invalid_argument("train_inverse: bad epochs, batch size or learning-rate decay");
  }
  if (train.arm.dof() != model.dof()) throw shape_error("train_inverse: training set has a different arm");
  nn::TrainLog log;
  if (cfg.epochs == 0 || train.empty()) return log;
  std::mt19937_64 rng(cfg.seed);
  nn::Rng dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  nn::Adam adam(model.net(), cfg.adam);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = nn::shuffled_indices(train.size(), rng);
    double total = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<const world::Record*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train.records[order[i]]);
      InverseLoss res = inverse_batch_loss(model, batch, cfg.lambda, dropout_rng);
      nn::require_finite_loss(res.loss, "inverse model", epoch, batches);
      adam.step(model.net(), res.grads);
      total += res.loss * static_cast<double>(end - start);
      ++batches;
    }
    const double mean = total / static_cast<double>(train.size());
    log.epoch_loss.push_back(mean);
    adam.set_learning_rate(adam.config().learning_rate * cfg.lr_decay);
    nn::write_epoch_checkpoint(model.net(), cfg, epoch);
    if (cfg.on_epoch) cfg.on_epoch(epoch, mean);
  }
  return log;
}

std::vector<world::JointConfig> track_by_inverse(const InverseModel& model, std::span<const world::Image> frames) {
  std::vector<world::JointConfig> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(model.infer_state(f));
  return out;
}

}  // namespace armview::inverse
