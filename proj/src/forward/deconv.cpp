// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "forward/deconv.hpp"

#include <algorithm>
#include <string>

#include "common/error.hpp"
#include "nn/adam.hpp"

namespace armview::forward {

DeconvModel::DeconvModel(nn::Network net) : net_(std::move(net)) {
  const nn::Shape& out = net_.output_shape();
  if (out.size() != 3 || out[0] != 3 || out[1] != out[2]) {
    throw shape_error("deconv model must output [3, S, S], got " + nn::shape_string(out));
  }
}

world::Image DeconvModel::predict_raw(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dof()) {
    throw shape_error("deconv predict: expected " + std::to_string(dof()) + " joints, got " +
                      std::to_string(x.size()));
  }
  nn::Tensor in({dof()});
  for (int d = 0; d < dof(); ++d) in[d] = static_cast<float>(x[d]);
  const nn::Tensor out = net_.infer(in);
  return world::Image::from_tensor(out.values(), 3, image_size(), image_size());
}

world::Image DeconvModel::predict(std::span<const double> x) const {
  world::Image img = predict_raw(x);
  for (float& v : img.pixels) v = std::clamp(v, 0.0f, 1.0f);
  return img;
}

LossResult deconv_batch_loss(const DeconvModel& model, std::span<const world::Record* const> batch,
                             double lambda, bool with_gradients) {
  if (batch.empty()) throw invalid_argument("deconv loss needs a non-empty batch");
  const int n = model.dof();
  nn::Tensor in({static_cast<int>(batch.size()), n});
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (int d = 0; d < n; ++d) in.sample(static_cast<int>(b))[d] = static_cast<float>(batch[b]->q[d]);
  }
  nn::Trace trace;
  const nn::Tensor out = model.net().forward(in, nn::Mode::kTrain, trace);
  nn::Tensor grad(out.shape());
  const double scale = 1.0 / static_cast<double>(batch.size());
  double sse = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto pred = out.sample(static_cast<int>(b));
    const auto& target = batch[b]->image.pixels;
    if (pred.size() != target.size()) throw shape_error("deconv loss: target image shape");
    auto g = grad.sample(static_cast<int>(b));
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double r = static_cast<double>(pred[i]) - target[i];
      sse += r * r;
      g[i] = static_cast<float>(2.0 * r * scale);
    }
  }
  LossResult res;
  res.sse = sse * scale;
  if (with_gradients) {
    res.grads = model.net().zero_gradients();
    model.net().backward(trace, grad, &res.grads);
    res.loss = res.sse + nn::apply_weight_decay(model.net(), res.grads, lambda);
  } else {
    res.loss = res.sse + nn::weight_penalty(model.net(), lambda);
  }
  return res;
}

nn::TrainLog train_deconv(DeconvModel& model, const world::Dataset& train, const nn::TrainConfig& cfg) {
  if (cfg.epochs < 0 || cfg.batch_size < 1 || !(cfg.lr_decay > 0.0 && cfg.lr_decay <= 1.0)) {
    throw invalid_argument("train_deconv: bad epochs, batch size or learning-rate decay");
  }
  if (train.arm.dof() != model.dof()) throw shape_error("train_deconv: training set has a different arm");
  nn::TrainLog log;
  if (cfg.epochs == 0 || train.empty()) return log;
  std::mt19937_64 rng(cfg.seed);
  nn::Adam adam(model.net(), cfg.adam);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = nn::shuffled_indices(train.size(), rng);
    double total = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<const world::Record*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train.records[order[i]]);
      LossResult res = deconv_batch_loss(model, batch, cfg.lambda);
      nn::require_finite_loss(res.loss, "deconv model", epoch, batches);
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

}  // namespace armview::forward
