// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "forward/knn_flow.hpp"
#include "nn/network.hpp"
#include "nn/training.hpp"
#include "world/dataset.hpp"

namespace armview::forward {

/// Direct state-to-RGB generator without references or warping.
class DeconvModel {
 public:
  explicit DeconvModel(nn::Network net);

  int dof() const { return static_cast<int>(net_.input_size()); }
  int image_size() const { return net_.output_shape()[1]; }
  const nn::Network& net() const { return net_; }
  nn::Network& net() { return net_; }

  /// Raw generator output.
  world::Image predict_raw(std::span<const double> x) const;
  /// Output clamped to [0, 1].
  world::Image predict(std::span<const double> x) const;

 private:
  nn::Network net_;
};

/// Mean pixel SSE over the batch plus lambda * ||W||^2.
LossResult deconv_batch_loss(const DeconvModel& model, std::span<const world::Record* const> batch,
                             double lambda, bool with_gradients = true);

nn::TrainLog train_deconv(DeconvModel& model, const world::Dataset& train, const nn::TrainConfig& cfg);

}  // namespace armview::forward
