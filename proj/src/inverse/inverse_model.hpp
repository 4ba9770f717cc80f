// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nn/network.hpp"
#include "nn/training.hpp"
#include "world/dataset.hpp"

namespace armview::inverse {

/// Five stride-2 3x3 convolutions (16, 32, 64, 64, 64) then fully-connected
/// 512, 128, 64, dof with dropout after the first. Weights use He-uniform
/// initialisation.
nn::Network build_inverse_net(int dof, int image_size, std::uint64_t seed, double dropout = 0.1);

/// Image-to-joints regressor. Outputs are not clamped to the joint limits.
class InverseModel {
 public:
  explicit InverseModel(nn::Network net);

  int dof() const { return static_cast<int>(net_.output_size()); }
  int image_size() const { return net_.input_shape()[1]; }
  const nn::Network& net() const { return net_; }
  nn::Network& net() { return net_; }

  world::JointConfig infer_state(const world::Image& image) const;

 private:
  nn::Network net_;
};

struct InverseLoss {
  double loss = 0.0;
  double sse = 0.0;  // mean squared joint error summed over joints
  nn::Gradients grads;
};

/// Mean over the batch of ||x - f(o)||^2 plus lambda ||W||^2. Dropout draws
/// come from `rng`.
InverseLoss inverse_batch_loss(const InverseModel& model, std::span<const world::Record* const> batch,
                               double lambda, nn::Rng& rng);

nn::TrainLog train_inverse(InverseModel& model, const world::Dataset& train, const nn::TrainConfig& cfg);

/// Per-frame estimates with no prior and no dynamics.
std::vector<world::JointConfig> track_by_inverse(const InverseModel& model, std::span<const world::Image> frames);

}  // namespace armview::inverse
