// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "nn/network.hpp"

namespace armview::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// ADAM with bias correction. Moments live in double precision; parameters
/// stay 32-bit.
class Adam {
 public:
  Adam(const Network& net, AdamConfig config = {});

  /// Applies one update. Throws a numeric error naming the parameter if any
  /// gradient entry is NaN or infinite; the network is left untouched then.
  void step(Network& net, const Gradients& grads);

  std::int64_t steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  std::int64_t steps_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace armview::nn
