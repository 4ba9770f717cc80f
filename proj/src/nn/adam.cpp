// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/adam.hpp"

#include <cmath>

#include "common/error.hpp"

namespace armview::nn {

Adam::Adam(const Network& net, AdamConfig config) : config_(config) {
  for (const Tensor* p : net.parameters()) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void Adam::step(Network& net, const Gradients& grads) {
  auto params = net.parameters();
  if (grads.size() != params.size()) {
    throw shape_error("adam: gradient count " + std::to_string(grads.size()) +
                      " does not match parameter count " + std::to_string(params.size()));
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (grads[p].shape() != params[p]->shape()) {
      throw shape_error("adam: gradient shape mismatch for " + net.parameter_names()[p]);
    }
    for (std::size_t i = 0; i < grads[p].size(); ++i) {
      if (!std::isfinite(grads[p][i])) {
        throw numeric_error("adam: non-finite gradient in " + net.parameter_names()[p] +
                            " at element " + std::to_string(i));
      }
    }
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& w = *params[p];
    std::vector<double>& m = m_[p];
    std::vector<double>& v = v_[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double g = grads[p][i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] = static_cast<float>(w[i] - config_.learning_rate * mhat /
                                           (std::sqrt(vhat) + config_.epsilon));
    }
  }
}

}  // namespace armview::nn
