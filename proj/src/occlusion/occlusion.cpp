// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "occlusion/occlusion.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "forward/knn_flow.hpp"

namespace armview::occlusion {

FlowPair bidirectional_flow(const nn::Network& branch, std::span<const double> x1, std::span<const double> x2) {
  if (x1.size() != x2.size()) throw shape_error("bidirectional_flow: states differ in length");
  return {forward::branch_forward(branch, x1, x2).flow, forward::branch_forward(branch, x2, x1).flow};
}

std::pair<double, double> sample_flow(const forward::FlowField& flow, double y, double x) {
  const int h = flow.height, w = flow.width;
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  const int y0 = std::min(static_cast<int>(std::floor(y)), h - 1);
  const int x0 = std::min(static_cast<int>(std::floor(x)), w - 1);
  const int y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
  const double fy = y - y0, fx = x - x0;
  auto lerp = [&](auto get) {
    const double top = (1 - fx) * get(y0, x0) + fx * get(y0, x1);
    const double bottom = (1 - fx) * get(y1, x0) + fx * get(y1, x1);
    return (1 - fy) * top + fy * bottom;
  };
  return {lerp([&](int r, int c) { return flow.dx(r, c); }), lerp([&](int r, int c) { return flow.dy(r, c); })};
}

world::Mask symmetry_check(const forward::FlowField& fwd, const forward::FlowField& bwd,
                           const world::Mask& arm_mask, double epsilon) {
  if (!(epsilon > 0.0)) throw invalid_argument("symmetry_check: epsilon must be positive");
  if (fwd.height != bwd.height || fwd.width != bwd.width || arm_mask.height != fwd.height ||
      arm_mask.width != fwd.width) {
    throw shape_error("symmetry_check: flow and mask shapes differ");
  }
  world::Mask out(fwd.height, fwd.width);
  for (int y = 0; y < fwd.height; ++y) {
    for (int x = 0; x < fwd.width; ++x) {
      if (!arm_mask.at(y, x)) continue;
      const double fx = fwd.dx(y, x), fy = fwd.dy(y, x);
      const auto [bx, by] = sample_flow(bwd, y + fy, x + fx);
      out.set(y, x, std::hypot(fx + bx, fy + by) > epsilon);
    }
  }
  return out;
}

PrecisionRecall evaluate_occlusion(const world::Mask& predicted, const world::Mask& truth) {
  if (predicted.height != truth.height || predicted.width != truth.width) {
    throw shape_error("evaluate_occlusion: mask shapes differ");
  }
  PrecisionRecall pr;
  for (std::size_t i = 0; i < truth.bits.size(); ++i) {
    const bool p = predicted.bits[i] != 0, t = truth.bits[i] != 0;
    pr.predicted += p;
    pr.actual += t;
    pr.true_positives += p && t;
  }
  if (pr.predicted > 0) pr.precision = static_cast<double>(pr.true_positives) / pr.predicted;
  if (pr.actual > 0) pr.recall = static_cast<double>(pr.true_positives) / pr.actual;
  return pr;
}

}  // namespace armview::occlusion
