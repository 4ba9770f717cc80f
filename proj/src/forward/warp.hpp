// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "world/image.hpp"

namespace armview::forward {

/// Per-pixel displacement (dx along columns, dy along rows) in pixels, stored
/// as two planar channels of `height * width` values.
struct FlowField {
  int height = 0;
  int width = 0;
  std::vector<float> values;  // [2][H][W]

  FlowField() = default;
  FlowField(int h, int w, float fill = 0.0f)
      : height(h), width(w), values(static_cast<std::size_t>(2) * h * w, fill) {}
  float& dx(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
  float& dy(int y, int x) { return values[(static_cast<std::size_t>(height) + y) * width + x]; }
  float dx(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
  float dy(int y, int x) const { return values[(static_cast<std::size_t>(height) + y) * width + x]; }
};

/// Backward bilinear warp: out(p) samples `reference` at p + flow(p), with
/// sampling coordinates clamped to the border.
world::Image warp(const world::Image& reference, const FlowField& flow);

struct WarpGradients {
  world::Image reference_grad;
  FlowField flow_grad;
};

/// Exact adjoint of `warp`. The flow gradient is zero on an axis whose sample
/// coordinate was clamped.
WarpGradients warp_backward(const world::Image& reference, const FlowField& flow,
                            const world::Image& output_grad);

/// Directional derivative of `warp` along a flow perturbation, with the
/// reference held fixed.
world::Image warp_jvp(const world::Image& reference, const FlowField& flow,
                      const FlowField& flow_tangent);

}  // namespace armview::forward
