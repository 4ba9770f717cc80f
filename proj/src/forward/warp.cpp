// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "forward/warp.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace armview::forward {
namespace {

// Bilinear taps along one axis.
struct Axis {
  int i0;
  int i1;
  double w;        // weight of i1
  bool clamped;    // coordinate left [0, n-1]
};

Axis axis(double coord, int n) {
  Axis a{};
  a.clamped = coord < 0.0 || coord > n - 1;
  const double c = std::clamp(coord, 0.0, static_cast<double>(n - 1));
  a.i0 = std::min(static_cast<int>(std::floor(c)), n - 1);
  a.i1 = std::min(a.i0 + 1, n - 1);
  a.w = c - a.i0;
  return a;
}

void check(const world::Image& ref, const FlowField& flow) {
  for (float v : flow.values) {
    if (!std::isfinite(v)) throw numeric_error("warp: non-finite flow value");
  }
  if (ref.height != flow.height || ref.width != flow.width ||
      flow.values.size() != static_cast<std::size_t>(2) * flow.height * flow.width) {
    throw shape_error("warp: flow is " + std::to_string(flow.height) + "x" + std::to_string(flow.width) +
                      ", image is " + std::to_string(ref.height) + "x" + std::to_string(ref.width));
  }
}

}  // namespace

world::Image warp(const world::Image& reference, const FlowField& flow) {
  check(reference, flow);
  const int H = reference.height, W = reference.width;
  world::Image out(H, W, reference.channels);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const Axis ax = axis(x + static_cast<double>(flow.dx(y, x)), W);
      const Axis ay = axis(y + static_cast<double>(flow.dy(y, x)), H);
      for (int c = 0; c < reference.channels; ++c) {
        const double top = (1.0 - ax.w) * reference.at(c, ay.i0, ax.i0) + ax.w * reference.at(c, ay.i0, ax.i1);
        const double bot = (1.0 - ax.w) * reference.at(c, ay.i1, ax.i0) + ax.w * reference.at(c, ay.i1, ax.i1);
        out.at(c, y, x) = static_cast<float>((1.0 - ay.w) * top + ay.w * bot);
      }
    }
  }
  return out;
}

WarpGradients warp_backward(const world::Image& reference, const FlowField& flow,
                            const world::Image& output_grad) {
  check(reference, flow);
  if (!output_grad.same_shape(reference)) throw shape_error("warp_backward: output gradient shape");
  const int H = reference.height, W = reference.width;
  std::vector<double> ref_grad(reference.size(), 0.0);
  WarpGradients g{world::Image(H, W, reference.channels), FlowField(H, W)};
  auto slot = [&](int c, int y, int x) -> double& {
    return ref_grad[(static_cast<std::size_t>(c) * H + y) * W + x];
  };
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const Axis ax = axis(x + static_cast<double>(flow.dx(y, x)), W);
      const Axis ay = axis(y + static_cast<double>(flow.dy(y, x)), H);
      double gx = 0.0, gy = 0.0;
      for (int c = 0; c < reference.channels; ++c) {
        const double go = output_grad.at(c, y, x);
        if (go == 0.0) continue;
        const double r00 = reference.at(c, ay.i0, ax.i0), r01 = reference.at(c, ay.i0, ax.i1);
        const double r10 = reference.at(c, ay.i1, ax.i0), r11 = reference.at(c, ay.i1, ax.i1);
        slot(c, ay.i0, ax.i0) += go * (1.0 - ay.w) * (1.0 - ax.w);
        slot(c, ay.i0, ax.i1) += go * (1.0 - ay.w) * ax.w;
        slot(c, ay.i1, ax.i0) += go * ay.w * (1.0 - ax.w);
        slot(c, ay.i1, ax.i1) += go * ay.w * ax.w;
        gx += go * ((1.0 - ay.w) * (r01 - r00) + ay.w * (r11 - r10));
        gy += go * ((1.0 - ax.w) * (r10 - r00) + ax.w * (r11 - r01));
      }
      g.flow_grad.dx(y, x) = ax.clamped ? 0.0f : static_cast<float>(gx);
      g.flow_grad.dy(y, x) = ay.clamped ? 0.0f : static_cast<float>(gy);
    }
  }
  for (std::size_t i = 0; i < ref_grad.size(); ++i) g.reference_grad.pixels[i] = static_cast<float>(ref_grad[i]);
  return g;
}

world::Image warp_jvp(const world::Image& reference, const FlowField& flow, const FlowField& flow_tangent) {
  check(reference, flow);
  check(reference, flow_tangent);
  const int H = reference.height, W = reference.width;
  world::Image out(H, W, reference.channels);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const Axis ax = axis(x + static_cast<double>(flow.dx(y, x)), W);
      const Axis ay = axis(y + static_cast<double>(flow.dy(y, x)), H);
      const double tx = ax.clamped ? 0.0 : flow_tangent.dx(y, x);
      const double ty = ay.clamped ? 0.0 : flow_tangent.dy(y, x);
      for (int c = 0; c < reference.channels; ++c) {
        const double r00 = reference.at(c, ay.i0, ax.i0), r01 = reference.at(c, ay.i0, ax.i1);
        const double r10 = reference.at(c, ay.i1, ax.i0), r11 = reference.at(c, ay.i1, ax.i1);
        const double dx = (1.0 - ay.w) * (r01 - r00) + ay.w * (r11 - r10);
        const double dy = (1.0 - ax.w) * (r10 - r00) + ax.w * (r11 - r01);
        out.at(c, y, x) = static_cast<float>(dx * tx + dy * ty);
      }
    }
  }
  return out;
}

}  // namespace armview::forward
