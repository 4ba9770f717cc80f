// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "forward/warp.hpp"
#include "nn/network.hpp"
#include "world/image.hpp"

namespace armview::occlusion {

/// forward lives on the first image's grid and points into the second image;
/// backward is the reverse.
struct FlowPair {
  forward::FlowField forward;
  forward::FlowField backward;
};

FlowPair bidirectional_flow(const nn::Network& branch, std::span<const double> x1, std::span<const double> x2);

/// Flow value at a fractional position, bilinear with clamp-to-edge like the
/// warp. Returns (dx, dy).
std::pair<double, double> sample_flow(const forward::FlowField& flow, double y, double x);

/// Flags arm pixels p where |fwd(p) + bwd(p + fwd(p))| exceeds `epsilon` pixels.
world::Mask symmetry_check(const forward::FlowField& fwd, const forward::FlowField& bwd,
                           const world::Mask& arm_mask, double epsilon);

struct PrecisionRecall {
  double precision = 1.0;
  double recall = 1.0;
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t actual = 0;
};

/// Binary precision and recall. An empty prediction has precision 1 and an
/// empty truth has recall 1.
PrecisionRecall evaluate_occlusion(const world::Mask& predicted, const world::Mask& truth);

}  // namespace armview::occlusion
