// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nn/network.hpp"

namespace armview::forward {

/// Fully-connected trunk (in -> 64 -> 128 -> 256 -> 256 -> 512 -> 64*4*4),
/// reshape to [64, 4, 4], stride-2 deconvolutions up to `image_size`, one
/// channel-halving 3x3 convolution and a 1x1 head with `head_channels` outputs.
/// `image_size` must be 4 * 2^d with d >= 1.
nn::Network build_generator(int inputs, int image_size, int head_channels);

/// Head of the flow branch emits (dx, dy, confidence logit); its weights and
/// bias start at zero so the untrained branch predicts no motion.
nn::Network build_flow_branch(int dof, int image_size, std::uint64_t seed);

/// Direct RGB generator; head bias starts at mid gray.
nn::Network build_deconv_net(int dof, int image_size, std::uint64_t seed);

/// Index of the final (head) layer.
std::size_t head_layer(const nn::Network& net);

}  // namespace armview::forward
