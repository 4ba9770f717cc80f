// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "forward/architecture.hpp"

#include <algorithm>
#include <string>

#include "common/error.hpp"

namespace armview::forward {

using nn::Conv2d;
using nn::ConvGeometry;
using nn::ConvTranspose2d;
using nn::Dense;
using nn::Relu;
using nn::Reshape;

namespace {
constexpr int kSeedChannels = 64;
constexpr int kFcWidths[] = {64, 128, 256, 256, 512};
constexpr int kDeconvChannels[] = {32, 32, 16, 16};
}  // namespace

nn::Network build_generator(int inputs, int image_size, int head_channels) {
  int doublings = 0;
  for (int s = image_size; s > 4 && s % 2 == 0; s /= 2) ++doublings;
  if (image_size < 8 || (4 << doublings) != image_size) {
    throw invalid_argument("generator: image size " + std::to_string(image_size) +
                           " is not 4 * 2^d with d >= 1");
  }
  nn::Network net({inputs});
  int width = inputs;
  for (int w : kFcWidths) {
    net.emplace<Dense>(width, w);
    net.emplace<Relu>();
    width = w;
  }
  net.emplace<Dense>(width, kSeedChannels * 16);
  net.emplace<Relu>();
  net.emplace<Reshape>(nn::Shape{kSeedChannels, 4, 4});
  int channels = kSeedChannels;
  for (int d = 0; d < doublings; ++d) {
    // Deeper stacks than the table reuse its last width.
    const int out = kDeconvChannels[std::min<int>(d + std::max(0, 4 - doublings), 3)];
    net.emplace<ConvTranspose2d>(channels, out, ConvGeometry{4, 2, 1});
    net.emplace<Relu>();
    channels = out;
  }
  const int mixer = std::max(channels / 2, 8);
  net.emplace<Conv2d>(channels, mixer, ConvGeometry{3, 1, 1});
  net.emplace<Relu>();
  net.emplace<Conv2d>(mixer, head_channels, ConvGeometry{1, 1, 0});
  return net;
}

std::size_t head_layer(const nn::Network& net) { return net.num_layers() - 1; }

nn::Network build_flow_branch(int dof, int image_size, std::uint64_t seed) {
  nn::Network net = build_generator(2 * dof, image_size, 3);
  net.initialize(seed);
  for (nn::Tensor& p : net.layer(head_layer(net)).parameters()) p.fill(0.0f);
  return net;
}

nn::Network build_deconv_net(int dof, int image_size, std::uint64_t seed) {
  nn::Network net = build_generator(dof, image_size, 3);
  net.initialize(seed);
  net.layer(head_layer(net)).parameters()[1].fill(0.5f);
  return net;
}

}  // namespace armview::forward
