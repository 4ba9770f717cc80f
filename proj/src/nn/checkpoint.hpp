// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nn/network.hpp"

namespace armview::nn {

struct NamedTensor {
  std::string name;
  Tensor value;
};

// Layout: "FTNN1", then per record: u32 name length, name bytes, u32 rank,
// rank x u32 dims, raw f32 values. All integers and reals little-endian.
void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& records);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);

void save_network(const Network& net, const std::filesystem::path& path);
/// Loads parameters by name; every network parameter must be present with a
/// matching shape.
void load_network(Network& net, const std::filesystem::path& path);

}  // namespace armview::nn
