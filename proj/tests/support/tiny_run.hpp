// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

namespace armview::testing {

// Seconds-scale pipeline settings for contract tests.
inline const char* kTinyConfig = R"(# tiny run
image_size = 32
train_trajectories = 5
train_steps = 4
reference_samples = 30
test_trajectories = 2
test_steps = 4
validation_trajectories = 3
validation_steps = 4
track_steps = 6
rank = 4
forward_epochs = 1
deconv_epochs = 1
inverse_epochs = 1
occlusion_epochs = 1
occlusion_gap = 1
occlusion_train_trajectories = 3
occlusion_test_trajectories = 3
occluder_x0 = 20
occluder_y0 = 10
occluder_x1 = 28
occluder_y1 = 20
)";

inline std::filesystem::path scratch_dir(const std::string& tag) {
  std::random_device rd;
  const auto dir = std::filesystem::temp_directory_path() / ("armview_" + tag + "_" + std::to_string(rd()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace armview::testing
