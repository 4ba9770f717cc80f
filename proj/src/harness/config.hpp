// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "world/arm.hpp"

namespace armview::harness {

/// Everything a pipeline run depends on. Split and model seeds are derived
/// from `seed` (see pipeline.hpp).
struct RunConfig {
  std::uint64_t seed = 7;

  // Arm and images.
  int dof = 3;
  int image_size = 64;
  double joint_limit = 2.6;

  // Dataset sizes.
  int train_trajectories = 100;
  int train_steps = 20;
  int reference_samples = 5000;
  int test_trajectories = 20;
  int test_steps = 20;
  int validation_trajectories = 10;
  int validation_steps = 20;
  int track_trajectories = 1;
  int track_steps = 100;

  // Models and training.
  std::string model = "knnflow";  // knnflow, deconv or nn1
  int k = 1;
  int branch_k = 0;  // k the flow branch was trained with; 0 means `k`
  double lambda = 1e-5;
  double learning_rate = 1e-3;
  int batch_size = 16;
  int forward_epochs = 25;
  int deconv_epochs = 25;
  int inverse_epochs = 30;
  double forward_lr_decay = 1.0;
  double deconv_lr_decay = 1.0;
  double inverse_lr_decay = 0.92;
  double inverse_dropout = 0.1;

  // Tracking.
  double gamma = 1e-6;
  int rank = 32;
  double dt = 1.0;
  double offset_deg = 10.0;

  // Occlusion scenario.
  double epsilon = 1.5;
  int occlusion_epochs = 3;
  int occlusion_gap = 3;
  int occlusion_train_trajectories = 100;
  int occlusion_test_trajectories = 20;
  double occluder_x0 = 42.0;
  double occluder_y0 = 24.0;
  double occluder_x1 = 56.0;
  double occluder_y1 = 40.0;

  int effective_branch_k() const { return branch_k > 0 ? branch_k : k; }
  world::ArmModel arm() const;
  world::Occluder occluder() const;

  /// Throws invalid_argument naming the first bad key.
  void validate() const;
};

std::vector<std::string> config_keys();

/// Sets one key from its text form; unknown keys and unparsable values throw.
void set_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_value(const RunConfig& cfg, const std::string& key);

/// Flat `key = value` lines; `#` starts a comment. Later lines win.
void apply_text(RunConfig& cfg, const std::string& text);
/// Applies a config file on top of `cfg`.
void apply_file(RunConfig& cfg, const std::filesystem::path& path);
RunConfig load_config(const std::filesystem::path& path);

/// Every key in declaration order, one `key = value` line each; parses back
/// to the same config.
std::string to_text(const RunConfig& cfg);

}  // namespace armview::harness
