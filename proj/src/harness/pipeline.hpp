// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "harness/config.hpp"

namespace armview::harness {

/// Layout of one run directory.
struct RunPaths {
  std::filesystem::path root;

  std::filesystem::path data(const std::string& split) const { return root / "data" / split; }
  std::filesystem::path checkpoint(const std::string& name) const { return root / "checkpoints" / (name + ".ftnn"); }
  std::filesystem::path frames() const { return root / "frames"; }
  std::filesystem::path masks() const { return root / "masks"; }
  std::filesystem::path tracks() const { return root / "tracks"; }
  std::filesystem::path metrics() const { return root / "metrics.csv"; }
  std::filesystem::path meta() const { return root / "run.meta"; }
};

/// Split seeds are seed + 1 (train), + 2 (references), + 3 (test),
/// + 4 (validation), + 5 (tracking), + 6..8 (occluder train, references,
/// test). Network initialisation uses seed + 11..13, shuffling seed + 21..24.
enum class SeedSlot {
  kTrain = 1,
  kReferences = 2,
  kTest = 3,
  kValidation = 4,
  kTrack = 5,
  kOccluderTrain = 6,
  kOccluderReferences = 7,
  kOccluderTest = 8,
  kFlowInit = 11,
  kDeconvInit = 12,
  kInverseInit = 13,
  kFlowShuffle = 21,
  kDeconvShuffle = 22,
  kInverseShuffle = 23,
  kOccluderShuffle = 24,
};
std::uint64_t derived_seed(const RunConfig& cfg, SeedSlot slot);

const std::vector<std::string>& commands();

/// Runs one subcommand against the run directory and rewrites run.meta.
/// Missing datasets or checkpoints raise not_found.
void run_command(const RunConfig& cfg, const std::filesystem::path& root, const std::string& command);

void gen_data(const RunConfig& cfg, const RunPaths& paths);
void train_forward(const RunConfig& cfg, const RunPaths& paths);
void train_deconv(const RunConfig& cfg, const RunPaths& paths);
void train_inverse(const RunConfig& cfg, const RunPaths& paths);
void predict(const RunConfig& cfg, const RunPaths& paths);
void eval(const RunConfig& cfg, const RunPaths& paths);
void track_ekf(const RunConfig& cfg, const RunPaths& paths);
void track_inverse(const RunConfig& cfg, const RunPaths& paths);
void occlusion(const RunConfig& cfg, const RunPaths& paths);

/// Plain-text table of metrics.csv; also written to report.txt.
std::string report(const RunPaths& paths);

/// Name used in file names and metrics rows, e.g. knnflow_k2, deconv, nn1.
std::string model_label(const RunConfig& cfg);
/// Track file name for the EKF at the configured offset, e.g. ekf_off10.csv.
std::string ekf_track_name(const RunConfig& cfg);

}  // namespace armview::harness
