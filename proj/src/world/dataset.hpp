// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "world/arm.hpp"
#include "world/image.hpp"

namespace armview::world {

struct Record {
  std::int64_t sample_id = 0;
  std::optional<std::int64_t> trajectory_id;  // nullopt = NONE
  JointConfig q;
  Image image;
};

struct Dataset {
  ArmModel arm;
  std::uint64_t seed = 0;
  std::string kind;  // "trajectory" or "uniform"
  std::optional<Occluder> occluder;
  std::vector<Record> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  /// Indices of each trajectory's records in order, grouped by trajectory id.
  std::vector<std::vector<std::size_t>> trajectories() const;
};

/// Uniform draw in [lo, hi) from the top 53 bits of a 64-bit Mersenne twister
/// output, so the stream is identical across standard libraries.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed);
  double next(double lo, double hi);
  JointConfig config(const ArmModel& arm);
  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Each trajectory linearly interpolates two random in-limit endpoints over
/// `steps` samples (a single step stays at the start point).
Dataset generate_trajectory_dataset(const ArmModel& arm, int n_traj, int steps, std::uint64_t seed,
                                    const std::optional<Occluder>& occluder = std::nullopt);

Dataset generate_uniform_dataset(const ArmModel& arm, int n, std::uint64_t seed,
                                 const std::optional<Occluder>& occluder = std::nullopt);

/// `manifest.csv`, `dataset.meta` and `images/<sample>.ppm` under `dir`.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

std::string format_double(double v);

}  // namespace armview::world
