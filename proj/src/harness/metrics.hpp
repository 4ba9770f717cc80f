// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "world/image.hpp"

namespace armview::harness {

struct ImageMetrics {
  double mean_l1 = 0.0;
  double rms = 0.0;
};

/// Pixel-wise mean |p - t| and sqrt(mean (p - t)^2) over all frames.
ImageMetrics compute_metrics(std::span<const world::Image> predictions, std::span<const world::Image> truth);

/// One line of metrics.csv. Unused columns stay empty.
struct MetricsRow {
  std::string kind;     // forward, track or occlusion
  std::string model;    // e.g. knnflow_k1, deconv, nn1, ekf, inverse
  std::string split;    // dataset split evaluated
  std::string setting;  // free-form, e.g. offset_deg=10
  std::optional<double> mean_l1;
  std::optional<double> rms;
  std::vector<double> rmse;  // per joint, radians
  std::optional<double> precision;
  std::optional<double> recall;
};

inline constexpr const char* kMetricsHeader = "kind,model,split,setting,mean_L1,rms,rmse,precision,recall";

/// Creates the file with its header row when missing. Reals are printed with
/// nine significant digits; per-joint RMSE values are joined with ';'.
void append_metrics(const std::filesystem::path& path, const MetricsRow& row);
std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

}  // namespace armview::harness
