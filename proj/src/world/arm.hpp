// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "world/image.hpp"

namespace armview::world {

/// World coordinates are in pixels with x to the right and y up; the
/// origin is the bottom-left corner of the frame. Pixel (row, col) has its
/// centre at (col + 0.5, height - row - 0.5).
struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Rgb {
  float r = 0.0f;
  float g = 0.0f;
  float b = 0.0f;
  bool operator==(const Rgb&) const = default;
};

using JointConfig = std::vector<double>;

struct ArmModel {
  int image_size = 64;
  std::vector<double> link_lengths;  // fraction of the image width
  std::vector<double> link_widths;   // fraction of the image width
  Point base;                        // pixels
  std::vector<Rgb> link_colors;
  Rgb background;
  std::vector<double> lower;  // radians
  std::vector<double> upper;

  int dof() const { return static_cast<int>(link_lengths.size()); }
  double length_px(int link) const { return link_lengths[link] * image_size; }
  double width_px(int link) const { return link_widths[link] * image_size; }

  /// dof >= 2, consistent per-link vectors, ordered limits, distinct colours
  /// and the fully stretched arm inside the frame.
  void validate() const;

  /// 3-link planar arm on a 64x64 frame with joint limits of +-2.6 rad.
  static ArmModel desk_default(int dof = 3, int image_size = 64, double limit = 2.6);
};

struct Occluder {
  enum class Kind { kRect, kDisc };
  Kind kind = Kind::kRect;
  // Rectangle corners (x0 < x1, y0 < y1) or disc centre (x0, y0) and radius.
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  double radius = 0.0;
  Rgb color{0.95f, 0.85f, 0.2f};

  static Occluder rect(double x0, double y0, double x1, double y1, Rgb color);
  static Occluder disc(double cx, double cy, double radius, Rgb color);
  bool contains(Point p) const;
  /// Must lie strictly inside a frame of the given size.
  void validate(int image_size) const;
};

bool within_limits(const ArmModel& arm, std::span<const double> q);

/// Base followed by the end point of every link; the last entry is the tip.
/// Throws for out-of-limit configurations.
std::vector<Point> forward_kinematics(const ArmModel& arm, std::span<const double> q);

/// Links are anti-aliased capsules shaded along their length, drawn in chain
/// order with 2x2 supersampling; the occluder is painted last.
Image render(const ArmModel& arm, std::span<const double> q,
             const std::optional<Occluder>& occluder = std::nullopt);

/// Pixels with any link coverage.
Mask silhouette(const ArmModel& arm, std::span<const double> q);

/// Arm pixels of render(q) that change when the occluder is added.
Mask occlusion_ground_truth(const ArmModel& arm, std::span<const double> q,
                            const std::optional<Occluder>& occluder);

/// Arm pixels of the first configuration whose material point is hidden in
/// the second one, by the occluder or by a later link.
Mask occlusion_transfer_truth(const ArmModel& arm, std::span<const double> q1,
                              std::span<const double> q2, const std::optional<Occluder>& occluder);

Point pixel_center(int row, int col, int image_size);
/// Pixel (row, col) containing a world point, or nullopt outside the frame.
std::optional<std::pair<int, int>> pixel_of(Point p, int image_size);

}  // namespace armview::world
