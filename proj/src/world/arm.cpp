// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "world/arm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "common/error.hpp"

namespace armview::world {
namespace {

constexpr double kSubOffsets[2] = {0.25, 0.75};
constexpr float kShadeBase = 0.55f;
constexpr float kShadeSlope = 0.45f;

struct Segment {
  Point a;
  Point b;
  double radius;
};

struct Hit {
  int link = -1;   // -1 = not covered
  double along = 0.0;  // fraction of the link length, in [0, 1]
};

std::vector<Segment> segments(const ArmModel& arm, std::span<const double> q) {
  const auto pts = forward_kinematics(arm, q);
  std::vector<Segment> segs;
  for (int i = 0; i < arm.dof(); ++i) segs.push_back({pts[i], pts[i + 1], arm.width_px(i) / 2.0});
  return segs;
}

// Closest-point parameter of p on segment s (clamped to [0, 1]) and the
// squared distance to it.
std::pair<double, double> project(const Segment& s, Point p) {
  const double dx = s.b.x - s.a.x, dy = s.b.y - s.a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = s.a.x + t * dx - p.x, ey = s.a.y + t * dy - p.y;
  return {t, ex * ex + ey * ey};
}

// Topmost link covering p (later links are painted over earlier ones).
Hit topmost(const std::vector<Segment>& segs, Point p) {
  Hit hit;
  for (int i = 0; i < static_cast<int>(segs.size()); ++i) {
    const auto [t, d2] = project(segs[i], p);
    if (d2 <= segs[i].radius * segs[i].radius) hit = {i, t};
  }
  return hit;
}

Rgb shade(const ArmModel& arm, const Hit& hit) {
  const Rgb& c = arm.link_colors[hit.link];
  const float s = kShadeBase + kShadeSlope * static_cast<float>(hit.along);
  return {c.r * s, c.g * s, c.b * s};
}

}  // namespace

void ArmModel::validate() const {
  const std::size_t n = link_lengths.size();
  if (n < 2) throw invalid_argument("arm: dof must be at least 2");
  if (link_widths.size() != n || link_colors.size() != n || lower.size() != n ||
      upper.size() != n) {
    throw invalid_argument("arm: per-link vectors must all have dof entries");
  }
  if (image_size < 8) throw invalid_argument("arm: image size too small");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(link_lengths[i] > 0.0) || !(link_widths[i] > 0.0)) {
      throw invalid_argument("arm: link lengths and widths must be positive");
    }
    if (!(lower[i] < upper[i])) throw invalid_argument("arm: joint limits must satisfy lo < hi");
    for (std::size_t j = 0; j < i; ++j) {
      if (link_colors[i] == link_colors[j]) throw invalid_argument("arm: link colours must differ");
    }
    if (link_colors[i] == background) throw invalid_argument("arm: link colour equals background");
  }
  const double reach = std::accumulate(link_lengths.begin(), link_lengths.end(), 0.0) * image_size +
                       *std::max_element(link_widths.begin(), link_widths.end()) * image_size / 2.0;
  if (base.x - reach < 0.0 || base.x + reach > image_size || base.y - reach < 0.0 ||
      base.y + reach > image_size) {
    throw invalid_argument("arm: fully stretched arm leaves the frame");
  }
}

ArmModel ArmModel::desk_default(int dof, int image_size, double limit) {
  static const Rgb kPalette[] = {{0.90f, 0.30f, 0.20f}, {0.25f, 0.80f, 0.30f},
                                 {0.25f, 0.45f, 0.95f}, {0.85f, 0.35f, 0.85f},
                                 {0.30f, 0.85f, 0.85f}, {0.95f, 0.60f, 0.20f}};
  if (dof < 2 || dof > 6) throw invalid_argument("arm: desk default supports 2..6 joints");
  ArmModel arm;
  arm.image_size = image_size;
  // Total reach 0.46 of the width plus half the widest link stays inside a
  // frame whose centre holds the base.
  const double total = 0.44;
  double weight_sum = 0.0;
  for (int i = 0; i < dof; ++i) weight_sum += 1.0 - 0.2 * i;
  for (int i = 0; i < dof; ++i) {
    arm.link_lengths.push_back(total * (1.0 - 0.2 * i) / weight_sum);
    arm.link_widths.push_back(0.09 - 0.015 * i);
    arm.link_colors.push_back(kPalette[i]);
    arm.lower.push_back(-limit);
    arm.upper.push_back(limit);
  }
  arm.base = {image_size / 2.0, image_size / 2.0};
  arm.background = {0.08f, 0.08f, 0.10f};
  arm.validate();
  return arm;
}

Occluder Occluder::rect(double x0, double y0, double x1, double y1, Rgb color) {
  Occluder o;
  o.kind = Kind::kRect;
  o.x0 = std::min(x0, x1);
  o.x1 = std::max(x0, x1);
  o.y0 = std::min(y0, y1);
  o.y1 = std::max(y0, y1);
  o.color = color;
  return o;
}

Occluder Occluder::disc(double cx, double cy, double radius, Rgb color) {
  Occluder o;
  o.kind = Kind::kDisc;
  o.x0 = cx;
  o.y0 = cy;
  o.radius = radius;
  o.color = color;
  return o;
}

bool Occluder::contains(Point p) const {
  if (kind == Kind::kRect) return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  const double dx = p.x - x0, dy = p.y - y0;
  return dx * dx + dy * dy <= radius * radius;
}

void Occluder::validate(int image_size) const {
  const double s = image_size;
  const bool inside = kind == Kind::kRect
                          ? (x0 > 0 && y0 > 0 && x1 < s && y1 < s && x0 < x1 && y0 < y1)
                          : (radius > 0 && x0 - radius > 0 && x0 + radius < s &&
                             y0 - radius > 0 && y0 + radius < s);
  if (!inside) throw invalid_argument("occluder must lie strictly inside the frame");
}

bool within_limits(const ArmModel& arm, std::span<const double> q) {
  if (static_cast<int>(q.size()) != arm.dof()) return false;
  for (int i = 0; i < arm.dof(); ++i) {
    if (!(q[i] >= arm.lower[i] && q[i] <= arm.upper[i])) return false;
  }
  return true;
}

std::vector<Point> forward_kinematics(const ArmModel& arm, std::span<const double> q) {
  if (static_cast<int>(q.size()) != arm.dof()) {
    throw invalid_argument("forward_kinematics: expected " + std::to_string(arm.dof()) +
                           " joint angles, got " + std::to_string(q.size()));
  }
  if (!within_limits(arm, q)) throw invalid_argument("forward_kinematics: configuration out of limits");
  std::vector<Point> pts{arm.base};
  double heading = 0.0;
  Point p = arm.base;
  for (int i = 0; i < arm.dof(); ++i) {
    heading += q[i];
    p = {p.x + arm.length_px(i) * std::cos(heading), p.y + arm.length_px(i) * std::sin(heading)};
    pts.push_back(p);
  }
  return pts;
}

Point pixel_center(int row, int col, int image_size) {
  return {col + 0.5, image_size - row - 0.5};
}

std::optional<std::pair<int, int>> pixel_of(Point p, int image_size) {
  const int col = static_cast<int>(std::floor(p.x));
  const int row = static_cast<int>(std::floor(image_size - p.y));
  if (col < 0 || row < 0 || col >= image_size || row >= image_size) return std::nullopt;
  return std::make_pair(row, col);
}

Image render(const ArmModel& arm, std::span<const double> q, const std::optional<Occluder>& occluder) {
  const auto segs = segments(arm, q);
  const int n = arm.image_size;
  Image img(n, n, 3);
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      double acc[3] = {0.0, 0.0, 0.0};
      for (double oy : kSubOffsets) {
        for (double ox : kSubOffsets) {
          const Point p{col + ox, n - row - 1 + oy};
          Rgb c = arm.background;
          const Hit hit = topmost(segs, p);
          if (hit.link >= 0) c = shade(arm, hit);
          if (occluder && occluder->contains(p)) c = occluder->color;
          acc[0] += c.r;
          acc[1] += c.g;
          acc[2] += c.b;
        }
      }
      for (int ch = 0; ch < 3; ++ch) img.at(ch, row, col) = static_cast<float>(acc[ch] / 4.0);
    }
  }
  return img;
}

Mask silhouette(const ArmModel& arm, std::span<const double> q) {
  const auto segs = segments(arm, q);
  const int n = arm.image_size;
  Mask m(n, n);
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      bool covered = false;
      for (double oy : kSubOffsets)
        for (double ox : kSubOffsets)
          covered = covered || topmost(segs, {col + ox, n - row - 1 + oy}).link >= 0;
      m.set(row, col, covered);
    }
  }
  return m;
}

Mask occlusion_ground_truth(const ArmModel& arm, std::span<const double> q,
                            const std::optional<Occluder>& occluder) {
  const int n = arm.image_size;
  Mask truth(n, n);
  if (!occluder) return truth;
  const Mask arm_pixels = silhouette(arm, q);
  const Image plain = render(arm, q);
  const Image covered = render(arm, q, occluder);
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      if (!arm_pixels.at(row, col)) continue;
      bool changed = false;
      for (int c = 0; c < 3; ++c) changed = changed || plain.at(c, row, col) != covered.at(c, row, col);
      truth.set(row, col, changed);
    }
  }
  return truth;
}

Mask occlusion_transfer_truth(const ArmModel& arm, std::span<const double> q1,
                              std::span<const double> q2, const std::optional<Occluder>& occluder) {
  const auto segs1 = segments(arm, q1);
  const auto segs2 = segments(arm, q2);
  const Mask arm_pixels = silhouette(arm, q1);
  const int n = arm.image_size;
  Mask truth(n, n);
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      if (!arm_pixels.at(row, col)) continue;
      const Point p = pixel_center(row, col, n);
      Hit hit = topmost(segs1, p);
      if (hit.link < 0) {
        // Edge pixel whose centre falls just outside every capsule: attach it
        // to the nearest link.
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < arm.dof(); ++i) {
          const auto [t, d2] = project(segs1[i], p);
          if (d2 < best) {
            best = d2;
            hit = {i, t};
          }
        }
      }
      // Express p in the frame of its link and carry it to the second pose.
      const Segment& a = segs1[hit.link];
      const Segment& b = segs2[hit.link];
      const double ax = a.b.x - a.a.x, ay = a.b.y - a.a.y;
      const double alen = std::hypot(ax, ay);
      const double ux = ax / alen, uy = ay / alen;
      const double along = (p.x - a.a.x) * ux + (p.y - a.a.y) * uy;
      const double across = -(p.x - a.a.x) * uy + (p.y - a.a.y) * ux;
      const double bx = b.b.x - b.a.x, by = b.b.y - b.a.y;
      const double blen = std::hypot(bx, by);
      const double vx = bx / blen, vy = by / blen;
      const Point moved{b.a.x + along * vx - across * vy, b.a.y + along * vy + across * vx};

      bool hidden = occluder && occluder->contains(moved);
      for (int j = hit.link + 1; j < arm.dof() && !hidden; ++j) {
        const auto [t, d2] = project(segs2[j], moved);
        hidden = d2 <= segs2[j].radius * segs2[j].radius;
      }
      hidden = hidden || !pixel_of(moved, n).has_value();
      truth.set(row, col, hidden);
    }
  }
  return truth;
}

}  // namespace armview::world
