// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <set>

#include "common/error.hpp"
#include "doctest.h"
#include "world/arm.hpp"
#include "world/dataset.hpp"

using namespace armview;
using namespace armview::world;

namespace {

ArmModel two_link() {
  ArmModel arm = ArmModel::desk_default(2);
  return arm;
}

JointConfig random_q(const ArmModel& arm, std::mt19937_64& rng) {
  JointConfig q(arm.dof());
  for (int i = 0; i < arm.dof(); ++i) q[i] = std::uniform_real_distribution<double>(arm.lower[i], arm.upper[i])(rng);
  return q;
}

// Plain point-to-segment distance, written independently of the renderer.
double segment_distance(Point p, Point a, Point b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double wx = p.x - a.x, wy = p.y - a.y;
  const double c1 = vx * wx + vy * wy;
  if (c1 <= 0) return std::hypot(wx, wy);
  const double c2 = vx * vx + vy * vy;
  if (c2 <= c1) return std::hypot(p.x - b.x, p.y - b.y);
  const double t = c1 / c2;
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

bool is_background(const ArmModel& arm, const Image& img, int row, int col) {
  return img.at(0, row, col) == arm.background.r && img.at(1, row, col) == arm.background.g &&
         img.at(2, row, col) == arm.background.b;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("armview_world_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("straight arm reaches base plus total length along x") {
  const ArmModel arm = two_link();
  const auto pts = forward_kinematics(arm, JointConfig{0.0, 0.0});
  REQUIRE(pts.size() == 3);
  const double reach = arm.length_px(0) + arm.length_px(1);
  CHECK(pts.back().x == doctest::Approx(arm.base.x + reach).epsilon(1e-12));
  CHECK(pts.back().y == doctest::Approx(arm.base.y).epsilon(1e-12));
}

TEST_CASE("quarter turn points the arm up") {
  const ArmModel arm = two_link();
  const auto pts = forward_kinematics(arm, JointConfig{std::numbers::pi / 2, 0.0});
  const double reach = arm.length_px(0) + arm.length_px(1);
  CHECK(std::abs(pts.back().x - arm.base.x) < 1e-12);
  CHECK(pts.back().y == doctest::Approx(arm.base.y + reach).epsilon(1e-12));
}

TEST_CASE("tip never leaves the reach disc") {
  const ArmModel arm = ArmModel::desk_default();
  std::mt19937_64 rng(5);
  double reach = 0.0;
  for (int i = 0; i < arm.dof(); ++i) reach += arm.length_px(i);
  for (int trial = 0; trial < 500; ++trial) {
    const auto pts = forward_kinematics(arm, random_q(arm, rng));
    CHECK(std::hypot(pts.back().x - arm.base.x, pts.back().y - arm.base.y) <= reach + 1e-9);
  }
}

TEST_CASE("kinematics rejects bad configurations") {
  const ArmModel arm = ArmModel::desk_default();
  CHECK_THROWS_AS(forward_kinematics(arm, JointConfig{0.0, 0.0}), Error);
  CHECK_THROWS_AS(forward_kinematics(arm, JointConfig{0.0, 2.7, 0.0}), Error);
  CHECK_THROWS_AS(ArmModel::desk_default(1), Error);
  ArmModel wide = arm;
  wide.link_lengths[0] = 0.6;
  CHECK_THROWS_AS(wide.validate(), Error);
  ArmModel same = arm;
  same.link_colors[1] = same.link_colors[0];
  CHECK_THROWS_AS(same.validate(), Error);
}

TEST_CASE("rendering is bit-exact and continuous") {
  const ArmModel arm = ArmModel::desk_default();
  const JointConfig q{0.4, -1.1, 0.7};
  const Image a = render(arm, q);
  const Image b = render(arm, q);
  CHECK(a == b);
  JointConfig q2 = q;
  for (double& v : q2) v += 1e-9;
  const Image c = render(arm, q2);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += std::abs(a.pixels[i] - c.pixels[i]);
  CHECK(diff / a.size() < 1e-3);
  for (float v : a.pixels) CHECK((v >= 0.0f && v <= 1.0f));
}

TEST_CASE("occluder over the tip wins the painter's order") {
  const ArmModel arm = ArmModel::desk_default();
  const JointConfig q{0.3, 0.5, -0.4};
  const Point tip = forward_kinematics(arm, q).back();
  const Occluder occ = Occluder::rect(tip.x - 4, tip.y - 4, tip.x + 4, tip.y + 4, {0.95f, 0.85f, 0.2f});
  const Image img = render(arm, q, occ);
  const auto px = pixel_of(tip, arm.image_size);
  REQUIRE(px.has_value());
  CHECK(img.at(0, px->first, px->second) == occ.color.r);
  CHECK(img.at(1, px->first, px->second) == occ.color.g);
  CHECK(img.at(2, px->first, px->second) == occ.color.b);
}

TEST_CASE("occluders must sit strictly inside the frame") {
  CHECK_THROWS_AS(Occluder::rect(0, 5, 10, 10, {}).validate(64), Error);
  CHECK_THROWS_AS(Occluder::disc(60, 30, 5, {}).validate(64), Error);
  CHECK_NOTHROW(Occluder::disc(30, 30, 5, {}).validate(64));
}

TEST_CASE("pixels within half a link width are never background") {
  const ArmModel arm = ArmModel::desk_default();
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const JointConfig q = random_q(arm, rng);
    const auto pts = forward_kinematics(arm, q);
    const Image img = render(arm, q);
    const Mask sil = silhouette(arm, q);
    for (int row = 0; row < arm.image_size; ++row) {
      for (int col = 0; col < arm.image_size; ++col) {
        const Point p = pixel_center(row, col, arm.image_size);
        bool inside = false;
        for (int i = 0; i < arm.dof(); ++i) {
          inside = inside || segment_distance(p, pts[i], pts[i + 1]) <= arm.width_px(i) / 2.0;
        }
        if (inside) {
          CHECK(sil.at(row, col));
          CHECK_FALSE(is_background(arm, img, row, col));
        }
        if (!sil.at(row, col)) CHECK(is_background(arm, img, row, col));
      }
    }
  }
}

TEST_CASE("trajectory datasets") {
  const ArmModel arm = ArmModel::desk_default();
  SUBCASE("counting") {
    const Dataset ds = generate_trajectory_dataset(arm, 100, 20, 3);
    CHECK(ds.size() == 2000);
    std::set<std::int64_t> ids, samples;
    for (const auto& r : ds.records) {
      ids.insert(*r.trajectory_id);
      samples.insert(r.sample_id);
    }
    CHECK(ids.size() == 100);
    CHECK(samples.size() == 2000);
    // Contiguous grouping.
    for (std::size_t i = 1; i < ds.size(); ++i) {
      CHECK(*ds.records[i].trajectory_id >= *ds.records[i - 1].trajectory_id);
    }
  }
  SUBCASE("single step stays at the start point") {
    const Dataset one = generate_trajectory_dataset(arm, 5, 1, 9);
    CHECK(one.size() == 5);
    UniformSource src(9);
    for (const auto& r : one.records) {
      const JointConfig start = src.config(arm);
      src.config(arm);
      CHECK(r.q == start);
    }
  }
  SUBCASE("interior samples lie on the segment") {
    const Dataset ds = generate_trajectory_dataset(arm, 10, 7, 11);
    for (const auto& group : ds.trajectories()) {
      REQUIRE(group.size() == 7);
      const JointConfig& a = ds.records[group.front()].q;
      const JointConfig& b = ds.records[group.back()].q;
      for (std::size_t k = 1; k + 1 < group.size(); ++k) {
        const JointConfig& q = ds.records[group[k]].q;
        // Best-fit line parameter, then distance to the segment.
        double num = 0.0, den = 0.0;
        for (int j = 0; j < arm.dof(); ++j) {
          num += (q[j] - a[j]) * (b[j] - a[j]);
          den += (b[j] - a[j]) * (b[j] - a[j]);
        }
        const double t = num / den;
        CHECK(t >= 0.0);
        CHECK(t <= 1.0);
        double dist2 = 0.0;
        for (int j = 0; j < arm.dof(); ++j) {
          const double e = q[j] - (a[j] + t * (b[j] - a[j]));
          dist2 += e * e;
        }
        CHECK(std::sqrt(dist2) < 1e-6);
      }
    }
  }
  SUBCASE("invalid counts") {
    CHECK_THROWS_AS(generate_trajectory_dataset(arm, 0, 5, 1), Error);
    CHECK_THROWS_AS(generate_trajectory_dataset(arm, 5, 0, 1), Error);
  }
}

TEST_CASE("uniform datasets") {
  const ArmModel arm = ArmModel::desk_default();
  CHECK(generate_uniform_dataset(arm, 0, 1).empty());

  const Dataset a = generate_uniform_dataset(arm, 20, 42);
  const Dataset b = generate_uniform_dataset(arm, 20, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.records[i].q == b.records[i].q);
    CHECK(a.records[i].image == b.records[i].image);
    CHECK_FALSE(a.records[i].trajectory_id.has_value());
  }

  // Mean of U(lo, hi) is the midpoint with standard error (hi-lo)/sqrt(12 n).
  const int n = 10000;
  UniformSource src(123);
  std::vector<double> mean(arm.dof(), 0.0);
  for (int i = 0; i < n; ++i) {
    const JointConfig q = src.config(arm);
    for (int j = 0; j < arm.dof(); ++j) {
      CHECK(q[j] >= arm.lower[j]);
      CHECK(q[j] <= arm.upper[j]);
      mean[j] += q[j] / n;
    }
  }
  for (int j = 0; j < arm.dof(); ++j) {
    const double mid = 0.5 * (arm.lower[j] + arm.upper[j]);
    const double se = (arm.upper[j] - arm.lower[j]) / std::sqrt(12.0 * n);
    CHECK(std::abs(mean[j] - mid) < 3.0 * se);
  }
}

TEST_CASE("occlusion ground truth") {
  const ArmModel arm = ArmModel::desk_default();
  const JointConfig q{0.9, -0.6, 1.2};
  CHECK_FALSE(occlusion_ground_truth(arm, q, std::nullopt).any());

  const Occluder everything = Occluder::rect(0.01, 0.01, 63.99, 63.99, {0.95f, 0.85f, 0.2f});
  CHECK(occlusion_ground_truth(arm, q, everything) == silhouette(arm, q));

  // Corner disc well away from the arm.
  const auto pts = forward_kinematics(arm, q);
  Occluder far = Occluder::disc(5, 5, 3, {0.95f, 0.85f, 0.2f});
  for (const auto& p : pts) REQUIRE(std::hypot(p.x - 5, p.y - 5) > 12);
  CHECK_FALSE(occlusion_ground_truth(arm, q, far).any());
}

TEST_CASE("transfer truth follows the moving links") {
  const ArmModel arm = ArmModel::desk_default();
  const JointConfig q{0.2, 0.4, -0.3};
  // Identical configurations and no occluder: only self-overlap can hide
  // points, and the pose is open, so nothing is hidden.
  CHECK_FALSE(occlusion_transfer_truth(arm, q, q, std::nullopt).any());
  const Point tip = forward_kinematics(arm, q).back();
  const Occluder occ = Occluder::disc(tip.x, tip.y, 4, {0.95f, 0.85f, 0.2f});
  const Mask hidden = occlusion_transfer_truth(arm, q, q, occ);
  const Mask direct = occlusion_ground_truth(arm, q, occ);
  CHECK(hidden.any());
  // Every pixel whose centre lies in the occluder is hidden.
  for (int row = 0; row < arm.image_size; ++row)
    for (int col = 0; col < arm.image_size; ++col)
      if (hidden.at(row, col)) CHECK(direct.at(row, col));
}

TEST_CASE("dataset round trip through disk") {
  const ArmModel arm = ArmModel::desk_default();
  const Occluder occ = Occluder::disc(20, 44, 6, {0.95f, 0.85f, 0.2f});
  const Dataset ds = generate_trajectory_dataset(arm, 3, 4, 8, occ);
  const auto dir = scratch("roundtrip");
  save_dataset(ds, dir);
  const Dataset back = load_dataset(dir);
  REQUIRE(back.size() == ds.size());
  CHECK(back.seed == ds.seed);
  CHECK(back.kind == ds.kind);
  REQUIRE(back.occluder.has_value());
  CHECK(back.occluder->radius == occ.radius);
  CHECK(back.arm.link_lengths == arm.link_lengths);
  CHECK(back.arm.link_colors == arm.link_colors);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.records[i].q == ds.records[i].q);
    CHECK(back.records[i].trajectory_id == ds.records[i].trajectory_id);
    CHECK(back.records[i].image == ds.records[i].image);
  }
  CHECK_THROWS_AS(load_dataset(dir / "missing"), Error);
  std::filesystem::remove_all(dir);
}
