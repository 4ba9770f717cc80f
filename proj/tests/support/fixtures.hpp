// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

// Random instances shared by the unit tests and the acceptance checks.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "forward/architecture.hpp"
#include "forward/warp.hpp"
#include "nn/network.hpp"
#include "refstore/reference_store.hpp"
#include "support/oracles.hpp"
#include "world/dataset.hpp"

namespace armview::testing {

inline nn::Tensor random_tensor(nn::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  nn::Tensor t(std::move(shape));
  std::uniform_real_distribution<double> d(lo, hi);
  for (float& v : t.values()) v = static_cast<float>(d(rng));
  return t;
}

// Scalar probe objective L = sum_i c_i * y_i, evaluated in double.
inline double probe(const nn::Network& net, const nn::Tensor& x, const nn::Tensor& c) {
  const nn::Tensor y = net.infer(x);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += static_cast<double>(c[i]) * y[i];
  return s;
}

struct GradCheck {
  double param_error = 0.0;
  double input_error = 0.0;
};

inline GradCheck check_gradients(nn::Network& net, nn::Tensor x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  nn::Shape out = net.output_shape();
  out.insert(out.begin(), x.batch());
  const nn::Tensor c = random_tensor(out, rng);
  nn::Trace trace;
  net.forward(x, nn::Mode::kEval, trace);
  nn::Gradients grads = net.zero_gradients();
  const nn::Tensor dx = net.backward(trace, c, &grads);

  std::vector<double> analytic, numeric;
  auto params = net.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p]->size(); ++i) {
      analytic.push_back(grads[p][i]);
      numeric.push_back(central_difference((*params[p])[i], 1e-3, [&] { return probe(net, x, c); }));
    }
  }
  GradCheck r;
  r.param_error = analytic.empty() ? 0.0 : relative_error(analytic, numeric);
  analytic.clear();
  numeric.clear();
  for (std::size_t i = 0; i < x.size(); ++i) {
    analytic.push_back(dx[i]);
    numeric.push_back(central_difference(x[i], 1e-3, [&] { return probe(net, x, c); }));
  }
  r.input_error = relative_error(analytic, numeric);
  return r;
}

inline world::Image random_image(int h, int w, int c, std::mt19937_64& rng) {
  world::Image img(h, w, c);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (float& v : img.pixels) v = u(rng);
  return img;
}

// Flow whose sample points stay at least `margin` away from integer
// coordinates and inside the frame.
inline forward::FlowField fractional_flow(int h, int w, std::mt19937_64& rng, double margin = 0.2) {
  forward::FlowField f(h, w);
  std::uniform_real_distribution<double> frac(margin, 1.0 - margin);
  std::uniform_int_distribution<int> shift(-2, 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int sx = std::clamp(x + shift(rng), 0, w - 2);
      const int sy = std::clamp(y + shift(rng), 0, h - 2);
      f.dx(y, x) = static_cast<float>(sx + frac(rng) - x);
      f.dy(y, x) = static_cast<float>(sy + frac(rng) - y);
    }
  }
  return f;
}

inline double image_dot(const world::Image& a, const world::Image& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a.pixels[i]) * b.pixels[i];
  return s;
}

// Random branch whose sample points sit at fractional offsets (away from the
// bilinear kinks) and whose ReLUs are mostly open.
inline nn::Network smooth_branch(std::uint64_t seed, int size = 16, float head_scale = 0.05f) {
  nn::Network branch = forward::build_generator(6, size, 3);
  branch.initialize(seed);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> positive(0.05f, 0.25f);
  const auto params = branch.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (branch.parameter_names()[p].ends_with(".bias")) {
      for (float& v : params[p]->values()) v = positive(rng);
    }
  }
  auto head = branch.layer(forward::head_layer(branch)).parameters();
  for (float& v : head[0].values()) v *= head_scale;
  head[1][0] = 0.37f;
  head[1][1] = -0.41f;
  return branch;
}

struct SmallWorld {
  world::ArmModel arm = world::ArmModel::desk_default(3, 16);
  std::shared_ptr<world::Dataset> refs =
      std::make_shared<world::Dataset>(world::generate_uniform_dataset(arm, 40, 5));
  world::Dataset train = world::generate_trajectory_dataset(arm, 4, 6, 6);
};

inline Eigen::MatrixXd random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

inline Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng, double floor = 0.1) {
  const Eigen::MatrixXd a = random_matrix(n, n, rng);
  return a * a.transpose() / n + floor * Eigen::MatrixXd::Identity(n, n);
}

inline nn::Network linear_net(int n, int m, std::mt19937_64& rng) {
  nn::Network net({n});
  auto& d = net.emplace<nn::Dense>(n, m);
  std::normal_distribution<float> g(0.0f, 0.5f);
  for (float& v : d.weight().values()) v = g(rng);
  for (float& v : d.bias().values()) v = g(rng);
  return net;
}

inline std::vector<refstore::Entry> random_entries(std::size_t n, int dim, int n_traj, std::mt19937_64& rng,
                                                   bool grid = false) {
  std::uniform_real_distribution<double> u(-2.6, 2.6);
  std::uniform_int_distribution<int> coarse(-3, 3);
  std::uniform_int_distribution<int> traj(0, std::max(n_traj - 1, 0));
  std::vector<refstore::Entry> out;
  for (std::size_t i = 0; i < n; ++i) {
    refstore::Entry e;
    for (int d = 0; d < dim; ++d) e.key.push_back(grid ? coarse(rng) * 0.5 : u(rng));
    // Shuffled ids so tie-breaks do not follow insertion order.
    e.sample_id = static_cast<std::int64_t>((i * 7919) % 100003);
    if (n_traj > 0) e.trajectory_id = traj(rng);
    e.index = i;
    out.push_back(std::move(e));
  }
  return out;
}

// Linear scan with the same metric and tie-break.
inline std::vector<refstore::Neighbor> brute_force(const std::vector<refstore::Entry>& entries,
                                                   std::span<const double> q, int k, bool disjoint) {
  struct Row {
    double d2;
    std::int64_t id;
    std::size_t idx;
    std::pair<bool, std::int64_t> traj;
  };
  std::vector<Row> rows;
  for (const refstore::Entry& e : entries) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) d2 += (q[i] - e.key[i]) * (q[i] - e.key[i]);
    rows.push_back({d2, e.sample_id, e.index,
                    e.trajectory_id ? std::make_pair(true, *e.trajectory_id)
                                    : std::make_pair(false, e.sample_id)});
  }
  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return a.d2 != b.d2 ? a.d2 < b.d2 : a.id < b.id; });
  std::vector<refstore::Neighbor> out;
  std::set<std::pair<bool, std::int64_t>> used;
  for (const Row& r : rows) {
    if (static_cast<int>(out.size()) == k) break;
    if (disjoint && !used.insert(r.traj).second) continue;
    out.push_back({r.id, std::sqrt(r.d2), r.idx});
  }
  return out;
}

}  // namespace armview::testing
