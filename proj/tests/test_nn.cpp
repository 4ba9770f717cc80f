// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "common/error.hpp"
#include "doctest.h"
#include "nn/adam.hpp"
#include "nn/checkpoint.hpp"
#include "nn/network.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace armview;
using namespace armview::nn;
using armview::testing::central_difference;
using armview::testing::relative_error;
using armview::testing::check_gradients;
using armview::testing::probe;
using armview::testing::random_tensor;

TEST_CASE("dense layer with identity weights passes input through") {
  Network net({3});
  auto& fc = net.emplace<Dense>(3, 3);
  for (int i = 0; i < 3; ++i) fc.weight()[i * 3 + i] = 1.0f;
  const Tensor x({3}, {0.25f, -1.5f, 4.0f});
  const Tensor y = net.infer(x);
  CHECK(y.shape() == Shape{1, 3});
  for (int i = 0; i < 3; ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("relu clamps negatives") {
  Network net({3});
  net.emplace<Relu>();
  const Tensor y = net.infer(Tensor({3}, {-1.0f, 0.0f, 2.0f}));
  CHECK(y[0] == 0.0f);
  CHECK(y[1] == 0.0f);
  CHECK(y[2] == 2.0f);
}

TEST_CASE("two-layer network matches a hand-rolled matmul") {
  std::mt19937_64 rng(3);
  Network net({3});
  net.emplace<Dense>(3, 3);
  net.emplace<Relu>();
  net.emplace<Dense>(3, 3);
  net.initialize(11);
  auto params = net.parameters();
  for (Tensor* b : {params[1], params[3]}) *b = random_tensor({3}, rng);
  const Tensor x = random_tensor({3}, rng);

  const Tensor& w1 = *params[0];
  const Tensor& b1 = *params[1];
  const Tensor& w2 = *params[2];
  const Tensor& b2 = *params[3];
  double h[3], expect[3];
  for (int r = 0; r < 3; ++r) {
    double s = b1[r];
    for (int c = 0; c < 3; ++c) s += static_cast<double>(w1[r * 3 + c]) * x[c];
    h[r] = std::max(0.0, static_cast<double>(static_cast<float>(s)));
  }
  for (int r = 0; r < 3; ++r) {
    double s = b2[r];
    for (int c = 0; c < 3; ++c) s += static_cast<double>(w2[r * 3 + c]) * h[c];
    expect[r] = s;
  }
  const Tensor y = net.infer(x);
  for (int r = 0; r < 3; ++r) CHECK(std::abs(y[r] - expect[r]) < 1e-6);
}

TEST_CASE("shape mismatch names the offending layer") {
  Network net({4});
  net.emplace<Dense>(4, 8);
  CHECK_THROWS_AS(net.emplace<Dense>(5, 2), Error);
  try {
    net.emplace<Dense>(5, 2);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kShapeMismatch);
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
  }
  CHECK_THROWS_AS(net.infer(Tensor({5})), Error);
}

TEST_CASE("backward before forward is an error") {
  Network net({2});
  net.emplace<Dense>(2, 2);
  Trace trace;
  CHECK_THROWS_AS(net.backward(trace, Tensor({2})), Error);
}

TEST_CASE("zero output gradient gives zero gradients") {
  Network net({3});
  net.emplace<Dense>(3, 4);
  net.emplace<Relu>();
  net.emplace<Dense>(4, 2);
  net.initialize(5);
  Trace trace;
  net.forward(Tensor({3}, {0.3f, -0.2f, 0.9f}), Mode::kTrain, trace);
  Gradients g = net.zero_gradients();
  const Tensor dx = net.backward(trace, Tensor({2}), &g);
  for (float v : dx.values()) CHECK(v == 0.0f);
  for (const Tensor& t : g) CHECK(t.squared_norm() == 0.0);
}

TEST_CASE("relu input gradient vanishes at negative pre-activation") {
  Network net({2});
  net.emplace<Relu>();
  Trace trace;
  net.forward(Tensor({2}, {-0.5f, 0.5f}), Mode::kTrain, trace);
  const Tensor dx = net.backward(trace, Tensor({2}, {3.0f, 3.0f}));
  CHECK(dx[0] == 0.0f);
  CHECK(dx[1] == 3.0f);
}

TEST_CASE("four-parameter network gradients agree with central differences") {
  Network net({1});
  net.emplace<Dense>(1, 2);
  net.emplace<Relu>();
  auto params = net.parameters();
  (*params[0])[0] = 0.8f;
  (*params[0])[1] = -0.6f;
  (*params[1])[0] = 0.1f;
  (*params[1])[1] = 0.9f;
  REQUIRE(net.parameter_count() == 4);
  const Tensor x = Tensor({1, 1}, {0.7f});
  const Tensor c({1, 2}, {1.3f, -0.4f});
  Trace trace;
  net.forward(x, Mode::kEval, trace);
  Gradients g = net.zero_gradients();
  net.backward(trace, c, &g);
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p]->size(); ++i) {
      const double fd = central_difference((*params[p])[i], 1e-3, [&] { return probe(net, x, c); });
      const double a = g[p][i];
      CHECK(std::abs(a - fd) <= 1e-4 * std::max(std::abs(a), 1e-8));
    }
  }
}

// Inputs are kept within +-0.5 so that the float rounding of layer outputs
// stays well below the change a 1e-3 step induces.
TEST_CASE("every layer kind passes the finite-difference gradient check") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    std::mt19937_64 rng(seed);
    SUBCASE("dense") {
      Network net({5});
      net.emplace<Dense>(5, 4);
      net.initialize(seed);
      *net.parameters()[1] = random_tensor({4}, rng);
      const auto r = check_gradients(net, random_tensor({2, 5}, rng, -0.5, 0.5), seed);
      CHECK(r.param_error < 1e-4);
      CHECK(r.input_error < 1e-4);
    }
    SUBCASE("conv stride 1 and 2") {
      for (int stride : {1, 2}) {
        Network net({2, 6, 6});
        net.emplace<Conv2d>(2, 3, ConvGeometry{3, stride, 1});
        net.initialize(seed);
        *net.parameters()[1] = random_tensor({3}, rng);
        const auto r = check_gradients(net, random_tensor({2, 2, 6, 6}, rng, -0.5, 0.5), seed);
        CHECK(r.param_error < 1e-4);
        CHECK(r.input_error < 1e-4);
      }
    }
    SUBCASE("deconv") {
      Network net({3, 3, 3});
      net.emplace<ConvTranspose2d>(3, 2, ConvGeometry{4, 2, 1});
      net.initialize(seed);
      *net.parameters()[1] = random_tensor({2}, rng);
      CHECK(net.output_shape() == Shape{2, 6, 6});
      const auto r = check_gradients(net, random_tensor({2, 3, 3, 3}, rng, -0.5, 0.5), seed);
      CHECK(r.param_error < 1e-4);
      CHECK(r.input_error < 1e-4);
    }
    SUBCASE("relu away from the kink") {
      Network net({6});
      net.emplace<Relu>();
      Tensor x = random_tensor({2, 6}, rng);
      for (float& v : x.values()) v = v < 0 ? v - 0.05f : v + 0.05f;
      CHECK(check_gradients(net, x, seed).input_error < 1e-4);
    }
    SUBCASE("reshape") {
      Network net({2, 2, 2});
      net.emplace<Reshape>(Shape{8});
      net.emplace<Dense>(8, 3);
      net.initialize(seed);
      const auto r = check_gradients(net, random_tensor({1, 2, 2, 2}, rng), seed);
      CHECK(r.param_error < 1e-4);
      CHECK(r.input_error < 1e-4);
    }
    SUBCASE("dropout in train mode uses its cached mask") {
      Network net({8});
      net.emplace<Dropout>(0.5);
      Trace trace;
      Rng drng(seed);
      const Tensor x = random_tensor({1, 8}, rng);
      const Tensor y = net.forward(x, Mode::kTrain, trace, &drng);
      const Tensor dx = net.backward(trace, Tensor({1, 8}, 1.0f));
      for (std::size_t i = 0; i < 8; ++i) {
        // y = mask * x elementwise, so dy/dx is the mask itself.
        CHECK(dx[i] == (x[i] != 0.0f ? y[i] / x[i] : dx[i]));
        CHECK((dx[i] == 0.0f || dx[i] == 2.0f));
      }
    }
  }
}

TEST_CASE("output shapes match the declared shape algebra") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> dim(2, 9), ch(1, 4);
  for (int trial = 0; trial < 40; ++trial) {
    const int c = ch(rng), h = dim(rng), w = dim(rng), k = ch(rng) + 1;
    const int stride = 1 + trial % 2, pad = trial % 3 == 0 ? 0 : 1;
    Network conv({c, h + k, w + k});
    conv.emplace<Conv2d>(c, ch(rng), ConvGeometry{k, stride, pad});
    conv.initialize(trial);
    Shape got = conv.infer(random_tensor({c, h + k, w + k}, rng)).sample_shape();
    CHECK(got == conv.output_shape());

    Network deconv({c, h, w});
    deconv.emplace<ConvTranspose2d>(c, ch(rng), ConvGeometry{k, stride, 0});
    deconv.initialize(trial);
    got = deconv.infer(random_tensor({c, h, w}, rng)).sample_shape();
    CHECK(got == deconv.output_shape());
  }
}

TEST_CASE("jacobian of a single dense layer is its weight matrix") {
  Network net({3});
  auto& fc = net.emplace<Dense>(3, 2);
  net.initialize(4);
  fc.bias()[0] = 0.5f;
  const Eigen::MatrixXd jac = net.jacobian(Tensor({3}, {0.1f, 0.2f, 0.3f}));
  REQUIRE(jac.rows() == 2);
  REQUIRE(jac.cols() == 3);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) CHECK(jac(r, c) == fc.weight()[r * 3 + c]);
}

TEST_CASE("jacobian of two composed linear layers is B*A") {
  Network net({3});
  net.emplace<Dense>(3, 4);
  net.emplace<Dense>(4, 2);
  net.initialize(8);
  auto params = net.parameters();
  Eigen::MatrixXd a(4, 3), b(2, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 3; ++c) a(r, c) = (*params[0])[r * 3 + c];
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 4; ++c) b(r, c) = (*params[2])[r * 4 + c];
  const Eigen::MatrixXd expect = b * a;
  for (auto mode : {JacobianMode::kForward, JacobianMode::kReverse}) {
    const Eigen::MatrixXd jac = net.jacobian(Tensor({3}, {1.0f, -2.0f, 0.5f}), mode);
    CHECK((jac - expect).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("network jacobian agrees with finite differences") {
  Network net({4});
  net.emplace<Dense>(4, 16);
  net.emplace<Relu>();
  net.emplace<Dense>(16, 6);
  net.initialize(17);
  std::mt19937_64 rng(2);
  Tensor x = random_tensor({4}, rng);
  const Eigen::MatrixXd jac = net.jacobian(x);
  Eigen::MatrixXd fd(6, 4);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 6; ++i)
      fd(i, j) = central_difference(x[j], 1e-3, [&] { return net.infer(x)[i]; });
  CHECK((fd - jac).cwiseAbs().maxCoeff() / jac.cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("reverse jacobian equals one-hot backpropagation exactly") {
  Network net({4});
  net.emplace<Dense>(4, 12);
  net.emplace<Relu>();
  net.emplace<Dense>(12, 5);
  net.initialize(23);
  const Tensor x({4}, {0.3f, -0.7f, 0.2f, 0.9f});
  const Eigen::MatrixXd jac = net.jacobian(x, JacobianMode::kReverse);
  Trace trace;
  net.forward(x, Mode::kEval, trace);
  for (int i = 0; i < 5; ++i) {
    Tensor onehot({5});
    onehot[i] = 1.0f;
    Gradients g = net.zero_gradients();
    const Tensor row = net.backward(trace, onehot, &g);
    for (int j = 0; j < 4; ++j) CHECK(jac(i, j) == row[j]);
  }
}

TEST_CASE("tangent pass through train-mode dropout is rejected") {
  Network net({4});
  net.emplace<Dense>(4, 4);
  net.emplace<Dropout>(0.5);
  net.initialize(1);
  Trace trace;
  Rng rng(1);
  net.forward(Tensor({4}, 0.5f), Mode::kTrain, trace, &rng);
  CHECK_THROWS_AS(net.jvp(trace, Tensor({4}, 1.0f)), Error);
  // Eval mode is differentiable and dropout is the identity.
  const Eigen::MatrixXd jac = net.jacobian(Tensor({4}, 0.5f));
  CHECK(jac.rows() == 4);
}

TEST_CASE("eval mode is deterministic and ignores dropout") {
  auto build = [] {
    Network net({6});
    net.emplace<Dense>(6, 10);
    net.emplace<Relu>();
    net.emplace<Dropout>(0.5);
    net.emplace<Dense>(10, 3);
    net.initialize(99);
    return net;
  };
  const Network a = build();
  const Network b = build();
  const Tensor x({6}, {0.1f, 0.2f, -0.3f, 0.4f, -0.5f, 0.6f});
  const Tensor ya = a.infer(x);
  const Tensor yb = b.infer(x);
  const Tensor ya2 = a.infer(x);
  for (std::size_t i = 0; i < ya.size(); ++i) {
    CHECK(ya[i] == yb[i]);
    CHECK(ya[i] == ya2[i]);
  }
}

TEST_CASE("adam: zero gradients leave parameters and moments at rest") {
  Network net({2});
  net.emplace<Dense>(2, 2);
  net.initialize(3);
  const Tensor before = *net.parameters()[0];
  Adam adam(net);
  adam.step(net, net.zero_gradients());
  CHECK(adam.steps() == 1);
  const Tensor& after = *net.parameters()[0];
  for (std::size_t i = 0; i < after.size(); ++i) CHECK(after[i] == before[i]);
  for (const auto& m : adam.first_moments())
    for (double v : m) CHECK(v == 0.0);
  for (const auto& v2 : adam.second_moments())
    for (double v : v2) CHECK(v == 0.0);
}

TEST_CASE("adam: first step moves by about the learning rate against the gradient") {
  Network net({1});
  auto& fc = net.emplace<Dense>(1, 1);
  fc.weight()[0] = 0.25f;
  Adam adam(net);
  Gradients g = net.zero_gradients();
  g[0][0] = 3.7f;
  adam.step(net, g);
  CHECK(fc.weight()[0] < 0.25f);
  CHECK(std::abs((0.25 - fc.weight()[0]) - 1e-3) < 1e-6);
  g[0][0] = -0.02f;
  Network other({1});
  auto& fc2 = other.emplace<Dense>(1, 1);
  Adam adam2(other);
  adam2.step(other, g);
  CHECK(std::abs(fc2.weight()[0] - 1e-3) < 1e-6);
}

TEST_CASE("adam: non-finite gradient aborts with the parameter name") {
  Network net({2});
  net.emplace<Dense>(2, 2);
  Adam adam(net);
  Gradients g = net.zero_gradients();
  g[1][0] = std::nanf("");
  try {
    adam.step(net, g);
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumeric);
    CHECK(std::string(e.what()).find("dense0.bias") != std::string::npos);
  }
  CHECK(adam.steps() == 0);
}

TEST_CASE("adam: least squares on a small system converges to the normal-equation optimum") {
  // Fit y = W x + b through three points; the optimum solves the normal
  // equations of the augmented design matrix [x 1].
  Eigen::MatrixXd xs(3, 2);
  xs << 1.0, 0.5, -0.5, 1.0, 0.3, -0.8;
  Eigen::Matrix2d w_true;
  w_true << 0.1, -0.06, 0.04, 0.08;
  const Eigen::Vector2d b_true(-0.05, 0.03);
  Eigen::MatrixXd ys = (xs * w_true.transpose()).rowwise() + b_true.transpose();

  Eigen::MatrixXd design(3, 3);
  design << xs, Eigen::VectorXd::Ones(3);
  const Eigen::MatrixXd optimum = (design.transpose() * design).ldlt().solve(design.transpose() * ys);

  Network net({2});
  net.emplace<Dense>(2, 2);
  Adam adam(net);
  std::vector<double> losses;
  Tensor x({3, 2});
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 2; ++j) x[k * 2 + j] = static_cast<float>(xs(k, j));
  for (int step = 0; step < 200; ++step) {
    Trace trace;
    const Tensor y = net.forward(x, Mode::kTrain, trace);
    Tensor dy(y.shape());
    double loss = 0.0;
    for (int k = 0; k < 3; ++k) {
      for (int j = 0; j < 2; ++j) {
        const double r = y[k * 2 + j] - ys(k, j);
        loss += r * r;
        dy[k * 2 + j] = static_cast<float>(2.0 * r);
      }
    }
    losses.push_back(loss);
    Gradients g = net.zero_gradients();
    net.backward(trace, dy, &g);
    adam.step(net, g);
  }
  for (std::size_t i = 11; i < losses.size(); ++i) CHECK(losses[i] <= losses[i - 1]);
  CHECK(losses.back() < 1e-4);
  auto params = net.parameters();
  for (int r = 0; r < 2; ++r) {
    CHECK(std::abs((*params[0])[r * 2 + 0] - optimum(0, r)) < 1e-2);
    CHECK(std::abs((*params[0])[r * 2 + 1] - optimum(1, r)) < 1e-2);
    CHECK(std::abs((*params[1])[r] - optimum(2, r)) < 1e-2);
  }
}

TEST_CASE("checkpoint layout and round trip") {
  Network net({2, 4, 4});
  net.emplace<Conv2d>(2, 3, ConvGeometry{3, 1, 1});
  net.emplace<Reshape>(Shape{48});
  net.emplace<Dense>(48, 2);
  net.initialize(77);
  const auto path = std::filesystem::temp_directory_path() / "armview_ckpt_test.bin";
  save_network(net, path);

  std::ifstream is(path, std::ios::binary);
  char magic[5];
  is.read(magic, 5);
  CHECK(std::string(magic, 5) == "FTNN1");
  unsigned char len[4];
  is.read(reinterpret_cast<char*>(len), 4);
  CHECK(len[0] == std::string("conv0.weight").size());
  CHECK(len[1] == 0);

  Network copy({2, 4, 4});
  copy.emplace<Conv2d>(2, 3, ConvGeometry{3, 1, 1});
  copy.emplace<Reshape>(Shape{48});
  copy.emplace<Dense>(48, 2);
  load_network(copy, path);
  auto a = net.parameters();
  auto b = copy.parameters();
  for (std::size_t p = 0; p < a.size(); ++p)
    for (std::size_t i = 0; i < a[p]->size(); ++i) CHECK((*a[p])[i] == (*b[p])[i]);

  Network wrong({2});
  wrong.emplace<Dense>(2, 2);
  CHECK_THROWS_AS(load_network(wrong, path), Error);
  CHECK_THROWS_AS(load_network(wrong, path.string() + ".missing"), Error);
  std::filesystem::remove(path);
}
