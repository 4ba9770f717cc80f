// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "doctest.h"
#include "inverse/inverse_model.hpp"

using namespace armview;
using namespace armview::inverse;

namespace {

const world::ArmModel& small_arm() {
  static const world::ArmModel arm = world::ArmModel::desk_default(3, 32);
  return arm;
}

std::vector<world::Image> images_of(const world::Dataset& ds) {
  std::vector<world::Image> out;
  for (const auto& r : ds.records) out.push_back(r.image);
  return out;
}

}  // namespace

TEST_CASE("inverse network contract") {
  const InverseModel model(build_inverse_net(3, 32, 5));
  const world::Dataset ds = world::generate_uniform_dataset(small_arm(), 4, 2);
  const world::JointConfig a = model.infer_state(ds.records[0].image);
  CHECK(a.size() == 3);
  CHECK(model.infer_state(ds.records[0].image) == a);
  CHECK_THROWS_AS(model.infer_state(world::Image(16, 16, 3)), Error);
  CHECK_THROWS_AS(model.infer_state(world::Image(32, 32, 1)), Error);
  CHECK_THROWS_AS(build_inverse_net(3, 48, 1), Error);
  CHECK(model.net().has_dropout());
}

TEST_CASE("per-frame tracking is stateless") {
  const InverseModel model(build_inverse_net(3, 32, 6));
  const world::Dataset ds = world::generate_trajectory_dataset(small_arm(), 1, 6, 3);
  std::vector<world::Image> frames = images_of(ds);
  CHECK(track_by_inverse(model, std::vector<world::Image>{}).empty());
  const auto out = track_by_inverse(model, frames);
  REQUIRE(out.size() == frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) CHECK(out[i] == model.infer_state(frames[i]));

  std::vector<std::size_t> perm{4, 1, 5, 0, 3, 2};
  std::vector<world::Image> shuffled;
  for (std::size_t i : perm) shuffled.push_back(frames[i]);
  const auto out2 = track_by_inverse(model, shuffled);
  for (std::size_t i = 0; i < perm.size(); ++i) CHECK(out2[i] == out[perm[i]]);
}

TEST_CASE("inverse training") {
  const world::Dataset train = world::generate_trajectory_dataset(small_arm(), 8, 10, 11);
  nn::TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.seed = 3;

  SUBCASE("zero epochs leave the model unchanged") {
    InverseModel model(build_inverse_net(3, 32, 2));
    const InverseModel before = model;
    cfg.epochs = 0;
    CHECK(train_inverse(model, train, cfg).epoch_loss.empty());
    for (std::size_t p = 0; p < model.net().parameters().size(); ++p) {
      const auto x = model.net().parameters()[p]->values();
      const auto y = before.net().parameters()[p]->values();
      CHECK(std::equal(x.begin(), x.end(), y.begin(), y.end()));
    }
  }
  SUBCASE("fixed seeds reproduce the loss log") {
    cfg.epochs = 2;
    InverseModel a(build_inverse_net(3, 32, 2)), b(build_inverse_net(3, 32, 2));
    CHECK(train_inverse(a, train, cfg).epoch_loss == train_inverse(b, train, cfg).epoch_loss);
  }
  SUBCASE("loss falls over ten epochs") {
    cfg.epochs = 10;
    InverseModel model(build_inverse_net(3, 32, 2));
    const nn::TrainLog log = train_inverse(model, train, cfg);
    REQUIRE(log.epoch_loss.size() == 10);
    CHECK(log.epoch_loss.back() < log.epoch_loss.front());
  }
}

TEST_CASE("inverse model fits its training images") {
  const world::Dataset train = world::generate_uniform_dataset(small_arm(), 100, 21);
  nn::TrainConfig cfg;
  cfg.epochs = 400;
  cfg.batch_size = 10;
  cfg.lr_decay = 0.985;
  InverseModel model(build_inverse_net(3, 32, 4));
  train_inverse(model, train, cfg);
  int good = 0;
  for (const auto& r : train.records) {
    const auto q = model.infer_state(r.image);
    bool ok = true;
    for (int d = 0; d < 3; ++d) ok = ok && std::abs(q[d] - r.q[d]) < 0.05;
    good += ok;
  }
  MESSAGE("within 0.05 rad: " << good << " of 100");
  CHECK(good >= 90);
}
