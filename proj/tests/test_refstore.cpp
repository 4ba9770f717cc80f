// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "common/error.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"
#include "refstore/reference_store.hpp"

using namespace armview;
using namespace armview::testing;
using namespace armview::refstore;


TEST_CASE("single record tree") {
  ReferenceStore store({Entry{{0.1, 0.2, 0.3}, 7, std::nullopt, 0}});
  CHECK(store.depth() == 0);
  const auto nn = store.query_knn(std::vector<double>{0.1, 0.2, 0.3}, 1, false);
  REQUIRE(nn.size() == 1);
  CHECK(nn[0].sample_id == 7);
  CHECK(nn[0].distance == 0.0);
}

TEST_CASE("empty store and bad queries are rejected") {
  CHECK_THROWS_AS(ReferenceStore(std::vector<Entry>{}), Error);
  std::mt19937_64 rng(1);
  ReferenceStore store(random_entries(20, 3, 4, rng));
  const std::vector<double> q{0, 0, 0};
  CHECK_THROWS_AS(store.query_knn(q, 0, false), Error);
  CHECK_THROWS_AS(store.query_knn(q, 21, false), Error);
  CHECK_THROWS_AS(store.query_knn(q, 5, true), Error);
  CHECK_THROWS_AS(store.query_knn(std::vector<double>{0, 0}, 1, false), Error);
}

TEST_CASE("every stored key finds itself") {
  std::mt19937_64 rng(2);
  const auto entries = random_entries(300, 3, 0, rng);
  ReferenceStore store(entries);
  for (const Entry& e : entries) {
    const auto nn = store.query_knn(e.key, 1, false);
    CHECK(nn[0].sample_id == e.sample_id);
    CHECK(nn[0].distance == 0.0);
  }
}

TEST_CASE("kd-tree agrees with a linear scan") {
  for (bool grid : {false, true}) {
    std::mt19937_64 rng(grid ? 4 : 3);
    const auto entries = random_entries(500, 3, 40, rng, grid);
    ReferenceStore store(entries);
    std::uniform_real_distribution<double> u(-2.6, 2.6);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> q{u(rng), u(rng), u(rng)};
      if (grid) q = entries[trial].key;  // exact ties everywhere
      for (bool disjoint : {false, true}) {
        const auto got = store.query_knn(q, 5, disjoint);
        const auto want = brute_force(entries, q, 5, disjoint);
        CHECK(got == want);
      }
    }
  }
}

TEST_CASE("disjoint results keep one record per trajectory") {
  std::vector<Entry> entries;
  entries.push_back({{0.0, 0.0}, 1, 9, 0});
  entries.push_back({{0.01, 0.0}, 2, 9, 1});
  entries.push_back({{0.02, 0.0}, 3, 9, 2});
  entries.push_back({{1.0, 0.0}, 4, 1, 3});
  entries.push_back({{2.0, 0.0}, 5, 2, 4});
  ReferenceStore store(entries);
  const auto nn = store.query_knn(std::vector<double>{0.0, 0.0}, 3, true);
  REQUIRE(nn.size() == 3);
  CHECK(nn[0].sample_id == 1);
  CHECK(nn[1].sample_id == 4);
  CHECK(nn[2].sample_id == 5);
  const auto all = store.query_knn(std::vector<double>{0.0, 0.0}, 3, false);
  CHECK(all[2].sample_id == 3);
}

TEST_CASE("disjoint distances dominate unconstrained distances") {
  std::mt19937_64 rng(8);
  const auto entries = random_entries(400, 3, 30, rng);
  ReferenceStore store(entries);
  std::uniform_real_distribution<double> u(-2.6, 2.6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> q{u(rng), u(rng), u(rng)};
    const auto free = brute_force(entries, q, 8, false);
    const auto dis = brute_force(entries, q, 8, true);
    const auto got = store.query_knn(q, 8, true);
    CHECK(got == dis);
    for (int i = 0; i < 8; ++i) {
      CHECK(dis[i].distance >= free[i].distance);
      if (i) CHECK(got[i].distance >= got[i - 1].distance);
    }
  }
}

TEST_CASE("training neighbours are uniform over the ten nearest") {
  std::mt19937_64 gen(11);
  const auto entries = random_entries(10, 3, 0, gen);
  ReferenceStore store(entries);
  std::mt19937_64 rng(12);
  std::map<std::int64_t, int> counts;
  const std::vector<double> q{0.3, -0.2, 0.1};
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) counts[store.sample_training_neighbor(q, rng)]++;
  CHECK(counts.size() == 10);
  for (const auto& [id, c] : counts) CHECK(std::abs(c / static_cast<double>(draws) - 0.1) <= 0.02);

  const auto big = random_entries(200, 3, 0, gen);
  ReferenceStore wide(big);
  const auto ten = brute_force(big, q, 10, false);
  std::set<std::int64_t> allowed;
  for (const auto& n : ten) allowed.insert(n.sample_id);
  std::mt19937_64 a(99), b(99);
  for (int i = 0; i < 500; ++i) {
    const auto id = wide.sample_training_neighbor(q, a);
    CHECK(allowed.count(id) == 1);
    CHECK(id == wide.sample_training_neighbor(q, b));
  }
  const auto set = wide.sample_training_neighbors(q, 3, a);
  REQUIRE(set.size() == 3);
  CHECK(set[0].distance <= set[1].distance);
  CHECK(set[1].sample_id != set[0].sample_id);
}
