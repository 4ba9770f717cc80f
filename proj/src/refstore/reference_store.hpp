// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "world/dataset.hpp"

namespace armview::refstore {

struct Entry {
  std::vector<double> key;
  std::int64_t sample_id = 0;
  std::optional<std::int64_t> trajectory_id;  // nullopt counts as its own trajectory
  std::size_t index = 0;                      // position in the source dataset
};

struct Neighbor {
  std::int64_t sample_id = 0;
  double distance = 0.0;
  std::size_t index = 0;
  bool operator==(const Neighbor&) const = default;
};

/// Median-split KD-tree over joint configurations with exact Euclidean
/// k-nearest-neighbour queries. Ties are broken by the smaller sample id.
class ReferenceStore {
 public:
  explicit ReferenceStore(std::vector<Entry> entries);
  static ReferenceStore build(const world::Dataset& ds);

  std::size_t size() const { return entries_.size(); }
  int dim() const { return dim_; }
  int depth() const { return depth_; }
  const Entry& entry(std::size_t i) const { return entries_[i]; }
  std::size_t distinct_trajectories() const { return distinct_trajectories_; }

  /// Ascending by (distance, sample id). With `trajectory_disjoint` each
  /// trajectory contributes at most its closest record.
  std::vector<Neighbor> query_knn(std::span<const double> q, int k, bool trajectory_disjoint) const;

  /// Uniform draw among the `pool` nearest records.
  std::int64_t sample_training_neighbor(std::span<const double> q, std::mt19937_64& rng,
                                        int pool = 10) const {
    return draw_training_neighbor(q, rng, pool).sample_id;
  }
  Neighbor draw_training_neighbor(std::span<const double> q, std::mt19937_64& rng, int pool = 10) const;
  /// `k` distinct draws among the `pool` nearest trajectory-disjoint records,
  /// returned nearest first.
  std::vector<Neighbor> sample_training_neighbors(std::span<const double> q, int k,
                                                  std::mt19937_64& rng, int pool = 10) const;

 private:
  struct Node {
    int entry = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };
  struct Search;

  int build_node(std::vector<int>& ids, int lo, int hi, int depth);
  void search(int node, Search& s) const;

  std::vector<Entry> entries_;
  std::vector<Node> nodes_;
  int root_ = -1;
  int dim_ = 0;
  int depth_ = 0;
  std::size_t distinct_trajectories_ = 0;
};

}  // namespace armview::refstore
