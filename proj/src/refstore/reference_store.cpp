// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "refstore/reference_store.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "common/error.hpp"

namespace armview::refstore {
namespace {

// Trajectory identity; records without an id form singleton groups keyed by
// their own sample id.
using TrajKey = std::pair<bool, std::int64_t>;

TrajKey traj_key(const Entry& e) {
  return e.trajectory_id ? TrajKey{true, *e.trajectory_id} : TrajKey{false, e.sample_id};
}

struct Cand {
  double d2;
  std::int64_t id;
  int entry;
  bool operator<(const Cand& o) const { return d2 != o.d2 ? d2 < o.d2 : id < o.id; }
};

}  // namespace

struct ReferenceStore::Search {
  std::span<const double> q;
  std::size_t k;
  bool disjoint;
  std::set<Cand> best;                   // at most k when !disjoint
  std::map<TrajKey, Cand> per_traj;      // disjoint mode: best per trajectory

  double worst() const {
    if (best.size() < k) return std::numeric_limits<double>::infinity();
    return std::prev(best.end())->d2;
  }
};

ReferenceStore::ReferenceStore(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw invalid_argument("reference store needs at least one record");
  dim_ = static_cast<int>(entries_.front().key.size());
  if (dim_ < 1) throw invalid_argument("reference keys must be non-empty");
  std::set<TrajKey> trajs;
  std::set<std::int64_t> ids;
  for (const Entry& e : entries_) {
    if (static_cast<int>(e.key.size()) != dim_) throw shape_error("reference keys differ in dimension");
    if (!ids.insert(e.sample_id).second) {
      throw invalid_argument("duplicate sample id " + std::to_string(e.sample_id));
    }
    trajs.insert(traj_key(e));
  }
  distinct_trajectories_ = trajs.size();
  std::vector<int> ids_v(entries_.size());
  for (std::size_t i = 0; i < ids_v.size(); ++i) ids_v[i] = static_cast<int>(i);
  nodes_.reserve(entries_.size());
  root_ = build_node(ids_v, 0, static_cast<int>(ids_v.size()), 0);
}

ReferenceStore ReferenceStore::build(const world::Dataset& ds) {
  std::vector<Entry> entries;
  entries.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& r = ds.records[i];
    entries.push_back({r.q, r.sample_id, r.trajectory_id, i});
  }
  return ReferenceStore(std::move(entries));
}

int ReferenceStore::build_node(std::vector<int>& ids, int lo, int hi, int depth) {
  if (lo >= hi) return -1;
  depth_ = std::max(depth_, depth);
  const int axis = depth % dim_;
  const int mid = lo + (hi - lo) / 2;
  std::nth_element(ids.begin() + lo, ids.begin() + mid, ids.begin() + hi, [&](int a, int b) {
    const double ka = entries_[a].key[axis], kb = entries_[b].key[axis];
    return ka != kb ? ka < kb : entries_[a].sample_id < entries_[b].sample_id;
  });
  const int node = static_cast<int>(nodes_.size());
  nodes_.push_back({ids[mid], axis, -1, -1});
  const int left = build_node(ids, lo, mid, depth + 1);
  const int right = build_node(ids, mid + 1, hi, depth + 1);
  nodes_[node].left = left;
  nodes_[node].right = right;
  return node;
}

void ReferenceStore::search(int node, Search& s) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const Entry& e = entries_[n.entry];
  double d2 = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double diff = s.q[i] - e.key[i];
    d2 += diff * diff;
  }
  const Cand c{d2, e.sample_id, n.entry};
  if (!s.disjoint) {
    if (s.best.size() < s.k || c < *std::prev(s.best.end())) {
      s.best.insert(c);
      if (s.best.size() > s.k) s.best.erase(std::prev(s.best.end()));
    }
  } else {
    const TrajKey key = traj_key(e);
    auto it = s.per_traj.find(key);
    if (it == s.per_traj.end()) {
      s.per_traj.emplace(key, c);
      s.best.insert(c);
    } else if (c < it->second) {
      s.best.erase(it->second);
      it->second = c;
      s.best.insert(c);
    }
    // `best` keeps every trajectory's representative; the pruning bound is the
    // k-th smallest of them.
  }

  const double delta = s.q[n.axis] - e.key[n.axis];
  const int near = delta < 0 ? n.left : n.right;
  const int far = delta < 0 ? n.right : n.left;
  search(near, s);
  double bound;
  if (!s.disjoint) {
    bound = s.worst();
  } else if (s.best.size() < s.k) {
    bound = std::numeric_limits<double>::infinity();
  } else {
    bound = std::next(s.best.begin(), static_cast<long>(s.k) - 1)->d2;
  }
  // Equal distance on the far side can still win the sample-id tie-break.
  if (delta * delta <= bound) search(far, s);
}

std::vector<Neighbor> ReferenceStore::query_knn(std::span<const double> q, int k,
                                                bool trajectory_disjoint) const {
  if (static_cast<int>(q.size()) != dim_) {
    throw shape_error("query has " + std::to_string(q.size()) + " joints, store has " +
                      std::to_string(dim_));
  }
  if (k < 1) throw invalid_argument("k must be at least 1");
  const std::size_t available = trajectory_disjoint ? distinct_trajectories_ : entries_.size();
  if (static_cast<std::size_t>(k) > available) {
    throw invalid_argument("k=" + std::to_string(k) + " exceeds the " + std::to_string(available) +
                           (trajectory_disjoint ? " distinct trajectories" : " stored records"));
  }
  Search s{q, static_cast<std::size_t>(k), trajectory_disjoint, {}, {}};
  search(root_, s);
  std::vector<Neighbor> out;
  for (const Cand& c : s.best) {
    if (out.size() == static_cast<std::size_t>(k)) break;
    out.push_back({c.id, std::sqrt(c.d2), entries_[c.entry].index});
  }
  return out;
}

Neighbor ReferenceStore::draw_training_neighbor(std::span<const double> q, std::mt19937_64& rng,
                                                int pool) const {
  const auto nn = query_knn(q, pool, false);
  std::uniform_int_distribution<int> pick(0, pool - 1);
  return nn[pick(rng)];
}

std::vector<Neighbor> ReferenceStore::sample_training_neighbors(std::span<const double> q, int k,
                                                                std::mt19937_64& rng, int pool) const {
  if (k > pool) throw invalid_argument("cannot draw more neighbours than the pool holds");
  auto nn = query_knn(q, pool, true);
  // Partial Fisher-Yates over the pool, then restore distance order.
  std::vector<int> order(pool);
  for (int i = 0; i < pool; ++i) order[i] = i;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, pool - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::sort(order.begin(), order.begin() + k);
  std::vector<Neighbor> out;
  for (int i = 0; i < k; ++i) out.push_back(nn[order[i]]);
  return out;
}

}  // namespace armview::refstore
