// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <random>
#include <span>
#include <vector>

#include "forward/warp.hpp"
#include "nn/network.hpp"
#include "nn/training.hpp"
#include "refstore/reference_store.hpp"
#include "world/dataset.hpp"

namespace armview::forward {

struct BranchOutput {
  FlowField flow;
  std::vector<float> confidence;  // H*W logits
};

/// Eval-mode pass of a flow branch on (x_i, x_r).
BranchOutput branch_forward(const nn::Network& branch, std::span<const double> x_i,
                            std::span<const double> x_r);

/// Per-pixel softmax over the candidates' confidence logits.
struct Blend {
  world::Image image;
  std::vector<std::vector<double>> weights;  // [k][H*W]
};
Blend blend(std::span<const world::Image> warped, std::span<const std::vector<float>> confidence);

/// Everything computed on the way to one prediction; the tracker linearises
/// around it.
struct FlowPrediction {
  world::Image image;
  std::vector<refstore::Neighbor> references;
  std::vector<FlowField> flows;
  std::vector<std::vector<float>> confidence;
  std::vector<world::Image> warped;
  std::vector<std::vector<double>> weights;
  nn::Tensor branch_input;  // [k, 2n]
  nn::Trace trace;
};

class KnnFlowModel {
 public:
  KnnFlowModel(nn::Network branch, std::shared_ptr<const world::Dataset> references, int k);

  int k() const { return k_; }
  void set_k(int k);
  int dof() const { return dof_; }
  int image_size() const { return image_size_; }
  const nn::Network& branch() const { return branch_; }
  nn::Network& branch() { return branch_; }
  const refstore::ReferenceStore& store() const { return *store_; }
  const world::Dataset& references() const { return *references_; }
  std::shared_ptr<const world::Dataset> reference_handle() const { return references_; }

  /// Blend of the k trajectory-disjoint nearest references, each warped by
  /// its branch flow.
  world::Image predict(std::span<const double> x) const;
  FlowPrediction predict_detailed(std::span<const double> x) const;
  /// Same as `predict_detailed` with the references fixed by the caller.
  FlowPrediction predict_with(std::span<const double> x,
                              const std::vector<refstore::Neighbor>& refs) const;

 private:
  nn::Network branch_;
  std::shared_ptr<const world::Dataset> references_;
  std::shared_ptr<const refstore::ReferenceStore> store_;
  int k_;
  int dof_;
  int image_size_;
};

std::vector<world::Image> predict_sequence(const KnnFlowModel& model,
                                           const std::vector<world::JointConfig>& states);

/// Unmodified image of the nearest stored state.
world::Image nn_baseline_predict(const refstore::ReferenceStore& store, const world::Dataset& refs,
                                 std::span<const double> x);

struct FlowSample {
  std::span<const double> x;
  const world::Image* target = nullptr;
  std::vector<refstore::Neighbor> references;
};

struct LossResult {
  double loss = 0.0;  // mean pixel SSE + lambda * ||W||^2
  double sse = 0.0;   // mean pixel SSE
  nn::Gradients grads;
};

/// Batch objective with fixed references; gradients reach the branch through
/// the warp and the confidence blend.
LossResult flow_batch_loss(const KnnFlowModel& model, std::span<const FlowSample> batch, double lambda,
                           bool with_gradients = true);

/// Training references for x: one of the `pool` nearest when k = 1, else k
/// distinct draws among the `pool` trajectory-disjoint nearest.
std::vector<refstore::Neighbor> training_references(const KnnFlowModel& model, std::span<const double> x,
                                                    std::mt19937_64& rng, int pool = 10);

LossResult forward_loss(const KnnFlowModel& model, std::span<const double> x, const world::Image& target,
                        std::mt19937_64& rng, double lambda);

/// ADAM over shuffled minibatches of `train`.
nn::TrainLog train_forward(KnnFlowModel& model, const world::Dataset& train, const nn::TrainConfig& cfg);

}  // namespace armview::forward
