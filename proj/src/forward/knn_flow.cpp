// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "forward/knn_flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.hpp"
#include "nn/adam.hpp"

namespace armview::forward {
namespace {

nn::Tensor pair_inputs(std::span<const double> x, const world::Dataset& refs,
                       const std::vector<refstore::Neighbor>& chosen, int dof) {
  nn::Tensor in({static_cast<int>(chosen.size()), 2 * dof});
  for (std::size_t j = 0; j < chosen.size(); ++j) {
    auto row = in.sample(static_cast<int>(j));
    const auto& xr = refs.records[chosen[j].index].q;
    for (int d = 0; d < dof; ++d) {
      row[d] = static_cast<float>(x[d]);
      row[dof + d] = static_cast<float>(xr[d]);
    }
  }
  return in;
}

void split_output(std::span<const float> out, int size, FlowField& flow, std::vector<float>& conf) {
  const std::size_t hw = static_cast<std::size_t>(size) * size;
  flow = FlowField(size, size);
  std::copy(out.begin(), out.begin() + 2 * hw, flow.values.begin());
  conf.assign(out.begin() + 2 * hw, out.begin() + 3 * hw);
}

void clamp_unit(world::Image& img) {
  for (float& v : img.pixels) v = std::clamp(v, 0.0f, 1.0f);
}

}  // namespace

BranchOutput branch_forward(const nn::Network& branch, std::span<const double> x_i,
                            std::span<const double> x_r) {
  if (x_i.size() != x_r.size() || 2 * x_i.size() != branch.input_size()) {
    throw shape_error("branch_forward: expected two states of " + std::to_string(branch.input_size() / 2) +
                      " joints, got " + std::to_string(x_i.size()) + " and " + std::to_string(x_r.size()));
  }
  nn::Tensor in({static_cast<int>(branch.input_size())});
  for (std::size_t d = 0; d < x_i.size(); ++d) {
    in[d] = static_cast<float>(x_i[d]);
    in[x_i.size() + d] = static_cast<float>(x_r[d]);
  }
  const nn::Tensor out = branch.infer(in);
  BranchOutput b;
  split_output(out.values(), branch.output_shape()[1], b.flow, b.confidence);
  return b;
}

Blend blend(std::span<const world::Image> warped, std::span<const std::vector<float>> confidence) {
  if (warped.empty() || warped.size() != confidence.size()) throw invalid_argument("blend: need k >= 1 candidates");
  const world::Image& first = warped.front();
  const std::size_t hw = static_cast<std::size_t>(first.height) * first.width;
  const std::size_t k = warped.size();
  Blend b{world::Image(first.height, first.width, first.channels), std::vector<std::vector<double>>(k, std::vector<double>(hw))};
  for (std::size_t p = 0; p < hw; ++p) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) top = std::max(top, static_cast<double>(confidence[j][p]));
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      b.weights[j][p] = std::exp(confidence[j][p] - top);
      z += b.weights[j][p];
    }
    for (std::size_t j = 0; j < k; ++j) b.weights[j][p] /= z;
    for (int c = 0; c < first.channels; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += b.weights[j][p] * warped[j].pixels[c * hw + p];
      b.image.pixels[c * hw + p] = static_cast<float>(acc);
    }
  }
  return b;
}

KnnFlowModel::KnnFlowModel(nn::Network branch, std::shared_ptr<const world::Dataset> references, int k)
    : branch_(std::move(branch)), references_(std::move(references)), k_(k) {
  if (!references_ || references_->empty()) throw invalid_argument("flow model needs a reference set");
  dof_ = references_->arm.dof();
  image_size_ = references_->arm.image_size;
  if (branch_.input_size() != static_cast<std::size_t>(2 * dof_)) {
    throw shape_error("flow branch takes " + std::to_string(branch_.input_size()) + " inputs, arm has " +
                      std::to_string(dof_) + " joints");
  }
  if (branch_.output_shape() != nn::Shape{3, image_size_, image_size_}) {
    throw shape_error("flow branch output " + nn::shape_string(branch_.output_shape()) +
                      " does not match the reference images");
  }
  store_ = std::make_shared<refstore::ReferenceStore>(refstore::ReferenceStore::build(*references_));
  set_k(k);
}

void KnnFlowModel::set_k(int k) {
  if (k < 1) throw invalid_argument("k must be at least 1");
  if (static_cast<std::size_t>(k) > store_->distinct_trajectories()) {
    throw invalid_argument("k=" + std::to_string(k) + " exceeds the available references");
  }
  k_ = k;
}

FlowPrediction KnnFlowModel::predict_with(std::span<const double> x,
                                          const std::vector<refstore::Neighbor>& refs) const {
  if (static_cast<int>(x.size()) != dof_) {
    throw shape_error("predict: expected " + std::to_string(dof_) + " joints, got " + std::to_string(x.size()));
  }
  FlowPrediction p;
  p.references = refs;
  p.branch_input = pair_inputs(x, *references_, refs, dof_);
  const nn::Tensor out = branch_.forward(p.branch_input, nn::Mode::kEval, p.trace);
  for (std::size_t j = 0; j < refs.size(); ++j) {
    FlowField f;
    std::vector<float> conf;
    split_output(out.sample(static_cast<int>(j)), image_size_, f, conf);
    p.warped.push_back(warp(references_->records[refs[j].index].image, f));
    p.flows.push_back(std::move(f));
    p.confidence.push_back(std::move(conf));
  }
  Blend b = blend(p.warped, p.confidence);
  p.image = std::move(b.image);
  clamp_unit(p.image);
  p.weights = std::move(b.weights);
  return p;
}

FlowPrediction KnnFlowModel::predict_detailed(std::span<const double> x) const {
  return predict_with(x, store_->query_knn(x, k_, true));
}

world::Image KnnFlowModel::predict(std::span<const double> x) const { return predict_detailed(x).image; }

std::vector<world::Image> predict_sequence(const KnnFlowModel& model,
                                           const std::vector<world::JointConfig>& states) {
  std::vector<world::Image> frames;
  frames.reserve(states.size());
  for (const auto& q : states) frames.push_back(model.predict(q));
  return frames;
}

world::Image nn_baseline_predict(const refstore::ReferenceStore& store, const world::Dataset& refs,
                                 std::span<const double> x) {
  return refs.records[store.query_knn(x, 1, false).front().index].image;
}

std::vector<refstore::Neighbor> training_references(const KnnFlowModel& model, std::span<const double> x,
                                                    std::mt19937_64& rng, int pool) {
  if (model.k() == 1) return {model.store().draw_training_neighbor(x, rng, pool)};
  return model.store().sample_training_neighbors(x, model.k(), rng, pool);
}

LossResult flow_batch_loss(const KnnFlowModel& model, std::span<const FlowSample> batch, double lambda,
                           bool with_gradients) {
  if (batch.empty()) throw invalid_argument("flow loss needs a non-empty batch");
  const int dof = model.dof();
  const int size = model.image_size();
  const std::size_t hw = static_cast<std::size_t>(size) * size;
  const world::Dataset& refs = model.references();

  // One branch row per (sample, reference) pair.
  int pairs = 0;
  for (const FlowSample& s : batch) pairs += static_cast<int>(s.references.size());
  nn::Tensor in({pairs, 2 * dof});
  {
    int row = 0;
    for (const FlowSample& s : batch) {
      const nn::Tensor part = pair_inputs(s.x, refs, s.references, dof);
      std::copy(part.values().begin(), part.values().end(), in.sample(row).begin());
      row += static_cast<int>(s.references.size());
    }
  }
  nn::Trace trace;
  const nn::Tensor out = model.branch().forward(in, nn::Mode::kTrain, trace);
  nn::Tensor out_grad(out.shape());

  const double scale = 1.0 / static_cast<double>(batch.size());
  double sse_total = 0.0;
  int row = 0;
  for (const FlowSample& s : batch) {
    const std::size_t k = s.references.size();
    std::vector<FlowField> flows(k);
    std::vector<std::vector<float>> conf(k);
    std::vector<world::Image> warped;
    for (std::size_t j = 0; j < k; ++j) {
      split_output(out.sample(row + static_cast<int>(j)), size, flows[j], conf[j]);
      warped.push_back(warp(refs.records[s.references[j].index].image, flows[j]));
    }
    const Blend b = blend(warped, conf);
    const world::Image& target = *s.target;
    if (!target.same_shape(b.image)) throw shape_error("flow loss: target image shape");
    world::Image g(size, size, target.channels);  // dL/dprediction
    double sse = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
      const double r = static_cast<double>(b.image.pixels[i]) - target.pixels[i];
      sse += r * r;
      g.pixels[i] = static_cast<float>(2.0 * r * scale);
    }
    sse_total += sse;
    if (!with_gradients) {
      row += static_cast<int>(k);
      continue;
    }
    // dL/dw_j(p) = sum_c g_c(p) warped_j,c(p); softmax Jacobian gives the
    // confidence gradient.
    std::vector<std::vector<double>> gw(k, std::vector<double>(hw, 0.0));
    for (std::size_t j = 0; j < k; ++j)
      for (int c = 0; c < target.channels; ++c)
        for (std::size_t p = 0; p < hw; ++p) gw[j][p] += static_cast<double>(g.pixels[c * hw + p]) * warped[j].pixels[c * hw + p];
    for (std::size_t j = 0; j < k; ++j) {
      world::Image gj(size, size, target.channels);
      for (std::size_t i = 0; i < gj.size(); ++i) gj.pixels[i] = static_cast<float>(b.weights[j][i % hw] * g.pixels[i]);
      const WarpGradients wg = warp_backward(refs.records[s.references[j].index].image, flows[j], gj);
      auto dst = out_grad.sample(row + static_cast<int>(j));
      std::copy(wg.flow_grad.values.begin(), wg.flow_grad.values.end(), dst.begin());
      if (k > 1) {
        for (std::size_t p = 0; p < hw; ++p) {
          double mean = 0.0;
          for (std::size_t l = 0; l < k; ++l) mean += b.weights[l][p] * gw[l][p];
          dst[2 * hw + p] = static_cast<float>(b.weights[j][p] * (gw[j][p] - mean));
        }
      }
    }
    row += static_cast<int>(k);
  }

  LossResult res;
  res.sse = sse_total * scale;
  if (with_gradients) {
    res.grads = model.branch().zero_gradients();
    model.branch().backward(trace, out_grad, &res.grads);
    res.loss = res.sse + nn::apply_weight_decay(model.branch(), res.grads, lambda);
  } else {
    res.loss = res.sse + nn::weight_penalty(model.branch(), lambda);
  }
  return res;
}

LossResult forward_loss(const KnnFlowModel& model, std::span<const double> x, const world::Image& target,
                        std::mt19937_64& rng, double lambda) {
  FlowSample s{x, &target, training_references(model, x, rng)};
  return flow_batch_loss(model, std::span<const FlowSample>(&s, 1), lambda);
}

nn::TrainLog train_forward(KnnFlowModel& model, const world::Dataset& train, const nn::TrainConfig& cfg) {
  if (cfg.epochs < 0 || cfg.batch_size < 1 || !(cfg.lr_decay > 0.0 && cfg.lr_decay <= 1.0)) {
    throw invalid_argument("train_forward: bad epochs, batch size or learning-rate decay");
  }
  if (train.arm.dof() != model.dof()) throw shape_error("train_forward: training set has a different arm");
  nn::TrainLog log;
  if (cfg.epochs == 0 || train.empty()) return log;
  std::mt19937_64 rng(cfg.seed);
  nn::Adam adam(model.branch(), cfg.adam);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = nn::shuffled_indices(train.size(), rng);
    double total = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<FlowSample> batch;
      for (std::size_t i = start; i < end; ++i) {
        const auto& r = train.records[order[i]];
        batch.push_back({r.q, &r.image, training_references(model, r.q, rng)});
      }
      LossResult res = flow_batch_loss(model, batch, cfg.lambda);
      nn::require_finite_loss(res.loss, "forward model", epoch, batches);
      adam.step(model.branch(), res.grads);
      total += res.loss * static_cast<double>(end - start);
      ++batches;
    }
    const double mean = total / static_cast<double>(train.size());
    log.epoch_loss.push_back(mean);
    adam.set_learning_rate(adam.config().learning_rate * cfg.lr_decay);
    nn::write_epoch_checkpoint(model.branch(), cfg, epoch);
    if (cfg.on_epoch) cfg.on_epoch(epoch, mean);
  }
  return log;
}

}  // namespace armview::forward
