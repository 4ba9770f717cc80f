// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "nn/adam.hpp"
#include "nn/network.hpp"

namespace armview::nn {

struct TrainConfig {
  int epochs = 10;
  int batch_size = 16;
  std::uint64_t seed = 1;
  double lambda = 1e-5;  // weight decay on every "*.weight" tensor
  AdamConfig adam;
  double lr_decay = 1.0;  // learning rate multiplier applied after each epoch
  /// When set, `<dir>/<name>_epoch<NNN>.ftnn` and `<dir>/<name>.ftnn` are
  /// written after every epoch.
  std::filesystem::path checkpoint_dir;
  std::string name = "model";
  std::function<void(int epoch, double mean_loss)> on_epoch;
};

struct TrainLog {
  std::vector<double> epoch_loss;
};

/// Adds lambda * d||W||^2/dW to `grads` and returns lambda * ||W||^2.
double apply_weight_decay(const Network& net, Gradients& grads, double lambda);
double weight_penalty(const Network& net, double lambda);

void write_epoch_checkpoint(const Network& net, const TrainConfig& cfg, int epoch);

/// Throws a numeric error naming the model, epoch and batch.
void require_finite_loss(double loss, const std::string& model, int epoch, int batch);

std::vector<std::size_t> shuffled_indices(std::size_t n, std::mt19937_64& rng);

}  // namespace armview::nn
