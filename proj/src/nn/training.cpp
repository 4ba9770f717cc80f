// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/training.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "common/error.hpp"
#include "nn/checkpoint.hpp"

namespace armview::nn {
namespace {
bool is_weight(const std::string& name) {
  return name.size() >= 7 && name.compare(name.size() - 7, 7, ".weight") == 0;
}
}  // namespace

double weight_penalty(const Network& net, double lambda) {
  if (lambda == 0.0) return 0.0;
  const auto params = net.parameters();
  double total = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (is_weight(net.parameter_names()[p])) total += params[p]->squared_norm();
  }
  return lambda * total;
}

double apply_weight_decay(const Network& net, Gradients& grads, double lambda) {
  if (lambda == 0.0) return 0.0;
  const auto params = net.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!is_weight(net.parameter_names()[p])) continue;
    for (std::size_t i = 0; i < params[p]->size(); ++i) {
      grads[p][i] += static_cast<float>(2.0 * lambda * (*params[p])[i]);
    }
  }
  return weight_penalty(net, lambda);
}

void write_epoch_checkpoint(const Network& net, const TrainConfig& cfg, int epoch) {
  if (cfg.checkpoint_dir.empty()) return;
  std::filesystem::create_directories(cfg.checkpoint_dir);
  char suffix[32];
  std::snprintf(suffix, sizeof suffix, "_epoch%03d.ftnn", epoch);
  save_network(net, cfg.checkpoint_dir / (cfg.name + suffix));
  save_network(net, cfg.checkpoint_dir / (cfg.name + ".ftnn"));
}

void require_finite_loss(double loss, const std::string& model, int epoch, int batch) {
  if (!std::isfinite(loss)) {
    throw numeric_error(model + ": non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(batch) + "; training aborted");
  }
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Explicit Fisher-Yates so the order only depends on the engine stream.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace armview::nn
