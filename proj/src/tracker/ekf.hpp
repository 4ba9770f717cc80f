// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "forward/deconv.hpp"
#include "forward/knn_flow.hpp"
#include "nn/network.hpp"
#include "world/dataset.hpp"

namespace armview::tracker {

/// Belief over the augmented state [x_t; x_{t-1}].
struct GaussianBelief {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  int dof() const { return static_cast<int>(mean.size() / 2); }
  Eigen::VectorXd current() const { return mean.head(dof()); }
};

/// Zero-velocity prior centred on `x0`: sigma^2 I on each block, with the
/// history block fully correlated with the current one.
GaussianBelief make_prior(std::span<const double> x0, double sigma);

struct TransitionModel {
  double dt = 1.0;
  double gamma = 1e-6;  // process noise Q = gamma * I
  Eigen::MatrixXd matrix(int dof) const;
};

/// Low-rank sensor noise R ~ U diag(s) U^T.
struct SensorNoiseModel {
  Eigen::MatrixXd basis;     // m x r, orthonormal columns
  Eigen::VectorXd variance;  // r, positive, non-increasing
  int rank() const { return static_cast<int>(variance.size()); }
};

struct ObservationLinearization {
  Eigen::VectorXd predicted;  // g(mu), m
  Eigen::MatrixXd jacobian;   // m x 2n; history columns are zero
};

/// Learned (or hand-built) map from joint state to a flattened image.
class ObservationModel {
 public:
  virtual ~ObservationModel() = default;
  virtual int dof() const = 0;
  virtual int observation_size() const = 0;
  virtual Eigen::VectorXd predict(std::span<const double> x) const = 0;
  /// Jacobian with respect to the augmented state; history columns are zero.
  virtual ObservationLinearization linearize(std::span<const double> x) const = 0;
};

/// k-NN flow model with the references frozen at the linearisation point.
class KnnFlowObservation final : public ObservationModel {
 public:
  explicit KnnFlowObservation(const forward::KnnFlowModel& model) : model_(model) {}
  int dof() const override { return model_.dof(); }
  int observation_size() const override;
  Eigen::VectorXd predict(std::span<const double> x) const override;
  ObservationLinearization linearize(std::span<const double> x) const override;
  /// Same as `linearize` with the references fixed by the caller.
  ObservationLinearization linearize_with(std::span<const double> x,
                                          const std::vector<refstore::Neighbor>& refs) const;

 private:
  const forward::KnnFlowModel& model_;
};

/// Any network from n joints to m outputs (DECONV, hand-built linear maps).
/// Convolution-free networks are evaluated in double precision.
class NetworkObservation final : public ObservationModel {
 public:
  explicit NetworkObservation(const nn::Network& net);
  int dof() const override { return static_cast<int>(net_.input_size()); }
  int observation_size() const override { return static_cast<int>(net_.output_size()); }
  Eigen::VectorXd predict(std::span<const double> x) const override;
  ObservationLinearization linearize(std::span<const double> x) const override;

 private:
  const nn::Network& net_;
};

Eigen::VectorXd flatten(const world::Image& image);

GaussianBelief predict(const GaussianBelief& belief, const TransitionModel& model);

/// Kalman correction computed in the r-dimensional noise subspace. Throws a
/// singular-matrix error when the projected innovation covariance cannot be
/// factorised.
GaussianBelief correct(const GaussianBelief& prior, const Eigen::VectorXd& observation,
                       const ObservationLinearization& lin, const SensorNoiseModel& noise);

/// Symmetrises and lifts negative eigenvalues to zero.
void repair_covariance(Eigen::MatrixXd& cov);

/// Top-r left singular vectors of the residual matrix; variances are
/// sigma_j^2 / (N - 1).
SensorNoiseModel noise_from_residuals(const Eigen::MatrixXd& residuals, int rank);
SensorNoiseModel estimate_sensor_noise(const ObservationModel& model, const world::Dataset& validation,
                                       int rank);

struct TrackResult {
  std::vector<Eigen::VectorXd> estimates;  // x_t after each correction
  std::vector<Eigen::VectorXd> variances;  // diagonal of the x_t block
};

/// Predict, linearise and correct once per frame (the first frame is corrected
/// against the prior directly).
TrackResult track_ekf(const ObservationModel& model, std::span<const Eigen::VectorXd> frames,
                      const GaussianBelief& prior, const SensorNoiseModel& noise,
                      const TransitionModel& transition);

/// Per-joint root-mean-square error against ground truth.
Eigen::VectorXd rmse(std::span<const Eigen::VectorXd> estimates, std::span<const world::JointConfig> truth);

}  // namespace armview::tracker
