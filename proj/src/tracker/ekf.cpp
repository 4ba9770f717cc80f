// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "tracker/ekf.hpp"

#include <cmath>
#include <string>

#include "common/error.hpp"
#include "forward/warp.hpp"

namespace armview::tracker {

Eigen::VectorXd flatten(const world::Image& image) {
  return Eigen::Map<const Eigen::VectorXf>(image.pixels.data(), static_cast<Eigen::Index>(image.size()))
      .cast<double>();
}

GaussianBelief make_prior(std::span<const double> x0, double sigma) {
  const int n = static_cast<int>(x0.size());
  GaussianBelief b;
  b.mean.resize(2 * n);
  for (int i = 0; i < n; ++i) b.mean[i] = b.mean[n + i] = x0[i];
  // Both blocks share one draw, so the prior carries no velocity uncertainty
  // and a correction moves x_t and x_{t-1} together.
  const Eigen::MatrixXd block = Eigen::MatrixXd::Identity(n, n) * (sigma * sigma);
  b.cov.resize(2 * n, 2 * n);
  b.cov << block, block, block, block;
  return b;
}

Eigen::MatrixXd TransitionModel::matrix(int n) const {
  if (!(dt > 0.0)) throw invalid_argument("transition: dt must be positive");
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  f.topLeftCorner(n, n) = (1.0 + dt) * id;
  f.topRightCorner(n, n) = -dt * id;
  f.bottomLeftCorner(n, n) = id;
  return f;
}

GaussianBelief predict(const GaussianBelief& belief, const TransitionModel& model) {
  const int n = belief.dof();
  if (belief.cov.rows() != 2 * n || belief.cov.cols() != 2 * n) throw shape_error("predict: covariance shape");
  const Eigen::MatrixXd f = model.matrix(n);
  GaussianBelief out;
  out.mean = f * belief.mean;
  out.cov = f * belief.cov * f.transpose();
  out.cov.diagonal().array() += model.gamma;
  return out;
}

void repair_covariance(Eigen::MatrixXd& cov) {
  cov = 0.5 * (cov + cov.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw numeric_error("covariance eigen-decomposition failed");
  if (eig.eigenvalues().minCoeff() >= 0.0) return;
  const Eigen::VectorXd lifted = eig.eigenvalues().cwiseMax(0.0);
  cov = eig.eigenvectors() * lifted.asDiagonal() * eig.eigenvectors().transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
}

namespace {

void check_shapes(const GaussianBelief& prior, const Eigen::VectorXd& y, const ObservationLinearization& lin) {
  const Eigen::Index m = lin.predicted.size();
  if (y.size() != m || lin.jacobian.rows() != m || lin.jacobian.cols() != prior.mean.size()) {
    throw shape_error("correct: observation has " + std::to_string(y.size()) + " entries, prediction " +
                      std::to_string(m) + ", jacobian " + std::to_string(lin.jacobian.rows()) + "x" +
                      std::to_string(lin.jacobian.cols()));
  }
  if (!lin.jacobian.allFinite() || !lin.predicted.allFinite()) throw numeric_error("correct: non-finite linearisation");
}

// K = Sigma A^T S^-1 with S = A Sigma A^T + noise, via Cholesky.
Eigen::MatrixXd gain(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& a, const Eigen::MatrixXd& s) {
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingular, "correct: innovation covariance is singular or indefinite");
  }
  const Eigen::MatrixXd a_cov = a * cov;
  return llt.solve(a_cov).transpose();
}

}  // namespace

GaussianBelief correct(const GaussianBelief& prior, const Eigen::VectorXd& observation,
                       const ObservationLinearization& lin, const SensorNoiseModel& noise) {
  check_shapes(prior, observation, lin);
  if (noise.basis.rows() != lin.predicted.size() || noise.basis.cols() != noise.rank()) {
    throw shape_error("correct: noise basis does not match the observation size");
  }
  const Eigen::MatrixXd a = noise.basis.transpose() * lin.jacobian;
  Eigen::MatrixXd s = a * prior.cov * a.transpose();
  s.diagonal() += noise.variance;
  const Eigen::MatrixXd k = gain(prior.cov, a, s);
  const Eigen::VectorXd projected = noise.basis.transpose() * (observation - lin.predicted);
  GaussianBelief out;
  out.mean = prior.mean + k * projected;
  out.cov = prior.cov - k * a * prior.cov;
  repair_covariance(out.cov);
  return out;
}

SensorNoiseModel noise_from_residuals(const Eigen::MatrixXd& residuals, int rank) {
  const Eigen::Index m = residuals.rows(), n = residuals.cols();
  if (rank < 1 || rank > std::min(m, n)) {
    throw invalid_argument("noise rank " + std::to_string(rank) + " must lie in [1, min(" + std::to_string(m) +
                           ", " + std::to_string(n) + ")]");
  }
  if (n < 2) throw invalid_argument("noise estimation needs at least two residuals");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(residuals, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (!(sv[0] > 0.0) || !(sv[rank - 1] > sv[0] * 1e-12)) {
    throw Error(ErrorCode::kNumeric, "noise estimate is degenerate: residual rank below " + std::to_string(rank));
  }
  SensorNoiseModel noise;
  noise.basis = svd.matrixU().leftCols(rank);
  noise.variance = sv.head(rank).array().square() / static_cast<double>(n - 1);
  return noise;
}

SensorNoiseModel estimate_sensor_noise(const ObservationModel& model, const world::Dataset& validation,
                                       int rank) {
  const int m = model.observation_size();
  Eigen::MatrixXd residuals(m, static_cast<Eigen::Index>(validation.size()));
  for (std::size_t i = 0; i < validation.size(); ++i) {
    const auto& r = validation.records[i];
    const Eigen::VectorXd o = flatten(r.image);
    if (o.size() != m) throw shape_error("noise estimation: validation image size differs from the model");
    residuals.col(static_cast<Eigen::Index>(i)) = o - model.predict(r.q);
  }
  return noise_from_residuals(residuals, rank);
}

TrackResult track_ekf(const ObservationModel& model, std::span<const Eigen::VectorXd> frames,
                      const GaussianBelief& prior, const SensorNoiseModel& noise,
                      const TransitionModel& transition) {
  if (prior.dof() != model.dof() || prior.cov.rows() != prior.mean.size()) {
    throw shape_error("track_ekf: prior does not cover the augmented state");
  }
  TrackResult out;
  GaussianBelief belief = prior;
  const int n = model.dof();
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (t > 0) belief = predict(belief, transition);
    const Eigen::VectorXd x = belief.current();
    const ObservationLinearization lin = model.linearize(std::span<const double>(x.data(), n));
    belief = correct(belief, frames[t], lin, noise);
    out.estimates.push_back(belief.current());
    out.variances.push_back(belief.cov.diagonal().head(n));
  }
  return out;
}

Eigen::VectorXd rmse(std::span<const Eigen::VectorXd> estimates, std::span<const world::JointConfig> truth) {
  if (estimates.size() != truth.size() || estimates.empty()) throw invalid_argument("rmse: sequences differ in length");
  const Eigen::Index n = estimates.front().size();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  for (std::size_t t = 0; t < estimates.size(); ++t) {
    for (Eigen::Index j = 0; j < n; ++j) acc[j] += std::pow(estimates[t][j] - truth[t][j], 2);
  }
  return (acc / static_cast<double>(estimates.size())).cwiseSqrt();
}

int KnnFlowObservation::observation_size() const {
  return 3 * model_.image_size() * model_.image_size();
}

Eigen::VectorXd KnnFlowObservation::predict(std::span<const double> x) const {
  return flatten(model_.predict(x));
}

ObservationLinearization KnnFlowObservation::linearize(std::span<const double> x) const {
  return linearize_with(x, model_.store().query_knn(x, model_.k(), true));
}

ObservationLinearization KnnFlowObservation::linearize_with(std::span<const double> x,
                                                            const std::vector<refstore::Neighbor>& refs) const {
  const forward::FlowPrediction p = model_.predict_with(x, refs);
  const int n = model_.dof();
  const int size = model_.image_size();
  const std::size_t hw = static_cast<std::size_t>(size) * size;
  const int k = static_cast<int>(refs.size());
  const int m = 3 * static_cast<int>(hw);
  ObservationLinearization lin;
  lin.predicted = flatten(p.image);
  lin.jacobian = Eigen::MatrixXd::Zero(m, 2 * n);
  for (int d = 0; d < n; ++d) {
    nn::Tensor tangent({k, 2 * n});
    for (int j = 0; j < k; ++j) tangent.sample(j)[d] = 1.0f;
    const nn::Tensor dt = model_.branch().jvp(p.trace, tangent);
    std::vector<world::Image> dwarp;
    std::vector<std::span<const float>> dconf;
    for (int j = 0; j < k; ++j) {
      const auto row = dt.sample(j);
      forward::FlowField dflow(size, size);
      std::copy(row.begin(), row.begin() + 2 * hw, dflow.values.begin());
      dwarp.push_back(forward::warp_jvp(model_.references().records[refs[j].index].image, p.flows[j], dflow));
      dconf.push_back(row.subspan(2 * hw, hw));
    }
    for (std::size_t px = 0; px < hw; ++px) {
      double mean_dc = 0.0;
      for (int j = 0; j < k; ++j) mean_dc += p.weights[j][px] * dconf[j][px];
      for (int c = 0; c < 3; ++c) {
        const std::size_t i = c * hw + px;
        double v = 0.0;
        for (int j = 0; j < k; ++j) {
          v += p.weights[j][px] * (dwarp[j].pixels[i] + (dconf[j][px] - mean_dc) * p.warped[j].pixels[i]);
        }
        lin.jacobian(static_cast<Eigen::Index>(i), d) = v;
      }
    }
  }
  return lin;
}

NetworkObservation::NetworkObservation(const nn::Network& net) : net_(net) {}

Eigen::VectorXd NetworkObservation::predict(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dof()) throw shape_error("observation: wrong state size");
  if (net_.supports_double()) return net_.evaluate_double(Eigen::Map<const Eigen::VectorXd>(x.data(), dof()));
  nn::Tensor in({dof()});
  for (int i = 0; i < dof(); ++i) in[i] = static_cast<float>(x[i]);
  const nn::Tensor out = net_.infer(in);
  return Eigen::Map<const Eigen::VectorXf>(out.data(), static_cast<Eigen::Index>(out.size())).cast<double>();
}

ObservationLinearization NetworkObservation::linearize(std::span<const double> x) const {
  const int n = dof();
  nn::Tensor in({n});
  for (int i = 0; i < n; ++i) in[i] = static_cast<float>(x[i]);
  ObservationLinearization lin;
  lin.predicted = predict(x);
  lin.jacobian = Eigen::MatrixXd::Zero(observation_size(), 2 * n);
  lin.jacobian.leftCols(n) = net_.jacobian(in);
  return lin;
}

}  // namespace armview::tracker
