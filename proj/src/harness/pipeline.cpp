// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "harness/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>

#include "common/error.hpp"
#include "forward/architecture.hpp"
#include "forward/deconv.hpp"
#include "forward/knn_flow.hpp"
#include "harness/metrics.hpp"
#include "inverse/inverse_model.hpp"
#include "nn/checkpoint.hpp"
#include "occlusion/occlusion.hpp"
#include "tracker/ekf.hpp"
#include "world/dataset.hpp"

namespace armview::harness {
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::shared_ptr<const world::Dataset> load(const RunPaths& paths, const std::string& split) {
  return std::make_shared<const world::Dataset>(world::load_dataset(paths.data(split)));
}

nn::TrainConfig train_config(const RunConfig& cfg, const RunPaths& paths, int epochs, double decay, SeedSlot slot,
                             const std::string& name) {
  nn::TrainConfig t;
  t.epochs = epochs;
  t.batch_size = cfg.batch_size;
  t.seed = derived_seed(cfg, slot);
  t.lambda = cfg.lambda;
  t.adam.learning_rate = cfg.learning_rate;
  t.lr_decay = decay;
  t.checkpoint_dir = paths.root / "checkpoints";
  t.name = name;
  return t;
}

std::string flow_name(int k) { return "flow_k" + std::to_string(k); }

nn::Network load_flow_branch(const RunConfig& cfg, const RunPaths& paths, const std::string& name) {
  nn::Network branch = forward::build_flow_branch(cfg.dof, cfg.image_size, derived_seed(cfg, SeedSlot::kFlowInit));
  nn::load_network(branch, paths.checkpoint(name));
  return branch;
}

forward::KnnFlowModel load_flow_model(const RunConfig& cfg, const RunPaths& paths,
                                      std::shared_ptr<const world::Dataset> refs) {
  return forward::KnnFlowModel(load_flow_branch(cfg, paths, flow_name(cfg.effective_branch_k())), std::move(refs),
                               cfg.k);
}

std::vector<world::JointConfig> states_of(const world::Dataset& ds) {
  std::vector<world::JointConfig> out;
  out.reserve(ds.size());
  for (const auto& r : ds.records) out.push_back(r.q);
  return out;
}

std::vector<world::Image> images_of(const world::Dataset& ds) {
  std::vector<world::Image> out;
  out.reserve(ds.size());
  for (const auto& r : ds.records) out.push_back(r.image);
  return out;
}

std::vector<world::Image> predict_split(const RunConfig& cfg, const RunPaths& paths, const world::Dataset& split) {
  const auto states = states_of(split);
  if (cfg.model == "knnflow") {
    return forward::predict_sequence(load_flow_model(cfg, paths, load(paths, "references")), states);
  }
  std::vector<world::Image> out;
  out.reserve(states.size());
  if (cfg.model == "deconv") {
    forward::DeconvModel model(forward::build_deconv_net(cfg.dof, cfg.image_size, derived_seed(cfg, SeedSlot::kDeconvInit)));
    nn::load_network(model.net(), paths.checkpoint("deconv"));
    for (const auto& x : states) out.push_back(model.predict(x));
  } else {
    const auto refs = load(paths, "references");
    const auto store = refstore::ReferenceStore::build(*refs);
    for (const auto& x : states) out.push_back(forward::nn_baseline_predict(store, *refs, x));
  }
  return out;
}

struct Track {
  std::vector<world::JointConfig> truth;
  std::vector<Eigen::VectorXd> estimates;
  std::vector<Eigen::VectorXd> variances;  // empty for per-frame trackers
};

void write_tracks(const fs::path& path, const std::vector<Track>& tracks) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << "trajectory,frame,joint,truth,estimate,variance\n";
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    const Track& tr = tracks[t];
    for (std::size_t f = 0; f < tr.truth.size(); ++f) {
      for (std::size_t j = 0; j < tr.truth[f].size(); ++j) {
        out << t << ',' << f << ',' << j << ',' << world::format_double(tr.truth[f][j]) << ','
            << world::format_double(tr.estimates[f][j]) << ',';
        if (!tr.variances.empty()) out << world::format_double(tr.variances[f][j]);
        out << '\n';
      }
    }
  }
}

Eigen::VectorXd pooled_rmse(const std::vector<Track>& tracks) {
  std::vector<Eigen::VectorXd> est;
  std::vector<world::JointConfig> truth;
  for (const auto& t : tracks) {
    est.insert(est.end(), t.estimates.begin(), t.estimates.end());
    truth.insert(truth.end(), t.truth.begin(), t.truth.end());
  }
  return tracker::rmse(est, truth);
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

bool touches(const world::Mask& mask, const world::Occluder& occ, int size) {
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      if (mask.at(y, x) && occ.contains(world::pixel_center(y, x, size))) return true;
  return false;
}

}  // namespace

std::uint64_t derived_seed(const RunConfig& cfg, SeedSlot slot) {
  return cfg.seed + static_cast<std::uint64_t>(slot);
}

std::string model_label(const RunConfig& cfg) {
  if (cfg.model == "knnflow") {
    std::string label = "knnflow_k" + std::to_string(cfg.k);
    if (cfg.effective_branch_k() != cfg.k) label += "_b" + std::to_string(cfg.effective_branch_k());
    return label;
  }
  return cfg.model;
}

std::string ekf_track_name(const RunConfig& cfg) {
  return "ekf_" + model_label(cfg) + "_off" + world::format_double(cfg.offset_deg) + ".csv";
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"gen-data", "train-forward", "train-deconv", "train-inverse",
                                                 "predict",  "track-ekf",     "track-inverse", "occlusion",
                                                 "eval",     "report"};
  return names;
}

void gen_data(const RunConfig& cfg, const RunPaths& paths) {
  const world::ArmModel arm = cfg.arm();
  const world::Occluder occ = cfg.occluder();
  auto seed = [&](SeedSlot s) { return derived_seed(cfg, s); };
  auto save = [&](const world::Dataset& ds, const std::string& split) {
    fs::remove_all(paths.data(split));
    world::save_dataset(ds, paths.data(split));
  };
  save(world::generate_trajectory_dataset(arm, cfg.train_trajectories, cfg.train_steps, seed(SeedSlot::kTrain)),
       "train");
  save(world::generate_uniform_dataset(arm, cfg.reference_samples, seed(SeedSlot::kReferences)), "references");
  save(world::generate_trajectory_dataset(arm, cfg.test_trajectories, cfg.test_steps, seed(SeedSlot::kTest)), "test");
  save(world::generate_trajectory_dataset(arm, cfg.validation_trajectories, cfg.validation_steps,
                                          seed(SeedSlot::kValidation)),
       "validation");
  save(world::generate_trajectory_dataset(arm, cfg.track_trajectories, cfg.track_steps, seed(SeedSlot::kTrack)),
       "track");
  save(world::generate_trajectory_dataset(arm, cfg.occlusion_train_trajectories, cfg.train_steps,
                                          seed(SeedSlot::kOccluderTrain), occ),
       "occluder_train");
  save(world::generate_uniform_dataset(arm, cfg.reference_samples, seed(SeedSlot::kOccluderReferences), occ),
       "occluder_references");
  save(world::generate_trajectory_dataset(arm, cfg.occlusion_test_trajectories, cfg.test_steps,
                                          seed(SeedSlot::kOccluderTest), occ),
       "occluder_test");
}

void train_forward(const RunConfig& cfg, const RunPaths& paths) {
  const auto train = load(paths, "train");
  forward::KnnFlowModel model(
      forward::build_flow_branch(cfg.dof, cfg.image_size, derived_seed(cfg, SeedSlot::kFlowInit)),
      load(paths, "references"), cfg.k);
  auto t = train_config(cfg, paths, cfg.forward_epochs, cfg.forward_lr_decay, SeedSlot::kFlowShuffle,
                        flow_name(cfg.k));
  forward::train_forward(model, *train, t);
  nn::save_network(model.branch(), paths.checkpoint(flow_name(cfg.k)));
}

void train_deconv(const RunConfig& cfg, const RunPaths& paths) {
  const auto train = load(paths, "train");
  forward::DeconvModel model(forward::build_deconv_net(cfg.dof, cfg.image_size, derived_seed(cfg, SeedSlot::kDeconvInit)));
  forward::train_deconv(model, *train,
                        train_config(cfg, paths, cfg.deconv_epochs, cfg.deconv_lr_decay, SeedSlot::kDeconvShuffle, "deconv"));
  nn::save_network(model.net(), paths.checkpoint("deconv"));
}

void train_inverse(const RunConfig& cfg, const RunPaths& paths) {
  const auto train = load(paths, "train");
  inverse::InverseModel model(inverse::build_inverse_net(cfg.dof, cfg.image_size,
                                                         derived_seed(cfg, SeedSlot::kInverseInit), cfg.inverse_dropout));
  inverse::train_inverse(model, *train,
                         train_config(cfg, paths, cfg.inverse_epochs, cfg.inverse_lr_decay, SeedSlot::kInverseShuffle,
                                      "inverse"));
  nn::save_network(model.net(), paths.checkpoint("inverse"));
}

void predict(const RunConfig& cfg, const RunPaths& paths) {
  const auto test = load(paths, "test");
  const auto frames = predict_split(cfg, paths, *test);
  const fs::path dir = paths.frames() / model_label(cfg);
  fs::remove_all(dir);
  fs::create_directories(dir);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    world::write_pnm(frames[i], dir / (std::to_string(test->records[i].sample_id) + ".ppm"));
  }
}

void eval(const RunConfig& cfg, const RunPaths& paths) {
  const auto test = load(paths, "test");
  const auto frames = predict_split(cfg, paths, *test);
  const auto truth = images_of(*test);
  const ImageMetrics m = compute_metrics(frames, truth);
  MetricsRow row{"forward", model_label(cfg), "test", "", m.mean_l1, m.rms, {}, std::nullopt, std::nullopt};
  append_metrics(paths.metrics(), row);
}

void track_ekf(const RunConfig& cfg, const RunPaths& paths) {
  if (cfg.model != "knnflow") throw invalid_argument("track-ekf needs model = knnflow");
  const auto track = load(paths, "track");
  const auto validation = load(paths, "validation");
  const forward::KnnFlowModel model = load_flow_model(cfg, paths, load(paths, "references"));
  const tracker::KnnFlowObservation obs(model);
  const tracker::SensorNoiseModel noise = tracker::estimate_sensor_noise(obs, *validation, cfg.rank);
  const tracker::TransitionModel transition{cfg.dt, cfg.gamma};

  std::vector<Track> tracks;
  for (const auto& idx : track->trajectories()) {
    Track t;
    std::vector<Eigen::VectorXd> frames;
    for (std::size_t i : idx) {
      t.truth.push_back(track->records[i].q);
      frames.push_back(tracker::flatten(track->records[i].image));
    }
    std::vector<double> x0 = t.truth.front();
    for (double& v : x0) v += cfg.offset_deg * kDeg;
    // A zero offset would give a zero prior covariance; one degree is the floor.
    const auto prior = tracker::make_prior(x0, std::max(cfg.offset_deg, 1.0) * kDeg);
    auto result = tracker::track_ekf(obs, frames, prior, noise, transition);
    t.estimates = std::move(result.estimates);
    t.variances = std::move(result.variances);
    tracks.push_back(std::move(t));
  }
  write_tracks(paths.tracks() / ekf_track_name(cfg), tracks);
  MetricsRow row{"track", "ekf_" + model_label(cfg), "track", "offset_deg=" + world::format_double(cfg.offset_deg),
                 std::nullopt, std::nullopt, to_vector(pooled_rmse(tracks)), std::nullopt, std::nullopt};
  append_metrics(paths.metrics(), row);
}

void track_inverse(const RunConfig& cfg, const RunPaths& paths) {
  const auto track = load(paths, "track");
  inverse::InverseModel model(inverse::build_inverse_net(cfg.dof, cfg.image_size,
                                                         derived_seed(cfg, SeedSlot::kInverseInit), cfg.inverse_dropout));
  nn::load_network(model.net(), paths.checkpoint("inverse"));

  std::vector<Track> tracks;
  for (const auto& idx : track->trajectories()) {
    Track t;
    std::vector<world::Image> frames;
    for (std::size_t i : idx) {
      t.truth.push_back(track->records[i].q);
      frames.push_back(track->records[i].image);
    }
    for (const auto& q : inverse::track_by_inverse(model, frames)) {
      t.estimates.push_back(Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size())));
    }
    tracks.push_back(std::move(t));
  }
  write_tracks(paths.tracks() / "inverse.csv", tracks);
  MetricsRow row{"track", "inverse", "track", "", std::nullopt, std::nullopt, to_vector(pooled_rmse(tracks)),
                 std::nullopt, std::nullopt};
  append_metrics(paths.metrics(), row);
}

void occlusion(const RunConfig& cfg, const RunPaths& paths) {
  const world::ArmModel arm = cfg.arm();
  const world::Occluder occ = cfg.occluder();
  const auto test = load(paths, "occluder_test");

  // The branch is fine-tuned on occluder scenes for this experiment only.
  forward::KnnFlowModel model(load_flow_branch(cfg, paths, flow_name(cfg.effective_branch_k())),
                              load(paths, "occluder_references"), 1);
  const auto train = load(paths, "occluder_train");
  forward::train_forward(model, *train,
                         train_config(cfg, paths, cfg.occlusion_epochs, cfg.forward_lr_decay,
                                      SeedSlot::kOccluderShuffle, "flow_occluder"));
  nn::save_network(model.branch(), paths.checkpoint("flow_occluder"));

  fs::remove_all(paths.masks());
  fs::create_directories(paths.masks());
  std::size_t tp = 0, predicted = 0, actual = 0, pairs = 0;
  const auto trajectories = test->trajectories();
  for (std::size_t t = 0; t < trajectories.size(); ++t) {
    const auto& idx = trajectories[t];
    for (std::size_t s = 0; s + cfg.occlusion_gap < idx.size(); ++s) {
      const auto& a = test->records[idx[s]];
      const auto& b = test->records[idx[s + cfg.occlusion_gap]];
      const world::Mask arm_mask = world::silhouette(arm, a.q);
      // Only pairs whose first frame is fully visible.
      if (touches(arm_mask, occ, cfg.image_size)) continue;
      const auto flows = occlusion::bidirectional_flow(model.branch(), a.q, b.q);
      const world::Mask pred = occlusion::symmetry_check(flows.forward, flows.backward, arm_mask, cfg.epsilon);
      const world::Mask truth = world::occlusion_transfer_truth(arm, a.q, b.q, occ);
      const auto pr = occlusion::evaluate_occlusion(pred, truth);
      tp += pr.true_positives;
      predicted += pr.predicted;
      actual += pr.actual;
      ++pairs;
      const std::string stem = "t" + std::to_string(t) + "_s" + std::to_string(s);
      world::write_mask(pred, paths.masks() / (stem + "_predicted.pgm"));
      world::write_mask(truth, paths.masks() / (stem + "_truth.pgm"));
    }
  }
  if (pairs == 0) throw invalid_argument("occlusion: no pair starts with a fully visible arm");
  MetricsRow row{"occlusion", "flow_occluder", "occluder_test",
                 "epsilon=" + world::format_double(cfg.epsilon) + ";gap=" + std::to_string(cfg.occlusion_gap) +
                     ";pairs=" + std::to_string(pairs),
                 std::nullopt, std::nullopt, {},
                 predicted ? static_cast<double>(tp) / predicted : 1.0,
                 actual ? static_cast<double>(tp) / actual : 1.0};
  append_metrics(paths.metrics(), row);
}

std::string report(const RunPaths& paths) {
  const auto rows = read_metrics(paths.metrics());
  std::ostringstream out;
  char buf[256];
  out << "run: " << paths.root.string() << "\n\n";
  out << "forward models (held-out mean L1 / RMS)\n";
  for (const auto& r : rows) {
    if (r.kind != "forward") continue;
    std::snprintf(buf, sizeof buf, "  %-18s %-8s L1 %.5f  RMS %.5f\n", r.model.c_str(), r.split.c_str(),
                  r.mean_l1.value_or(NAN), r.rms.value_or(NAN));
    out << buf;
  }
  out << "\ntracking (per-joint RMSE, degrees)\n";
  for (const auto& r : rows) {
    if (r.kind != "track") continue;
    std::snprintf(buf, sizeof buf, "  %-24s %-16s", r.model.c_str(), r.setting.c_str());
    out << buf;
    for (std::size_t j = 0; j < r.rmse.size(); ++j) {
      std::snprintf(buf, sizeof buf, "  j%zu %.3f", j, r.rmse[j] / kDeg);
      out << buf;
    }
    out << "\n";
  }
  out << "\nocclusion\n";
  for (const auto& r : rows) {
    if (r.kind != "occlusion") continue;
    std::snprintf(buf, sizeof buf, "  %-30s precision %.3f  recall %.3f\n", r.setting.c_str(),
                  r.precision.value_or(NAN), r.recall.value_or(NAN));
    out << buf;
  }
  const std::string text = out.str();
  std::ofstream file(paths.root / "report.txt");
  file << text;
  if (!file) throw io_error("cannot write report.txt");
  return text;
}

void run_command(const RunConfig& cfg, const fs::path& root, const std::string& command) {
  cfg.validate();
  if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
    throw invalid_argument("unknown command '" + command + "'");
  }
  const RunPaths paths{root};
  fs::create_directories(root);
  {
    std::ofstream meta(paths.meta());
    meta << "# resolved configuration\n" << to_text(cfg);
    if (!meta) throw io_error("cannot write " + paths.meta().string());
  }
  static const std::map<std::string, void (*)(const RunConfig&, const RunPaths&)> table = {
      {"gen-data", gen_data},   {"train-forward", train_forward}, {"train-deconv", train_deconv},
      {"train-inverse", train_inverse}, {"predict", predict},     {"track-ekf", track_ekf},
      {"track-inverse", track_inverse}, {"occlusion", occlusion}, {"eval", eval}};
  if (command == "report") {
    report(paths);
  } else {
    table.at(command)(cfg, paths);
  }
}

}  // namespace armview::harness
