// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <variant>

#include "common/error.hpp"
#include "world/dataset.hpp"

namespace armview::harness {
namespace {

using Field = std::variant<int RunConfig::*, double RunConfig::*, std::uint64_t RunConfig::*,
                           std::string RunConfig::*>;

struct Entry {
  const char* name;
  Field field;
};

const std::vector<Entry>& table() {
  static const std::vector<Entry> entries = {
      {"seed", &RunConfig::seed},
      {"dof", &RunConfig::dof},
      {"image_size", &RunConfig::image_size},
      {"joint_limit", &RunConfig::joint_limit},
      {"train_trajectories", &RunConfig::train_trajectories},
      {"train_steps", &RunConfig::train_steps},
      {"reference_samples", &RunConfig::reference_samples},
      {"test_trajectories", &RunConfig::test_trajectories},
      {"test_steps", &RunConfig::test_steps},
      {"validation_trajectories", &RunConfig::validation_trajectories},
      {"validation_steps", &RunConfig::validation_steps},
      {"track_trajectories", &RunConfig::track_trajectories},
      {"track_steps", &RunConfig::track_steps},
      {"model", &RunConfig::model},
      {"k", &RunConfig::k},
      {"branch_k", &RunConfig::branch_k},
      {"lambda", &RunConfig::lambda},
      {"learning_rate", &RunConfig::learning_rate},
      {"batch_size", &RunConfig::batch_size},
      {"forward_epochs", &RunConfig::forward_epochs},
      {"deconv_epochs", &RunConfig::deconv_epochs},
      {"inverse_epochs", &RunConfig::inverse_epochs},
      {"forward_lr_decay", &RunConfig::forward_lr_decay},
      {"deconv_lr_decay", &RunConfig::deconv_lr_decay},
      {"inverse_lr_decay", &RunConfig::inverse_lr_decay},
      {"inverse_dropout", &RunConfig::inverse_dropout},
      {"gamma", &RunConfig::gamma},
      {"rank", &RunConfig::rank},
      {"dt", &RunConfig::dt},
      {"offset_deg", &RunConfig::offset_deg},
      {"epsilon", &RunConfig::epsilon},
      {"occlusion_epochs", &RunConfig::occlusion_epochs},
      {"occlusion_gap", &RunConfig::occlusion_gap},
      {"occlusion_train_trajectories", &RunConfig::occlusion_train_trajectories},
      {"occlusion_test_trajectories", &RunConfig::occlusion_test_trajectories},
      {"occluder_x0", &RunConfig::occluder_x0},
      {"occluder_y0", &RunConfig::occluder_y0},
      {"occluder_x1", &RunConfig::occluder_x1},
      {"occluder_y1", &RunConfig::occluder_y1},
  };
  return entries;
}

const Entry& find(const std::string& key) {
  const auto& t = table();
  const auto it = std::find_if(t.begin(), t.end(), [&](const Entry& e) { return key == e.name; });
  if (it == t.end()) throw invalid_argument("unknown config key '" + key + "'");
  return *it;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw invalid_argument("config key '" + key + "': cannot parse '" + text + "'");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

void require(bool ok, const std::string& key, const std::string& rule) {
  if (!ok) throw invalid_argument("config key '" + key + "' must be " + rule);
}

}  // namespace

world::ArmModel RunConfig::arm() const { return world::ArmModel::desk_default(dof, image_size, joint_limit); }

world::Occluder RunConfig::occluder() const {
  return world::Occluder::rect(occluder_x0, occluder_y0, occluder_x1, occluder_y1, {0.95f, 0.85f, 0.2f});
}

void RunConfig::validate() const {
  require(dof >= 2 && dof <= 6, "dof", "in [2, 6]");
  require(image_size >= 32 && image_size % 32 == 0, "image_size", "a positive multiple of 32");
  require(joint_limit > 0.0 && joint_limit <= 3.1, "joint_limit", "in (0, 3.1]");
  require(train_trajectories >= 1, "train_trajectories", ">= 1");
  require(train_steps >= 1, "train_steps", ">= 1");
  require(reference_samples >= 1, "reference_samples", ">= 1");
  require(test_trajectories >= 1, "test_trajectories", ">= 1");
  require(test_steps >= 1, "test_steps", ">= 1");
  require(validation_trajectories >= 1, "validation_trajectories", ">= 1");
  require(validation_steps >= 1, "validation_steps", ">= 1");
  require(validation_trajectories * validation_steps >= 2, "validation_steps", "enough for two samples");
  require(track_trajectories >= 1, "track_trajectories", ">= 1");
  require(track_steps >= 2, "track_steps", ">= 2");
  require(model == "knnflow" || model == "deconv" || model == "nn1", "model", "knnflow, deconv or nn1");
  require(k >= 1 && k <= 16, "k", "in [1, 16]");
  require(branch_k >= 0 && branch_k <= 16, "branch_k", "in [0, 16]");
  require(lambda >= 0.0, "lambda", ">= 0");
  require(learning_rate > 0.0, "learning_rate", "> 0");
  require(batch_size >= 1, "batch_size", ">= 1");
  require(forward_epochs >= 0, "forward_epochs", ">= 0");
  require(deconv_epochs >= 0, "deconv_epochs", ">= 0");
  require(inverse_epochs >= 0, "inverse_epochs", ">= 0");
  require(forward_lr_decay > 0.0 && forward_lr_decay <= 1.0, "forward_lr_decay", "in (0, 1]");
  require(deconv_lr_decay > 0.0 && deconv_lr_decay <= 1.0, "deconv_lr_decay", "in (0, 1]");
  require(inverse_lr_decay > 0.0 && inverse_lr_decay <= 1.0, "inverse_lr_decay", "in (0, 1]");
  require(inverse_dropout >= 0.0 && inverse_dropout < 1.0, "inverse_dropout", "in [0, 1)");
  require(gamma > 0.0, "gamma", "> 0");
  require(rank >= 1, "rank", ">= 1");
  require(rank < validation_trajectories * validation_steps, "rank", "below the validation sample count");
  require(dt > 0.0, "dt", "> 0");
  require(offset_deg >= 0.0 && offset_deg <= 90.0, "offset_deg", "in [0, 90]");
  require(epsilon > 0.0, "epsilon", "> 0");
  require(occlusion_epochs >= 0, "occlusion_epochs", ">= 0");
  require(occlusion_gap >= 1 && occlusion_gap < test_steps, "occlusion_gap", "in [1, test_steps)");
  require(occlusion_train_trajectories >= 1, "occlusion_train_trajectories", ">= 1");
  require(occlusion_test_trajectories >= 1, "occlusion_test_trajectories", ">= 1");
  arm().validate();
  occluder().validate(image_size);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : table()) keys.emplace_back(e.name);
  return keys;
}

void set_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const Entry& e = find(key);
  std::visit(
      [&](auto member) {
        using T = std::remove_reference_t<decltype(cfg.*member)>;
        if constexpr (std::is_same_v<T, std::string>) {
          cfg.*member = value;
        } else {
          cfg.*member = parse_number<T>(key, value);
        }
      },
      e.field);
}

std::string get_value(const RunConfig& cfg, const std::string& key) {
  const Entry& e = find(key);
  return std::visit(
      [&](auto member) -> std::string {
        using T = std::remove_cvref_t<decltype(cfg.*member)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return cfg.*member;
        } else if constexpr (std::is_same_v<T, double>) {
          return world::format_double(cfg.*member);
        } else {
          return std::to_string(cfg.*member);
        }
      },
      e.field);
}

void apply_text(RunConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw invalid_argument("config line " + std::to_string(number) + ": expected 'key = value'");
    }
    set_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void apply_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw not_found("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  apply_text(cfg, buf.str());
}

RunConfig load_config(const std::filesystem::path& path) {
  RunConfig cfg;
  apply_file(cfg, path);
  return cfg;
}

std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& e : table()) out += std::string(e.name) + " = " + get_value(cfg, e.name) + "\n";
  return out;
}

}  // namespace armview::harness
