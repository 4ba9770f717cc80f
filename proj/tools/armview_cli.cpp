// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end over the C API.

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "armview/armview.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMissing = 3;

struct Options {
  std::string config;
  std::string out = "out";
  std::string run = "default";
  std::vector<std::string> sets;
  std::optional<std::string> seed, model, k, offset_deg, epsilon;
};

int fail(armview_status s) {
  std::fprintf(stderr, "armview: %s\n", armview_last_error());
  return s == ARMVIEW_NOT_FOUND ? kExitMissing : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // Training allocates and frees many mid-sized buffers per step; keep them
  // on the heap instead of mapping and unmapping them each time.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif

  CLI::App app{"armview: learned forward and inverse models of a simulated planar arm"};
  app.require_subcommand(1, 1);
  Options opt;
  for (size_t i = 0; i < armview_command_count(); ++i) {
    CLI::App* sub = app.add_subcommand(armview_command_name(i));
    sub->add_option("--config", opt.config, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output root")->capture_default_str();
    sub->add_option("--run", opt.run, "run name; artifacts go to <out>/<run>")->capture_default_str();
    sub->add_option("--set", opt.sets, "override a config key, key=value (repeatable)");
    sub->add_option("--seed", opt.seed, "base seed");
    sub->add_option("--model", opt.model, "knnflow, deconv or nn1");
    sub->add_option("--k", opt.k, "neighbours blended by knnflow");
    sub->add_option("--offset-deg", opt.offset_deg, "EKF prior offset in degrees");
    sub->add_option("--epsilon", opt.epsilon, "occlusion threshold in pixels");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  armview_config* raw = nullptr;
  if (armview_status s = armview_config_create(&raw); s != ARMVIEW_OK) return fail(s);
  std::unique_ptr<armview_config, decltype(&armview_config_destroy)> cfg(raw, armview_config_destroy);

  if (!opt.config.empty()) {
    if (armview_status s = armview_config_load(cfg.get(), opt.config.c_str()); s != ARMVIEW_OK) return fail(s);
  }
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& kv : opt.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "armview: --set expects key=value, got '%s'\n%s", kv.c_str(), app.help().c_str());
      return kExitUsage;
    }
    overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  // Dedicated flags win over --set.
  const std::pair<const char*, const std::optional<std::string>*> flags[] = {
      {"seed", &opt.seed}, {"model", &opt.model}, {"k", &opt.k}, {"offset_deg", &opt.offset_deg},
      {"epsilon", &opt.epsilon}};
  for (const auto& [key, value] : flags) {
    if (*value) overrides.emplace_back(key, **value);
  }
  for (const auto& [key, value] : overrides) {
    if (armview_status s = armview_config_set(cfg.get(), key.c_str(), value.c_str()); s != ARMVIEW_OK) {
      return fail(s);
    }
  }

  const std::string run_dir = opt.out + "/" + opt.run;
  if (armview_status s = armview_run(cfg.get(), run_dir.c_str(), command.c_str()); s != ARMVIEW_OK) return fail(s);

  if (command == "report") {
    size_t needed = 0;
    if (armview_status s = armview_report(run_dir.c_str(), nullptr, 0, &needed); s != ARMVIEW_OK) return fail(s);
    std::string text(needed + 1, '\0');
    if (armview_status s = armview_report(run_dir.c_str(), text.data(), text.size(), &needed); s != ARMVIEW_OK) {
      return fail(s);
    }
    text.resize(needed);
    std::fputs(text.c_str(), stdout);
  }
  return 0;
}
