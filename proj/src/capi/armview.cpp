// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "armview/armview.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <span>
#include <string>

#include "common/error.hpp"
#include "harness/config.hpp"
#include "harness/metrics.hpp"
#include "harness/pipeline.hpp"

struct armview_config {
  armview::harness::RunConfig value;
};

namespace {

thread_local std::string g_last_error;

armview_status to_status(armview::ErrorCode code) {
  switch (code) {
    case armview::ErrorCode::kInvalidArgument: return ARMVIEW_INVALID_ARGUMENT;
    case armview::ErrorCode::kShapeMismatch: return ARMVIEW_SHAPE_MISMATCH;
    case armview::ErrorCode::kNotFound: return ARMVIEW_NOT_FOUND;
    case armview::ErrorCode::kNumeric: return ARMVIEW_NUMERIC;
    case armview::ErrorCode::kIo: return ARMVIEW_IO;
    case armview::ErrorCode::kSingular: return ARMVIEW_SINGULAR;
    case armview::ErrorCode::kState: return ARMVIEW_STATE;
  }
  return ARMVIEW_INTERNAL;
}

template <class F>
armview_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return ARMVIEW_OK;
  } catch (const armview::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return ARMVIEW_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw armview::invalid_argument(what);
}

void copy_out(const std::string& text, char* buf, size_t capacity, size_t* needed) {
  if (needed) *needed = text.size();
  if (capacity == 0) return;
  require(buf != nullptr, "null buffer with non-zero capacity");
  const size_t n = std::min(capacity - 1, text.size());
  std::memcpy(buf, text.data(), n);
  buf[n] = '\0';
}

}  // namespace

extern "C" {

const char* armview_version(void) { return "0.1.0"; }

const char* armview_last_error(void) { return g_last_error.c_str(); }

armview_status armview_config_create(armview_config** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = new armview_config{};
  });
}

void armview_config_destroy(armview_config* cfg) { delete cfg; }

armview_status armview_config_load(armview_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg && path, "null argument");
    armview::harness::RunConfig next = cfg->value;
    armview::harness::apply_file(next, path);
    cfg->value = next;
  });
}

armview_status armview_config_set(armview_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg && key && value, "null argument");
    armview::harness::set_value(cfg->value, key, value);
  });
}

armview_status armview_config_get(const armview_config* cfg, const char* key, char* buf, size_t capacity,
                                  size_t* needed) {
  return guarded([&] {
    require(cfg && key, "null argument");
    copy_out(armview::harness::get_value(cfg->value, key), buf, capacity, needed);
  });
}

armview_status armview_config_validate(const armview_config* cfg) {
  return guarded([&] {
    require(cfg != nullptr, "null config");
    cfg->value.validate();
  });
}

size_t armview_command_count(void) { return armview::harness::commands().size(); }

const char* armview_command_name(size_t index) {
  const auto& names = armview::harness::commands();
  return index < names.size() ? names[index].c_str() : nullptr;
}

armview_status armview_run(const armview_config* cfg, const char* run_dir, const char* command) {
  return guarded([&] {
    require(cfg && run_dir && command, "null argument");
    armview::harness::run_command(cfg->value, run_dir, command);
  });
}

armview_status armview_report(const char* run_dir, char* buf, size_t capacity, size_t* needed) {
  return guarded([&] {
    require(run_dir != nullptr, "null argument");
    copy_out(armview::harness::report(armview::harness::RunPaths{run_dir}), buf, capacity, needed);
  });
}

armview_status armview_compute_metrics(const float* predicted, const float* truth, size_t n, double* mean_l1,
                                       double* rms) {
  return guarded([&] {
    require(mean_l1 && rms, "null output");
    require(n == 0 || (predicted && truth), "null input");
    armview::world::Image p(1, 1, 0), t(1, 1, 0);
    if (n > 0) {
      p.pixels.assign(predicted, predicted + n);
      t.pixels.assign(truth, truth + n);
    }
    const auto m = armview::harness::compute_metrics(std::span(&p, 1), std::span(&t, 1));
    *mean_l1 = m.mean_l1;
    *rms = m.rms;
  });
}

}  // extern "C"
