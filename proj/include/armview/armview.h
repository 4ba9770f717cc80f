/* Copyright 2026 The armview Authors */
/* SPDX-License-Identifier: Apache-2.0 */

#ifndef ARMVIEW_ARMVIEW_H_
#define ARMVIEW_ARMVIEW_H_

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define ARMVIEW_API __declspec(dllexport)
#else
#define ARMVIEW_API __attribute__((visibility("default")))
#endif

typedef enum armview_status {
  ARMVIEW_OK = 0,
  ARMVIEW_INVALID_ARGUMENT = 1,
  ARMVIEW_SHAPE_MISMATCH = 2,
  ARMVIEW_NOT_FOUND = 3,
  ARMVIEW_NUMERIC = 4,
  ARMVIEW_IO = 5,
  ARMVIEW_SINGULAR = 6,
  ARMVIEW_STATE = 7,
  ARMVIEW_INTERNAL = 99
} armview_status;

/* Run configuration. Starts from the built-in defaults. */
typedef struct armview_config armview_config;

ARMVIEW_API const char* armview_version(void);

/* Message of the last failing call on this thread; empty after success. */
ARMVIEW_API const char* armview_last_error(void);

ARMVIEW_API armview_status armview_config_create(armview_config** out);
ARMVIEW_API void armview_config_destroy(armview_config* cfg);

/* Applies a `key = value` file on top of the current values. */
ARMVIEW_API armview_status armview_config_load(armview_config* cfg, const char* path);
ARMVIEW_API armview_status armview_config_set(armview_config* cfg, const char* key, const char* value);

/* Copies the value's text into buf (NUL-terminated) and stores the length it
   needs, excluding the terminator, in *needed. buf may be NULL when
   capacity is 0. */
ARMVIEW_API armview_status armview_config_get(const armview_config* cfg, const char* key, char* buf,
                                              size_t capacity, size_t* needed);
ARMVIEW_API armview_status armview_config_validate(const armview_config* cfg);

/* Number of subcommands and the name of each. */
ARMVIEW_API size_t armview_command_count(void);
ARMVIEW_API const char* armview_command_name(size_t index);

/* Runs one subcommand (gen-data, train-forward, ...) inside run_dir. */
ARMVIEW_API armview_status armview_run(const armview_config* cfg, const char* run_dir, const char* command);

/* Same text as report.txt, copied like armview_config_get. */
ARMVIEW_API armview_status armview_report(const char* run_dir, char* buf, size_t capacity, size_t* needed);

/* Mean |p - t| and root-mean-square difference over n values. */
ARMVIEW_API armview_status armview_compute_metrics(const float* predicted, const float* truth, size_t n,
                                                   double* mean_l1, double* rms);

#ifdef __cplusplus
}
#endif

#endif /* ARMVIEW_ARMVIEW_H_ */
