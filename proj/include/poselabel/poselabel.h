/* poselabel C API.
 *
 * All functionality of the shared library is exposed through this header:
 * load a configuration, run pipeline commands against it, and inspect the
 * resulting reports. Objects are opaque handles; every function that can
 * fail returns a pl_status, and pl_last_error() describes the most recent
 * failure on the calling thread.
 *
 * Thread safety: distinct handles may be used from distinct threads.
 * A single handle must not be used concurrently.
 */
#ifndef POSELABEL_H
#define POSELABEL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PL_API __declspec(dllexport)
#else
#define PL_API __attribute__((visibility("default")))
#endif

typedef enum pl_status {
  PL_OK = 0,          /* success */
  PL_ERROR_IO = 1,    /* I/O, parse, or schema failure */
  PL_ERROR_DOMAIN = 2 /* domain or validation failure */
} pl_status;

typedef struct pl_config pl_config;
typedef struct pl_report pl_report;

/* Library version as "major.minor.patch". Static storage; do not free. */
PL_API const char* pl_version(void);

/* Message for the last failed call on this thread. Static thread-local
 * storage, overwritten by the next failure; do not free. Empty string if
 * no call failed yet. */
PL_API const char* pl_last_error(void);

/* Loads a JSON configuration file. On success stores a new handle in *out.
 * Free with pl_config_free. */
PL_API pl_status pl_config_load(const char* path, pl_config** out);
PL_API void pl_config_free(pl_config* config);

/* Overrides applied after loading. workers == 0 picks the hardware
 * concurrency; overwrite lets commands replace existing outputs; force
 * re-runs work that is normally skipped (e.g. re-tuning a tuned camera). */
PL_API pl_status pl_config_set_workers(pl_config* config, int32_t workers);
PL_API pl_status pl_config_set_seed(pl_config* config, uint64_t seed);
PL_API pl_status pl_config_set_overwrite(pl_config* config, int enabled);
PL_API pl_status pl_config_set_force(pl_config* config, int enabled);

/* Pipeline commands. On success (PL_OK) *out holds a new report handle and
 * must be freed with pl_report_free. On failure *out is untouched.
 *
 * Note a command can complete with partial failures (e.g. one camera out of
 * eight could not be localized): that returns PL_OK with a report whose
 * exit code is 2.
 */
PL_API pl_status pl_run_localize(const pl_config* config, pl_report** out);
PL_API pl_status pl_run_tune(const pl_config* config, pl_report** out);
PL_API pl_status pl_run_annotate(const pl_config* config, pl_report** out);
PL_API pl_status pl_run_stats(const pl_config* config, pl_report** out);
PL_API pl_status pl_run_validate(const pl_config* config, pl_report** out);
PL_API pl_status pl_run_synth(const pl_config* config, pl_report** out);
PL_API pl_status pl_run_overlay(const pl_config* config, pl_report** out);

/* 0 success, 1 I/O failure, 2 domain/validation failure. */
PL_API int32_t pl_report_exit_code(const pl_report* report);
/* Human-readable summary. Owned by the report; valid until pl_report_free. */
PL_API const char* pl_report_text(const pl_report* report);
/* Same content as a JSON document. Owned by the report. */
PL_API const char* pl_report_json(const pl_report* report);
PL_API void pl_report_free(pl_report* report);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* POSELABEL_H */
