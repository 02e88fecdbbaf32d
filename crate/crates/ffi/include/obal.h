#ifndef OBAL_H
#define OBAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum ObalStatus {
  OBAL_STATUS_OK = 0,
  OBAL_STATUS_NULL_POINTER = 1,
  OBAL_STATUS_INVALID_ARGUMENT = 2,
  OBAL_STATUS_DIMENSION_MISMATCH = 3,
  OBAL_STATUS_NOT_INITIALIZED = 4,
  OBAL_STATUS_SERIALIZATION = 5,
  OBAL_STATUS_NUMERICAL = 6,
  OBAL_STATUS_INTERNAL = 7,
} ObalStatus;

// Opaque engine handle.
typedef struct ObalEngine ObalEngine;

// Outcome of one target instance.
typedef struct ObalTargetResult {
  // False while the first initialization batch is being buffered.
  bool has_prediction;
  size_t prediction;
  // Predicted by the ensemble frozen at the last target drift.
  bool stale;
  bool drift;
  bool reinitialized;
} ObalTargetResult;

// Running totals of an engine.
typedef struct ObalCounters {
  uint64_t source_drifts;
  uint64_t target_drifts;
  uint64_t reinits;
  uint64_t pool_evictions;
  uint64_t classifiers_created;
  size_t max_pool_size;
} ObalCounters;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len`) and returns the full message length without the NUL.
// Returns 0 when no error has been recorded.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t obal_last_error_message(char *buf, size_t len);

// Creates an engine. `config_json` is a JSON object of engine settings;
// missing keys take their defaults and a null pointer selects all defaults.
//
// # Safety
// `config_json` must be null or a NUL-terminated string; `out` must be a
// valid pointer.
enum ObalStatus obal_engine_new(const char *config_json,
                                size_t n_sources,
                                size_t dim,
                                size_t n_classes,
                                struct ObalEngine **out);

// Releases an engine. Null is ignored.
//
// # Safety
// `engine` must be null or a handle not yet freed.
void obal_engine_free(struct ObalEngine *engine);

// Feeds one labeled instance of source stream `index`. `drift` (nullable)
// receives whether the source's drift detector fired.
//
// # Safety
// `features` must point to `dim` doubles; `drift` must be null or valid.
enum ObalStatus obal_engine_process_source(struct ObalEngine *engine,
                                           size_t index,
                                           const double *features,
                                           size_t dim,
                                           size_t label,
                                           uint64_t timestamp,
                                           bool *drift);

// Predicts one unlabeled target instance, then lets it update the engine.
//
// # Safety
// `features` must point to `dim` doubles; `out` must be null or valid.
enum ObalStatus obal_engine_process_target(struct ObalEngine *engine,
                                           const double *features,
                                           size_t dim,
                                           uint64_t timestamp,
                                           struct ObalTargetResult *out);

// Writes the live ensemble's class distribution for `features` into
// `proba` (`n_classes` doubles) without updating the engine.
//
// # Safety
// `features` must point to `dim` doubles and `proba` to `n_classes` doubles.
enum ObalStatus obal_engine_predict_proba(const struct ObalEngine *engine,
                                          const double *features,
                                          size_t dim,
                                          double *proba,
                                          size_t n_classes);

// Copies the engine's counters into `out`.
//
// # Safety
// `out` must be a valid pointer.
enum ObalStatus obal_engine_counters(const struct ObalEngine *engine, struct ObalCounters *out);

// Serializes the engine to a JSON checkpoint. Release `*out` with
// `obal_string_free`.
//
// # Safety
// `out` must be a valid pointer.
enum ObalStatus obal_engine_checkpoint(const struct ObalEngine *engine, char **out);

// Restores an engine from a checkpoint written by `obal_engine_checkpoint`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be a valid pointer.
enum ObalStatus obal_engine_from_checkpoint(const char *json, struct ObalEngine **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void obal_string_free(char *s);

// Computes the `d × d` alignment matrix mapping data with covariance
// `source_cov` onto `target_cov`. All matrices are row-major.
//
// # Safety
// Each pointer must address `d * d` doubles.
enum ObalStatus obal_coral_transform(const double *source_cov,
                                     const double *target_cov,
                                     size_t d,
                                     double *out);

// Percentage of `predictions` equal to `labels`, in `[0, 100]`.
//
// # Safety
// Both arrays must hold `n` elements; `out` must be a valid pointer.
enum ObalStatus obal_prequential_accuracy(const size_t *predictions,
                                          const size_t *labels,
                                          size_t n,
                                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OBAL_H */
