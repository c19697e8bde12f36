#ifndef FLOQUET_LAB_H
#define FLOQUET_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum FlqStatus {
  FLQ_STATUS_OK = 0,
  FLQ_STATUS_NULL_POINTER = 1,
  FLQ_STATUS_INVALID_UTF8 = 2,
  FLQ_STATUS_INVALID_CONFIG = 3,
  FLQ_STATUS_INVALID_MODEL = 4,
  FLQ_STATUS_INVALID_GRID = 5,
  FLQ_STATUS_INVALID_ARGUMENT = 6,
  FLQ_STATUS_DIMENSION_MISMATCH = 7,
  FLQ_STATUS_NUMERICAL_FAILURE = 8,
  FLQ_STATUS_BUFFER_TOO_SMALL = 9,
  FLQ_STATUS_DIAGNOSTIC_FAILED = 10,
  FLQ_STATUS_IO = 11,
  FLQ_STATUS_PANIC = 12,
} FlqStatus;

// A validated model.
typedef struct FlqModel FlqModel;

// A sampled orbit.
typedef struct FlqOrbit FlqOrbit;

typedef struct FlqComplex {
  double re;
  double im;
} FlqComplex;

// Summary of an ε-almost-period scan.
typedef struct FlqApResult {
  double epsilon;
  double tau_max;
  double tau_step;
  double max_gap;
  size_t almost_period_count;
  // 1 when every gap fits: `relative_density_l` is then meaningful.
  uint8_t consistent;
  double relative_density_l;
  // Violating witness `(τ, t, deviation)`, NaN when consistent.
  double witness_tau;
  double witness_t;
  double witness_deviation;
} FlqApResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *flq_version(void);

// Copy the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length in bytes.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t flq_last_error_message(char *buf, size_t len);

// Build a model from a JSON object such as
// `{"variant":"DrivenTwoLevel","omega0":1,"drive_amplitude":0.2,"drive_frequency":1}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum FlqStatus flq_model_from_json(const char *json, struct FlqModel **out);

// # Safety
// `model` must be null or a handle from [`flq_model_from_json`] not yet freed.
void flq_model_free(struct FlqModel *model);

// # Safety
// `model` must be a live handle and `out` writable.
enum FlqStatus flq_model_dim(const struct FlqModel *model, size_t *out);

// Driving period; `InvalidModel` for models without one.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum FlqStatus flq_model_period(const struct FlqModel *model, double *out);

// Closed-form `U(t, 0)` into a `dim × dim` row-major buffer.
//
// # Safety
// `model` must be a live handle and `out` point to `len` writable entries.
enum FlqStatus flq_exact_propagator(const struct FlqModel *model,
                                    double t,
                                    struct FlqComplex *out,
                                    size_t len);

// Numerically propagated `U(T, 0)` over one period.
//
// # Safety
// `model` must be a live handle and `out` point to `len` writable entries.
enum FlqStatus flq_monodromy(const struct FlqModel *model, struct FlqComplex *out, size_t len);

// Eigenphases `α ∈ [0, 2π)` of the monodromy, ascending, `dim` entries.
//
// # Safety
// `model` must be a live handle and `out` point to `len` writable entries.
enum FlqStatus flq_floquet_phases(const struct FlqModel *model, double *out, size_t len);

// Propagate `psi0` (length `dim`) over the grid `t0, t0 + h, …, t1`.
//
// # Safety
// `model` must be a live handle, `psi0` point to `dim` entries and `out` be writable.
enum FlqStatus flq_propagate(const struct FlqModel *model,
                             const struct FlqComplex *psi0,
                             size_t dim,
                             double t0,
                             double t1,
                             double h,
                             struct FlqOrbit **out);

// # Safety
// `orbit` must be null or a handle from [`flq_propagate`] not yet freed.
void flq_orbit_free(struct FlqOrbit *orbit);

// Number of samples in the orbit.
//
// # Safety
// `orbit` must be a live handle and `out` writable.
enum FlqStatus flq_orbit_len(const struct FlqOrbit *orbit, size_t *out);

// Sample time `t_k`.
//
// # Safety
// `orbit` must be a live handle and `out` writable.
enum FlqStatus flq_orbit_time(const struct FlqOrbit *orbit, size_t k, double *out);

// State `ψ(t_k)` into a buffer of at least `dim` entries.
//
// # Safety
// `orbit` must be a live handle and `out` point to `len` writable entries.
enum FlqStatus flq_orbit_state(const struct FlqOrbit *orbit,
                               size_t k,
                               struct FlqComplex *out,
                               size_t len);

// ε-almost-period scan over shifts up to `tau_max`.
//
// # Safety
// `orbit` must be a live handle and `out` writable.
enum FlqStatus flq_ap_scan(const struct FlqOrbit *orbit,
                           double epsilon,
                           double tau_max,
                           struct FlqApResult *out);

// Run a full scenario document and write its outputs to `out_dir`.
// Returns `DiagnosticFailed` when the run completed but some diagnostic errored.
//
// # Safety
// Both arguments must be NUL-terminated strings.
enum FlqStatus flq_run_config(const char *json, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLOQUET_LAB_H */
