#ifndef SPDIFF_H
#define SPDIFF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Zero is success.
typedef enum SpdiffStatus {
  SPDIFF_STATUS_OK = 0,
  SPDIFF_STATUS_NULL_POINTER = 1,
  SPDIFF_STATUS_INVALID_UTF8 = 2,
  SPDIFF_STATUS_CONFIG = 3,
  SPDIFF_STATUS_INVALID_ARGUMENT = 4,
  SPDIFF_STATUS_GUARD = 5,
  SPDIFF_STATUS_NUMERICAL = 6,
  SPDIFF_STATUS_PANIC = 7,
} SpdiffStatus;

// Opaque scenario handle.
typedef struct SpdiffScenario SpdiffScenario;

// Polynomial coefficients of the differential and mean detuning, constant term first.
typedef struct SpdiffDetuningCoefficients {
  double differential[4];
  double mean[4];
  double laser_frequency;
} SpdiffDetuningCoefficients;

// Row-major complex 2×2 matrix in (e, g) order.
typedef struct SpdiffMatrix2 {
  double re[4];
  double im[4];
} SpdiffMatrix2;

typedef struct SpdiffPhaseBudget {
  double phi0;
  double phi_dm;
  double phi_ep;
  double phi_md;
  double phi_wv;
  double total;
  bool chirp_perfect;
} SpdiffPhaseBudget;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version string of the engine, static and NUL-terminated.
const char *spdiff_version(void);

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length without the NUL.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t spdiff_last_error(char *buf, size_t len);

// Parses and resolves a TOML scenario. On success `*out` owns a handle that
// must be released with [`spdiff_scenario_free`].
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be writable.
enum SpdiffStatus spdiff_scenario_from_toml(const char *toml, struct SpdiffScenario **out_handle);

// Releases a handle. Null is ignored.
//
// # Safety
// `h` must come from [`spdiff_scenario_from_toml`] and not be used afterwards.
void spdiff_scenario_free(struct SpdiffScenario *h);

// Switches guard violations between warnings (false) and errors (true).
//
// # Safety
// `h` must be a live handle.
enum SpdiffStatus spdiff_scenario_set_strict(struct SpdiffScenario *h, bool strict);

// Pulse duration and nominal final momentum of the e → g output.
//
// # Safety
// `h` must be a live handle; outputs must be writable.
enum SpdiffStatus spdiff_scenario_pulse(const struct SpdiffScenario *h,
                                        double *duration,
                                        double *final_momentum);

// Laser frequency that makes momentum `p_r` resonant.
//
// # Safety
// `h` must be a live handle; `result` must be writable.
enum SpdiffStatus spdiff_resonant_laser_frequency(const struct SpdiffScenario *h,
                                                  double p_r,
                                                  double *result);

// Detuning polynomial at the Heisenberg starting point (z, p).
//
// # Safety
// `h` must be a live handle; `result` must be writable.
enum SpdiffStatus spdiff_detuning_coefficients(const struct SpdiffScenario *h,
                                               double z,
                                               double p,
                                               struct SpdiffDetuningCoefficients *result);

// Weights η_j and ξ_j of the j-th detuning coefficient at pulse area φ_t.
//
// # Safety
// Outputs must be writable.
enum SpdiffStatus spdiff_dyson_coefficients(size_t j, double phi, double *eta, double *xi);

// First-order pulse propagator in the Heisenberg frame for a pulse of length `t`.
//
// # Safety
// `h` must be a live handle; `result` must be writable.
enum SpdiffStatus spdiff_propagate_heisenberg(const struct SpdiffScenario *h,
                                              double z,
                                              double p,
                                              double t,
                                              struct SpdiffMatrix2 *result);

// Closed-form mirror phase budget of the scenario's packets at final momentum `p`.
//
// # Safety
// `h` must be a live handle; `result` must be writable.
enum SpdiffStatus spdiff_phase_budget(const struct SpdiffScenario *h,
                                      double p,
                                      double t,
                                      struct SpdiffPhaseBudget *result);

// Mirror phase from the propagator evaluated on the packet centres.
//
// # Safety
// `h` must be a live handle; `result` must be writable.
enum SpdiffStatus spdiff_mirror_phase(const struct SpdiffScenario *h,
                                      double p,
                                      double t,
                                      double *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPDIFF_H */
