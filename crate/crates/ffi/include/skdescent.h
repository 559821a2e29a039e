#ifndef SKDESCENT_H
#define SKDESCENT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum SkStatus {
  SK_STATUS_OK = 0,
  SK_STATUS_NULL_POINTER = 1,
  SK_STATUS_INVALID_ARGUMENT = 2,
  SK_STATUS_DIMENSION_MISMATCH = 3,
  SK_STATUS_SIZE_LIMIT = 4,
  SK_STATUS_IO = 5,
  SK_STATUS_PANIC = 6,
  SK_STATUS_INTERNAL = 7,
} SkStatus;

// Coupling matrix handle.
typedef struct SkInstance SkInstance;

// Dynamics state handle (spins, local fields, energy, flip count).
typedef struct SkState SkState;

// Seeded random stream handle.
typedef struct SkStream SkStream;

typedef struct SkRunRecord {
  uint64_t flips;
  double final_energy_per_spin;
  bool converged;
  uint64_t start_seed;
} SkRunRecord;

// Protocol summary. `tau*` are meaningful only when `has_tau`, `h_n*` only
// when `has_h_n`.
typedef struct SkEnergyStats {
  uint64_t n;
  double lambda;
  uint32_t nreal;
  uint64_t starts_or_budget;
  uint64_t runs;
  bool has_tau;
  double tau;
  double tau_stderr;
  bool has_h_n;
  double h_n;
  double h_n_stderr;
  uint64_t truncated_runs;
  uint64_t discarded_runs;
  uint64_t flagged_realizations;
} SkEnergyStats;

typedef struct SkScalingFit {
  double lambda;
  double exponent;
  double prefactor;
  double r_squared;
  uint64_t sizes_used;
  uint64_t sizes_excluded;
} SkScalingFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer is
// valid until the next call into this library on the same thread.
const char *sk_last_error_message(void);

// Library version, a static NUL-terminated string.
const char *sk_version(void);

// Identifier of the instance generator, a static NUL-terminated string.
const char *sk_generator_version(void);

// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum SkStatus sk_instance_generate(size_t n, uint64_t seed, struct SkInstance **out);

// Builds an instance from the strict upper triangle in row-major order
// (`n * (n - 1) / 2` values).
//
// # Safety
// `upper` must point to `len` readable doubles; `out` must be writable.
enum SkStatus sk_instance_from_upper(size_t n,
                                     const double *upper,
                                     size_t len,
                                     struct SkInstance **out);

// # Safety
// `inst` must be NULL or a handle from this library not yet freed.
void sk_instance_free(struct SkInstance *inst);

// Number of spins, or 0 for NULL.
//
// # Safety
// `inst` must be NULL or a live handle.
size_t sk_instance_size(const struct SkInstance *inst);

// # Safety
// `inst` must be a live handle; `out` must be writable.
enum SkStatus sk_instance_coupling(const struct SkInstance *inst, size_t i, size_t j, double *out);

// Total energy `H` of `spins`.
//
// # Safety
// `spins` must point to `len` readable bytes; `out` must be writable.
enum SkStatus sk_energy(const struct SkInstance *inst,
                        const int8_t *spins,
                        size_t len,
                        double *out);

// # Safety
// As [`sk_energy`].
enum SkStatus sk_is_one_flip_stable(const struct SkInstance *inst,
                                    const int8_t *spins,
                                    size_t len,
                                    bool *out);

// Exhaustive ground state (n <= 24). `out_spins` may be NULL; otherwise it
// receives one minimizer (spin 0 = +1) and `spins_len` must equal n.
//
// # Safety
// Non-NULL pointers must be valid for the documented sizes.
enum SkStatus sk_ground_state(const struct SkInstance *inst,
                              double *out_energy_per_spin,
                              uint64_t *out_stable_states,
                              int8_t *out_spins,
                              size_t spins_len);

// New ChaCha8 stream; never NULL.
struct SkStream *sk_stream_new(uint64_t seed);

// # Safety
// `stream` must be NULL or a live handle.
void sk_stream_free(struct SkStream *stream);

// Uniform random configuration into `out_spins[0..n]`.
//
// # Safety
// `stream` must be live; `out_spins` must hold `n` bytes.
enum SkStatus sk_random_config(struct SkStream *stream, size_t n, int8_t *out_spins);

// One draw of the move depth `D <= 0`.
//
// # Safety
// `stream` must be live; `out` must be writable.
enum SkStatus sk_sample_depth(struct SkStream *stream, double lambda_value, double *out);

// Index of the negative entry of `spectrum` closest to `depth`, or -1.
//
// # Safety
// `spectrum` must point to `len` doubles (may be NULL when `len == 0`).
enum SkStatus sk_select_site(const double *spectrum, size_t len, double depth, int64_t *out_site);

// Runs one trajectory from `spins0`. `out_spins` (nullable) receives the
// endpoint and must have `len` bytes.
//
// # Safety
// Pointers must be valid for the documented sizes.
enum SkStatus sk_run_trajectory(const struct SkInstance *inst,
                                const int8_t *spins0,
                                size_t len,
                                double lambda_value,
                                struct SkStream *stream,
                                uint64_t max_flips,
                                struct SkRunRecord *out_record,
                                int8_t *out_spins);

// # Safety
// `inst` must be live; `spins` must hold `len` bytes; `out` writable.
enum SkStatus sk_state_new(const struct SkInstance *inst,
                           const int8_t *spins,
                           size_t len,
                           struct SkState **out);

// # Safety
// `state` must be NULL or a live handle.
void sk_state_free(struct SkState *state);

// One move of the dynamics. `out_site` receives the flipped site, or -1
// when the state is already 1-spin-flip stable.
//
// # Safety
// `state` must have been created from `inst`; all pointers live.
enum SkStatus sk_state_step(struct SkState *state,
                            const struct SkInstance *inst,
                            double lambda_value,
                            struct SkStream *stream,
                            int64_t *out_site);

// # Safety
// `state` and `inst` must be live and match in size.
enum SkStatus sk_state_apply_flip(struct SkState *state,
                                  const struct SkInstance *inst,
                                  size_t site);

// Total energy of the state, NaN for NULL.
//
// # Safety
// `state` must be NULL or live.
double sk_state_energy(const struct SkState *state);

// Flips applied so far, 0 for NULL.
//
// # Safety
// `state` must be NULL or live.
uint64_t sk_state_flips(const struct SkState *state);

// Copies `dE_i = s_i h_i` into `out[0..len]`; `len` must equal n.
//
// # Safety
// `out` must hold `len` doubles.
enum SkStatus sk_state_delta_spectrum(const struct SkState *state, double *out, size_t len);

// # Safety
// `state` must be live; `out_spins` must hold `len` bytes.
enum SkStatus sk_state_spins(const struct SkState *state, int8_t *out_spins, size_t len);

// Fixed-restart protocol on Gaussian instances seeded from `instance_seed`.
//
// # Safety
// `out` must be writable.
enum SkStatus sk_protocol_fixed_starts(size_t n,
                                       double lambda_value,
                                       uint32_t starts,
                                       uint32_t nreal,
                                       uint64_t instance_seed,
                                       uint64_t seed,
                                       struct SkEnergyStats *out);

// Fixed-restart protocol repeated on one given instance.
//
// # Safety
// `inst` must be live; `out` writable.
enum SkStatus sk_protocol_fixed_starts_instance(const struct SkInstance *inst,
                                                double lambda_value,
                                                uint32_t starts,
                                                uint32_t nreal,
                                                uint64_t seed,
                                                struct SkEnergyStats *out);

// Fixed-budget protocol on Gaussian instances seeded from `instance_seed`.
//
// # Safety
// `out` must be writable.
enum SkStatus sk_protocol_fixed_budget(size_t n,
                                       double lambda_value,
                                       uint64_t flip_budget,
                                       uint32_t nreal,
                                       uint64_t instance_seed,
                                       uint64_t seed,
                                       struct SkEnergyStats *out);

// Least-squares power law over `(sizes[k], taus[k])`, leaving out sizes in
// `exclude` (may be NULL when `exclude_len == 0`).
//
// # Safety
// `sizes` and `taus` must hold `len` elements, `exclude` `exclude_len`.
enum SkStatus sk_fit_scaling(double lambda_value,
                             const size_t *sizes,
                             const double *taus,
                             size_t len,
                             const size_t *exclude,
                             size_t exclude_len,
                             struct SkScalingFit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKDESCENT_H */
