#ifndef HOMRATE_H
#define HOMRATE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define HR_PROFILE_PAPER 0

#define HR_PROFILE_EXPERIMENTS 1

#define HR_METHOD_FORMULA 0

#define HR_METHOD_GAME 1

#define HR_METHOD_PDE 2

#define HR_RATE_GAME_UPPER 0

#define HR_RATE_GAME_LOWER 1

#define HR_RATE_PDE 2

typedef enum HrStatus {
  HR_STATUS_OK = 0,
  HR_STATUS_INVALID_ARGUMENT = 1,
  HR_STATUS_PRECONDITION = 2,
  HR_STATUS_NON_FINITE = 3,
  HR_STATUS_POLICY_INVARIANT = 4,
  HR_STATUS_MOMENTUM_OVERFLOW = 5,
  HR_STATUS_NOT_CONVEX = 6,
  HR_STATUS_PARSE = 7,
  HR_STATUS_IO = 8,
  HR_STATUS_AUDIT_FAILED = 9,
  HR_STATUS_NULL_POINTER = 10,
  HR_STATUS_PANIC = 11,
} HrStatus;

/**
 * A grid function, e.g. the solution of the oscillatory problem.
 */
typedef struct HrField HrField;

/**
 * An example game (planar or spatial) with its bump profile.
 */
typedef struct HrGame HrGame;

/**
 * Values across ε with their log-log fit.
 */
typedef struct HrRateReport HrRateReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes of the last error message on this thread, including the
 * terminating NUL; 0 if there is none.
 */
size_t hr_last_error_length(void);

/**
 * Copies the last error message into `buf` (at most `len` bytes, always
 * NUL-terminated when `len > 0`). Returns the number of bytes copied,
 * excluding the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t hr_last_error_message(char *buf, size_t len);

/**
 * Creates the planar (`dim = 2`) or spatial (`dim = 3`) example.
 *
 * # Safety
 * `out` must point to writable storage for a handle.
 */
enum HrStatus hr_game_new(uint32_t dim, int32_t profile_code, struct HrGame **out);

/**
 * # Safety
 * `game` must be null or a handle from [`hr_game_new`] not yet freed.
 */
void hr_game_free(struct HrGame *game);

/**
 * Dimension of the game, 0 for a null handle.
 *
 * # Safety
 * `game` must be null or a live handle.
 */
uint32_t hr_game_dim(const struct HrGame *game);

/**
 * Closed-form `H(x, p)`; `x` and `p` hold `hr_game_dim` values each.
 *
 * # Safety
 * `game` must be a live handle; `x`, `p` must point to `dim` values and
 * `out` to a writable double.
 */
enum HrStatus hr_game_hamiltonian(const struct HrGame *game,
                                  const double *x,
                                  const double *p,
                                  double *out);

/**
 * Min-max (upper) and max-min (lower) Hamiltonians by grid search with
 * `res` points per action axis.
 *
 * # Safety
 * As for [`hr_game_hamiltonian`], with two output pointers.
 */
enum HrStatus hr_game_oracle(const struct HrGame *game,
                             const double *x,
                             const double *p,
                             size_t res,
                             double *out_upper,
                             double *out_lower);

/**
 * Upper value estimate of the planar game from the origin on `[0, horizon]`
 * with step `ε/200` against the baseline Player II family.
 *
 * # Safety
 * `out` must point to a writable double.
 */
enum HrStatus hr_upper_value(int32_t profile_code,
                             double eps,
                             double horizon,
                             uint64_t seed,
                             double *out);

/**
 * Lower value estimate against the adversarial control, minimised over the
 * baseline Player I family.
 *
 * # Safety
 * `out` must point to a writable double.
 */
enum HrStatus hr_lower_value(int32_t profile_code, double eps, double horizon, double *out);

/**
 * `max_i h(p_i)` with `h(γ) = max(0, 400|γ| - 200)`.
 *
 * # Safety
 * `p` must point to three values and `out` to a writable double.
 */
enum HrStatus hr_hbar_formula(const double *p, double *out);

/**
 * Estimate of the effective Hamiltonian of the spatial example.
 * `resolution` is the torus size for the PDE method and ignored otherwise.
 *
 * # Safety
 * `p` must point to three values; outputs must be writable.
 */
enum HrStatus hr_hbar_estimate(const double *p,
                               int32_t method,
                               int32_t profile_code,
                               double horizon,
                               size_t resolution,
                               uint64_t seed,
                               double *out_value,
                               double *out_residual);

/**
 * Solves the planar oscillatory problem from `min(|x₁|, 1)` with `n2`
 * nodes per ε-cell and `x₁` spacing `h1` on `[-(2 + 3T), 2 + 3T]`.
 *
 * # Safety
 * `out_field` must point to storage for a handle, `out_value` to a double.
 */
enum HrStatus hr_solve_micro(int32_t profile_code,
                             double eps,
                             double horizon,
                             size_t n2,
                             double h1,
                             struct HrField **out_field,
                             double *out_value);

/**
 * # Safety
 * `field` must be null or a live handle.
 */
void hr_field_free(struct HrField *field);

/**
 * Number of nodes, 0 for a null handle.
 *
 * # Safety
 * `field` must be null or a live handle.
 */
size_t hr_field_len(const struct HrField *field);

/**
 * Copies the row-major nodal values; `len` must equal [`hr_field_len`].
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum HrStatus hr_field_copy_values(const struct HrField *field, double *buf, size_t len);

/**
 * Multilinear interpolation at `x` (`dim` coordinates).
 *
 * # Safety
 * `x` must point to `dim` values and `out` to a writable double.
 */
enum HrStatus hr_field_interpolate(const struct HrField *field,
                                   const double *x,
                                   size_t dim,
                                   double *out);

/**
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string.
 */
enum HrStatus hr_field_write_binary(const struct HrField *field, const char *path_ptr);

/**
 * Runs a rate sweep over `n_eps` values of ε with the default settings of
 * the chosen method.
 *
 * # Safety
 * `eps` must point to `n_eps` values and `out` to storage for a handle.
 */
enum HrStatus hr_rate_sweep(int32_t method,
                            int32_t profile_code,
                            const double *eps,
                            size_t n_eps,
                            uint64_t seed,
                            struct HrRateReport **out);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
void hr_report_free(struct HrRateReport *report);

/**
 * Number of `(ε, value)` pairs, 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t hr_report_len(const struct HrRateReport *report);

/**
 * Pair `i`, ε descending.
 *
 * # Safety
 * Outputs must be writable doubles.
 */
enum HrStatus hr_report_pair(const struct HrRateReport *report,
                             size_t i,
                             double *eps,
                             double *value);

/**
 * Fitted log-log slope and R².
 *
 * # Safety
 * Outputs must be writable doubles.
 */
enum HrStatus hr_report_fit(const struct HrRateReport *report, double *slope, double *r_squared);

/**
 * Writes the CSV and, if `svg_path` is not null, the log-log plot.
 *
 * # Safety
 * Paths must be NUL-terminated UTF-8 strings (`svg_path` may be null).
 */
enum HrStatus hr_report_write(const struct HrRateReport *report,
                              const char *csv_path,
                              const char *svg_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOMRATE_H */
