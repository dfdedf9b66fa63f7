#ifndef KDVCURVES_H
#define KDVCURVES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/* All fallible calls return a KcStatus; see kc_last_error_message(). */

// Result code of every fallible call.
typedef enum KcStatus {
  KC_STATUS_OK = 0,
  // A required pointer argument was null.
  KC_STATUS_NULL_POINTER = 1,
  // Bad grid size, length, non-finite sample, or malformed configuration.
  KC_STATUS_INVALID_ARGUMENT = 2,
  // An antiderivative was requested of a function with non-zero mean.
  KC_STATUS_NON_ZERO_MEAN = 3,
  // A tangent vector violates its linearized constraint or level set.
  KC_STATUS_NOT_TANGENT = 4,
  KC_STATUS_UNSUPPORTED_ORDER = 5,
  // The curvature does not close up into a periodic curve.
  KC_STATUS_NOT_CLOSED = 6,
  // Samples do not describe a valid curve of the requested geometry.
  KC_STATUS_INVALID_CURVE = 7,
  KC_STATUS_STABILITY = 8,
  KC_STATUS_BLOWUP = 9,
  KC_STATUS_CONSTRAINT_DRIFT = 10,
  // A group element or constraint system is degenerate.
  KC_STATUS_DEGENERATE = 11,
  KC_STATUS_IO = 12,
  KC_STATUS_PANIC = 13,
} KcStatus;

// Geometry selector for flows and Hamiltonians.
typedef enum KcGeometry {
  // Equicentroaffine curvature, KdV hierarchy.
  KC_GEOMETRY_ECA = 0,
  // Euclidean curvature, mKdV hierarchy.
  KC_GEOMETRY_EUCLIDEAN = 1,
} KcGeometry;

// Closed curve with `det(γ, γ_s) = 1`.
typedef struct KcEcaCurve KcEcaCurve;

// Closed unit-speed curve.
typedef struct KcEucCurve KcEucCurve;

// Real periodic field sampled on a uniform grid of `[0, 2π)`.
typedef struct KcField KcField;

// Result of a curvature flow run.
typedef struct KcTrajectory KcTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or null if the last
// call succeeded. The pointer stays valid until the next `kc_*` call on the
// same thread.
const char *kc_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *kc_version(void);

// Create a field from `n` samples at `s_j = 2πj/n`. `n` must be even and ≥ 8.
//
// # Safety
// `samples` must point to `n` readable doubles; `out` must be writable.
enum KcStatus kc_field_new(size_t n, const double *samples, struct KcField **out);

// # Safety
// `f` must be null or a handle from this library, not yet freed.
void kc_field_free(struct KcField *f);

// Number of samples, or 0 for a null handle.
//
// # Safety
// `f` must be null or a live handle.
size_t kc_field_len(const struct KcField *f);

// Copy the samples into `out`, which must hold exactly `kc_field_len(f)` values.
//
// # Safety
// `f` must be a live handle; `out` must point to `len` writable doubles.
enum KcStatus kc_field_copy(const struct KcField *f, double *out, size_t len);

// Conserved quantity `H_m` (`m` = 1, 2, 3) of a curvature in the given geometry.
//
// # Safety
// `kappa` must be a live handle; `out` must be writable.
enum KcStatus kc_hamiltonian(const struct KcField *kappa,
                             enum KcGeometry geometry,
                             size_t m,
                             double *out);

// Presymplectic form `ω_k(α₁, α₂)` at curvature `kappa` on equicentroaffine
// tangents. For `k ≥ 2` the second tangent must be tangent to the level set
// through `kappa`.
//
// # Safety
// All handles must be live and on one grid; `out` must be writable.
enum KcStatus kc_omega(const struct KcField *kappa,
                       const struct KcField *alpha1,
                       const struct KcField *alpha2,
                       size_t k,
                       double *out);

// Miura curvature `κ̂²/4 + iκ̂_s/2`, returned as real and imaginary parts.
//
// # Safety
// `kappa_hat` must be a live handle; both out-pointers must be writable.
enum KcStatus kc_miura_curvature(const struct KcField *kappa_hat,
                                 struct KcField **out_re,
                                 struct KcField **out_im);

// Equicentroaffine curve from `n` samples of each coordinate; validated
// against `det(γ, γ_s) = 1` to `det_tol`.
//
// # Safety
// `x` and `y` must each point to `n` doubles; `out` must be writable.
enum KcStatus kc_eca_curve_new(size_t n,
                               const double *x,
                               const double *y,
                               double det_tol,
                               struct KcEcaCurve **out);

// Reconstruct the closed curve with curvature `kappa` (solving Hill's
// equation); `KC_STATUS_NOT_CLOSED` if the monodromy misses the identity by more
// than `closure_tol`.
//
// # Safety
// `kappa` must be a live handle; `out` must be writable.
enum KcStatus kc_eca_curve_from_curvature(const struct KcField *kappa,
                                          double closure_tol,
                                          struct KcEcaCurve **out);

// # Safety
// `c` must be a live handle; `out` must be writable.
enum KcStatus kc_eca_curve_curvature(const struct KcEcaCurve *c, struct KcField **out);

// Copy the coordinates into `x` and `y`, each holding `len` = point count values.
//
// # Safety
// `c` must be a live handle; `x` and `y` must each point to `len` doubles.
enum KcStatus kc_eca_curve_copy(const struct KcEcaCurve *c, double *x, double *y, size_t len);

// # Safety
// `c` must be null or a live handle.
void kc_eca_curve_free(struct KcEcaCurve *c);

// Unit-speed curve from `n` samples of each coordinate; validated against
// `|γ̂_s| = 1` to `speed_tol`.
//
// # Safety
// `x` and `y` must each point to `n` doubles; `out` must be writable.
enum KcStatus kc_euc_curve_new(size_t n,
                               const double *x,
                               const double *y,
                               double speed_tol,
                               struct KcEucCurve **out);

// Integrate the turning angle of `kappa_hat`; `KC_STATUS_NOT_CLOSED` if the result
// does not close within `closure_tol` or winds a non-integer number of times.
//
// # Safety
// `kappa_hat` must be a live handle; `out` must be writable.
enum KcStatus kc_euc_curve_from_curvature(const struct KcField *kappa_hat,
                                          double closure_tol,
                                          struct KcEucCurve **out);

// # Safety
// `c` must be a live handle; `out` must be writable.
enum KcStatus kc_euc_curve_curvature(const struct KcEucCurve *c, struct KcField **out);

// # Safety
// `c` must be a live handle; `x` and `y` must each point to `len` doubles.
enum KcStatus kc_euc_curve_copy(const struct KcEucCurve *c, double *x, double *y, size_t len);

// # Safety
// `c` must be null or a live handle.
void kc_euc_curve_free(struct KcEucCurve *c);

// Evolve a curvature under the `n`-th KdV (`KC_GEOMETRY_ECA`) or mKdV
// (`KC_GEOMETRY_EUCLIDEAN`) flow. `stiff` selects the integrating-factor
// scheme with dealiasing; otherwise classical RK4. A snapshot is kept every
// `record_every` steps (0 keeps only the endpoints).
//
// # Safety
// `kappa0` must be a live handle; `out` must be writable.
enum KcStatus kc_evolve(const struct KcField *kappa0,
                        enum KcGeometry geometry,
                        size_t n,
                        double t_final,
                        double dt,
                        bool stiff,
                        size_t record_every,
                        struct KcTrajectory **out);

// Number of stored snapshots, or 0 for a null handle.
//
// # Safety
// `t` must be null or a live handle.
size_t kc_trajectory_len(const struct KcTrajectory *t);

// Time and curvature of snapshot `index`.
//
// # Safety
// `t` must be a live handle; out-pointers must be writable.
enum KcStatus kc_trajectory_snapshot(const struct KcTrajectory *t,
                                     size_t index,
                                     double *time,
                                     struct KcField **out);

// Largest relative drift of `H_m` (`m` = 1, 2, 3) over the run.
//
// # Safety
// `t` must be a live handle; `out` must be writable.
enum KcStatus kc_trajectory_drift(const struct KcTrajectory *t, size_t m, double *out);

// # Safety
// `t` must be null or a live handle.
void kc_trajectory_free(struct KcTrajectory *t);

// Run the identity check suites described by a JSON config (the same
// document the `check` command reads) and return the JSON report through
// `out_json`, to be released with [`kc_string_free`]. `all_pass` receives
// whether every check passed. Relative file references resolve against
// `base_dir`, or the working directory when it is null.
//
// # Safety
// `config_json` and `base_dir` (if non-null) must be NUL-terminated UTF-8;
// out-pointers must be writable.
enum KcStatus kc_run_checks(const char *config_json,
                            const char *base_dir,
                            char **out_json,
                            bool *all_pass);

// Release a string returned by this library.
//
// # Safety
// `s` must be null or a string from this library, not yet freed.
void kc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KDVCURVES_H */
