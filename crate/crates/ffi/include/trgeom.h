#ifndef TRGEOM_H
#define TRGEOM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TrgeomStatus {
  TRGEOM_STATUS_OK = 0,
  TRGEOM_STATUS_NULL_POINTER = 1,
  TRGEOM_STATUS_INVALID_ARGUMENT = 2,
  TRGEOM_STATUS_OUT_OF_DOMAIN = 3,
  TRGEOM_STATUS_NOT_CRITICAL = 4,
  TRGEOM_STATUS_NUMERICAL_FAILURE = 5,
  TRGEOM_STATUS_CONFIG = 6,
  TRGEOM_STATUS_IO = 7,
  TRGEOM_STATUS_UNSUPPORTED = 8,
  TRGEOM_STATUS_BUFFER_TOO_SMALL = 9,
  /**
   * A scenario ran but at least one certificate failed.
   */
  TRGEOM_STATUS_CERTIFICATE_FAILED = 10,
  TRGEOM_STATUS_PANIC = 11,
} TrgeomStatus;

/**
 * Opaque Kähler chart.
 */
typedef struct TrgeomChart TrgeomChart;

/**
 * Opaque grid immersion.
 */
typedef struct TrgeomImmersion TrgeomImmersion;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len − 1` bytes). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or valid for `len` writes.
 */
uintptr_t trgeom_last_error(char *buf, uintptr_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *trgeom_version(void);

/**
 * Hex SHA-256 of the convention record (64 bytes plus NUL). Returns the hash length.
 *
 * # Safety
 * `buf` must be null or valid for `len` writes.
 */
uintptr_t trgeom_convention_hash(char *buf, uintptr_t len);

/**
 * Flat `Cⁿ`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum TrgeomStatus trgeom_chart_flat(uintptr_t n, struct TrgeomChart **out);

/**
 * Affine Fubini–Study chart, `K = c log(1 + |z|²)`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum TrgeomStatus trgeom_chart_fubini_study(uintptr_t n, double c, struct TrgeomChart **out);

/**
 * Complex hyperbolic ball, `K = −c log(1 − |z|²)`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum TrgeomStatus trgeom_chart_complex_hyperbolic_ball(uintptr_t n,
                                                       double c,
                                                       struct TrgeomChart **out);

/**
 * Upper half-plane, `K = −c log Im z`; `deck_length > 0` adds the dilation `z ↦ e^ℓ z`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum TrgeomStatus trgeom_chart_upper_half_plane(double c,
                                                double deck_length,
                                                struct TrgeomChart **out);

/**
 * # Safety
 * `chart` must be null or a handle not yet freed.
 */
void trgeom_chart_free(struct TrgeomChart *chart);

/**
 * Complex dimension (0 for a null handle).
 *
 * # Safety
 * `chart` must be null or a live handle.
 */
uintptr_t trgeom_chart_dim(const struct TrgeomChart *chart);

/**
 * `|ρ̄ − λω̄|` at a point given as `2n` interleaved doubles.
 *
 * # Safety
 * `z` must be valid for `2n` reads and `out` for one write.
 */
enum TrgeomStatus trgeom_chart_einstein_defect(const struct TrgeomChart *chart,
                                               const double *z,
                                               double *out);

/**
 * # Safety
 * `radii` must be valid for `dim(chart)` reads and `out` for one write.
 */
enum TrgeomStatus trgeom_immersion_clifford_torus(const struct TrgeomChart *chart,
                                                  const double *radii,
                                                  uintptr_t nodes,
                                                  struct TrgeomImmersion **out);

/**
 * # Safety
 * `out` must be valid for one write.
 */
enum TrgeomStatus trgeom_immersion_circle(const struct TrgeomChart *chart,
                                          double center_re,
                                          double center_im,
                                          double radius,
                                          uintptr_t nodes,
                                          struct TrgeomImmersion **out);

/**
 * The closed geodesic `iy`, `y ∈ [1, e^ℓ]`, of a half-plane chart with a deck dilation.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum TrgeomStatus trgeom_immersion_core_geodesic(const struct TrgeomChart *chart,
                                                 uintptr_t nodes,
                                                 struct TrgeomImmersion **out);

/**
 * Periodic immersion from node positions: `dims[0..ndim]` grid shape,
 * `points` holds `2·n·Π dims` interleaved doubles in node order.
 *
 * # Safety
 * `dims` must be valid for `ndim` reads, `points` for the stated length and
 * `out` for one write.
 */
enum TrgeomStatus trgeom_immersion_from_points(const struct TrgeomChart *chart,
                                               const uintptr_t *dims,
                                               uintptr_t ndim,
                                               const double *points,
                                               struct TrgeomImmersion **out);

/**
 * # Safety
 * `imm` must be null or a handle not yet freed.
 */
void trgeom_immersion_free(struct TrgeomImmersion *imm);

/**
 * Number of grid nodes (0 for a null handle).
 *
 * # Safety
 * `imm` must be null or a live handle.
 */
uintptr_t trgeom_immersion_len(const struct TrgeomImmersion *imm);

/**
 * Real dimension of the immersed manifold (0 for a null handle).
 *
 * # Safety
 * `imm` must be null or a live handle.
 */
uintptr_t trgeom_immersion_dim(const struct TrgeomImmersion *imm);

/**
 * Riemannian and J-volumes.
 *
 * # Safety
 * `vol_g` and `vol_j` must be valid for one write each.
 */
enum TrgeomStatus trgeom_immersion_volumes(const struct TrgeomImmersion *imm,
                                           double *vol_g,
                                           double *vol_j);

/**
 * Maslov form, axis-major (`xi[a·len + node]`), and its sup norm.
 *
 * # Safety
 * `xi` must be valid for `xi_len` writes and `sup_norm` for one write (or null).
 */
enum TrgeomStatus trgeom_maslov_form(const struct TrgeomImmersion *imm,
                                     double *xi,
                                     uintptr_t xi_len,
                                     double *sup_norm);

/**
 * `L̃ f` on a J-minimal immersion; `f` and `out` hold one value per node.
 *
 * # Safety
 * `f` and `out` must be valid for `len` reads / writes.
 */
enum TrgeomStatus trgeom_ltilde_apply(const struct TrgeomImmersion *imm,
                                      const double *f,
                                      double *out,
                                      uintptr_t len);

/**
 * The `k` smallest resolved eigenvalues of `L̃`, ascending.
 *
 * # Safety
 * `out` must be valid for `k` writes.
 */
enum TrgeomStatus trgeom_ltilde_spectrum(const struct TrgeomImmersion *imm,
                                         uintptr_t k,
                                         double *out);

/**
 * Run a scenario (config path or bundled name) and write its report into
 * `out_dir`. Returns `CertificateFailed` if it ran but did not certify.
 *
 * # Safety
 * `config` and `out_dir` must be NUL-terminated strings.
 */
enum TrgeomStatus trgeom_run_scenario(const char *config, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRGEOM_H */
