#ifndef BESQ_H
#define BESQ_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum BesqStatus {
  BESQ_STATUS_OK = 0,
  BESQ_STATUS_NULL_POINTER = 1,
  BESQ_STATUS_BUFFER_TOO_SMALL = 2,
  BESQ_STATUS_INVALID_PARAMETER = 3,
  BESQ_STATUS_PRECONDITION = 4,
  BESQ_STATUS_OVERFLOW = 5,
  BESQ_STATUS_NOT_REAL_ROOTED = 6,
  BESQ_STATUS_NOT_PSD = 7,
  BESQ_STATUS_NON_FINITE = 8,
  BESQ_STATUS_CONSTRUCTION = 9,
  BESQ_STATUS_PANIC = 10,
} BesqStatus;

typedef enum BesqBoundary {
  BESQ_BOUNDARY_LOCAL_DIMENSION = 0,
  BESQ_BOUNDARY_FREE = 1,
} BesqBoundary;

/**
 * Opaque simulated path.
 */
typedef struct BesqPath BesqPath;

/**
 * Time grid and tolerances. Fill with [`besq_grid_default`] and adjust.
 */
typedef struct BesqGrid {
  double t_end;
  double dt;
  uint32_t substep_cap;
  double tol_coll;
  double tol_zero;
  enum BesqBoundary boundary;
} BesqGrid;

/**
 * Classification verdicts. `n_star` is -1 and `nonneg_exists` is -1 where
 * they do not apply.
 */
typedef struct BesqClassification {
  int64_t n_star;
  size_t rk_plus;
  size_t rk_minus;
  size_t rk;
  bool unique_strong;
  bool reflected;
  int32_t nonneg_exists;
} BesqClassification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message (NUL-terminated,
 * truncated to `cap`) and returns its full length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes.
 */
size_t besq_last_error_message(char *buf, size_t cap);

/**
 * Grid with the library's default tolerances and substep cap.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum BesqStatus besq_grid_default(double t_end, double dt, struct BesqGrid *out);

/**
 * # Safety
 * `out` must be null or valid for writes.
 */
enum BesqStatus besq_n_star(size_t p, int64_t alpha, size_t *out);

/**
 * Classifies the ordered start `x[0..p]`.
 *
 * # Safety
 * `x` must point to `p` readable values and `out` must be valid for writes.
 */
enum BesqStatus besq_classify(size_t p,
                              double alpha,
                              const double *x,
                              struct BesqClassification *out);

/**
 * Writes `e_1, ..., e_p` of `x[0..p]` (any order) to `out`.
 *
 * # Safety
 * `x` must point to `p` readable values, `out` to `cap` writable ones.
 */
enum BesqStatus besq_elementary(size_t p, const double *x, double *out, size_t cap);

/**
 * Ordered roots of the polynomial with elementary coordinates `e[0..p]`
 * (`e_1, ..., e_p`).
 *
 * # Safety
 * `e` must point to `p` readable values, `out` to `cap` writable ones.
 */
enum BesqStatus besq_roots(size_t p, const double *e, double *out, size_t cap);

/**
 * `E[e_n(t)]` for `n = 1..p` from `e0[0..p]`; needs `alpha >= p - 1`.
 *
 * # Safety
 * `e0` must point to `p` readable values, `out` to `cap` writable ones.
 */
enum BesqStatus besq_moment_curve(size_t p,
                                  double alpha,
                                  const double *e0,
                                  double t,
                                  double *out,
                                  size_t cap);

/**
 * Simulates the particle system from the ordered start `x0[0..p]`.
 *
 * # Safety
 * `x0` must point to `p` readable values, `grid` must be valid and `out`
 * valid for writes. The handle written to `out` is owned by the caller.
 */
enum BesqStatus besq_simulate_particles(size_t p,
                                        double alpha,
                                        const double *x0,
                                        const struct BesqGrid *grid,
                                        uint64_t seed,
                                        uint32_t replicate,
                                        struct BesqPath **out);

/**
 * Simulates the elementary symmetric coordinates from `e0[0..p]`.
 *
 * # Safety
 * As for [`besq_simulate_particles`].
 */
enum BesqStatus besq_simulate_polys(size_t p,
                                    double alpha,
                                    const double *e0,
                                    const struct BesqGrid *grid,
                                    uint64_t seed,
                                    uint32_t replicate,
                                    struct BesqPath **out);

/**
 * Number of recorded time points, 0 for a null handle.
 *
 * # Safety
 * `path` must be null or a live handle.
 */
size_t besq_path_len(const struct BesqPath *path);

/**
 * Number of particles, 0 for a null handle.
 *
 * # Safety
 * `path` must be null or a live handle.
 */
size_t besq_path_dim(const struct BesqPath *path);

/**
 * Whether the path reached the grid horizon.
 *
 * # Safety
 * `path` must be null or a live handle.
 */
bool besq_path_completed(const struct BesqPath *path);

/**
 * Copies all recorded times.
 *
 * # Safety
 * `path` must be a live handle and `out` point to `cap` writable values.
 */
enum BesqStatus besq_path_times(const struct BesqPath *path, double *out, size_t cap);

/**
 * Copies the particles at time index `k` (recovered roots for a polynomial
 * path).
 *
 * # Safety
 * `path` must be a live handle and `out` point to `cap` writable values.
 */
enum BesqStatus besq_path_particles(const struct BesqPath *path, size_t k, double *out, size_t cap);

/**
 * Releases a path handle; null is ignored.
 *
 * # Safety
 * `path` must be null or a handle not freed before.
 */
void besq_path_free(struct BesqPath *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BESQ_H */
