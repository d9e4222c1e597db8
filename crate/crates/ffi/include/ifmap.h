#ifndef IFMAP_H
#define IFMAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum IfmapStatus {
  IFMAP_STATUS_OK = 0,
  IFMAP_STATUS_NULL_POINTER = 1,
  IFMAP_STATUS_INVALID_ARGUMENT = 2,
  IFMAP_STATUS_DIMENSION_MISMATCH = 3,
  IFMAP_STATUS_NOT_CONVERGED = 4,
  IFMAP_STATUS_INVALID_SCENARIO = 5,
  IFMAP_STATUS_PARSE_ERROR = 6,
  IFMAP_STATUS_IO_ERROR = 7,
  IFMAP_STATUS_UNDEFINED = 8,
  IFMAP_STATUS_PANIC = 9,
} IfmapStatus;

// Norm selector for [`ifmap_solve_canonical`].
typedef enum IfmapNorm {
  IFMAP_NORM_L1 = 0,
  IFMAP_NORM_LINF = 1,
} IfmapNorm;

// Opaque mapping handle.
typedef struct IfmapMapping IfmapMapping;

// Opaque network scenario handle.
typedef struct IfmapScenario IfmapScenario;

// Solver settings; pass NULL wherever a pointer is accepted to use defaults.
typedef struct IfmapSolverOptions {
  double tol;
  size_t max_iter;
} IfmapSolverOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *ifmap_last_error(void);

// Library version as a static NUL-terminated string.
const char *ifmap_version(void);

// `x -> Xx + u` with `X` given row-major as `n*n` values.
//
// # Safety
// `matrix` must point to `n*n` readable doubles, `offset` to `n`, and `out`
// to writable storage for one handle pointer.
enum IfmapStatus ifmap_mapping_affine_new(size_t n,
                                          const double *matrix,
                                          const double *offset,
                                          struct IfmapMapping **out);

// The two-dimensional `(ln(1+x2) + alpha x1 + 0.1, sqrt(x1+x2+1))` mapping.
//
// # Safety
// `out` must point to writable storage for one handle pointer.
enum IfmapStatus ifmap_mapping_log_sqrt_new(double alpha, struct IfmapMapping **out);

// # Safety
// `m` must be NULL or a handle returned by this library and not yet freed.
void ifmap_mapping_free(struct IfmapMapping *m);

// Dimension of the mapping, or 0 for a NULL handle.
//
// # Safety
// `m` must be NULL or a live handle.
size_t ifmap_mapping_dim(const struct IfmapMapping *m);

// Evaluates the mapping at `x` into `out`; both buffers hold `n` doubles.
//
// # Safety
// `m` must be a live handle; `x` and `out` must point to `n` doubles.
enum IfmapStatus ifmap_mapping_eval(const struct IfmapMapping *m,
                                    const double *x,
                                    size_t n,
                                    double *out);

// Spectral radius of the asymptotic mapping. `exact` is set to 1 when the
// value is certified and 0 when only an upper bound is known.
//
// # Safety
// `m` must be a live handle; `rho` and `exact` must be writable; `opts`
// may be NULL.
enum IfmapStatus ifmap_spectral_radius(const struct IfmapMapping *m,
                                       const struct IfmapSolverOptions *opts,
                                       double *rho,
                                       int *exact);

// Fixed-point existence. `verdict` is 1 (exists), 0 (does not exist) or
// -1 (too close to the boundary to decide).
//
// # Safety
// `m` must be a live handle; `verdict` and `rho` must be writable; `opts`
// may be NULL.
enum IfmapStatus ifmap_has_fixed_point(const struct IfmapMapping *m,
                                       const struct IfmapSolverOptions *opts,
                                       int *verdict,
                                       double *rho);

// Fixed point by plain iteration from the origin. On divergence `exists`
// is 0 and `out` is left untouched.
//
// # Safety
// `m` must be a live handle; `out` must point to `n` doubles; `exists`
// must be writable; `opts` may be NULL.
enum IfmapStatus ifmap_fixed_point(const struct IfmapMapping *m,
                                   const struct IfmapSolverOptions *opts,
                                   double *out,
                                   size_t n,
                                   int *exists);

// Max-min utility at `budget`: writes the optimal power into `power` (`n`
// doubles) and the utility into `utility`.
//
// # Safety
// `m` must be a live handle; `power` must point to `n` doubles; `utility`
// must be writable; `opts` may be NULL.
enum IfmapStatus ifmap_solve_canonical(const struct IfmapMapping *m,
                                       enum IfmapNorm norm,
                                       double budget,
                                       const struct IfmapSolverOptions *opts,
                                       double *power,
                                       size_t n,
                                       double *utility);

// Parses a scenario document from a NUL-terminated JSON string.
//
// # Safety
// `json` must be a valid NUL-terminated string; `out` must be writable.
enum IfmapStatus ifmap_scenario_from_json(const char *json, struct IfmapScenario **out);

// Loads a scenario document from a file.
//
// # Safety
// `path` must be a valid NUL-terminated string; `out` must be writable.
enum IfmapStatus ifmap_scenario_load(const char *path, struct IfmapScenario **out);

// # Safety
// `s` must be NULL or a handle returned by this library and not yet freed.
void ifmap_scenario_free(struct IfmapScenario *s);

// Number of base stations, or 0 for a NULL handle.
//
// # Safety
// `s` must be NULL or a live handle.
size_t ifmap_scenario_num_bs(const struct IfmapScenario *s);

// Load mapping of the scenario; the capped variant when `capped` is nonzero.
//
// # Safety
// `s` must be a live handle; `out` must be writable.
enum IfmapStatus ifmap_scenario_load_mapping(const struct IfmapScenario *s,
                                             int capped,
                                             struct IfmapMapping **out);

// Power mapping of the scenario at full load on every base station.
//
// # Safety
// `s` must be a live handle; `out` must be writable.
enum IfmapStatus ifmap_scenario_power_mapping(const struct IfmapScenario *s,
                                              struct IfmapMapping **out);

// Coupling matrix, row-major, into `out` of length `num_bs * num_bs`.
//
// # Safety
// `s` must be a live handle; `out` must point to `len` doubles.
enum IfmapStatus ifmap_coupling_matrix(const struct IfmapScenario *s, double *out, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IFMAP_H */
