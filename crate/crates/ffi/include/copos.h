#ifndef COPOS_H
#define COPOS_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CoposStatus {
  COPOS_STATUS_OK = 0,
  COPOS_STATUS_NULL_POINTER = 1,
  COPOS_STATUS_INVALID_ARGUMENT = 2,
  COPOS_STATUS_PARSE = 3,
  COPOS_STATUS_DIMENSION_MISMATCH = 4,
  COPOS_STATUS_RESOURCE_CAP = 5,
  COPOS_STATUS_SOLVER_UNKNOWN = 6,
  COPOS_STATUS_PRECONDITION = 7,
  COPOS_STATUS_IO = 8,
  COPOS_STATUS_PANIC = 9,
} CoposStatus;

/**
 * Three-valued answer of membership and copositivity queries.
 */
typedef enum CoposVerdict {
  COPOS_VERDICT_YES = 0,
  COPOS_VERDICT_NO = 1,
  COPOS_VERDICT_UNKNOWN = 2,
} CoposVerdict;

typedef struct CoposCertificate CoposCertificate;

typedef struct CoposGraph CoposGraph;

typedef struct CoposMatrix CoposMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static string.
 */
const char *copos_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *copos_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void copos_string_free(char *s);

/**
 * Parses a graph from JSON or DIMACS text.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum CoposStatus copos_graph_parse(const char *text, struct CoposGraph **out);

/**
 * Builds a named family member, e.g. `("cycle", [5], 1)`.
 *
 * # Safety
 * `params` must point to `nparams` values (or be null when `nparams` is 0).
 */
enum CoposStatus copos_graph_family(const char *name,
                                    const size_t *params,
                                    size_t nparams,
                                    struct CoposGraph **out);

/**
 * # Safety
 * `g` must be null or a handle from this library, not yet freed.
 */
void copos_graph_free(struct CoposGraph *g);

/**
 * # Safety
 * `g` must be a live handle.
 */
enum CoposStatus copos_graph_order(const struct CoposGraph *g, size_t *out);

/**
 * # Safety
 * `g` must be a live handle.
 */
enum CoposStatus copos_graph_alpha(const struct CoposGraph *g, size_t *out);

/**
 * JSON form of the graph; free with `copos_string_free`.
 *
 * # Safety
 * `g` must be a live handle.
 */
enum CoposStatus copos_graph_to_json(const struct CoposGraph *g, char **out);

/**
 * Symmetric matrix from `n*n` row-major entries.
 *
 * # Safety
 * `data` must point to `n*n` doubles.
 */
enum CoposStatus copos_matrix_new(size_t n, const double *data, struct CoposMatrix **out);

/**
 * `t(A_G + I) − J`, with `t = α(G)` when `t` is NaN.
 *
 * # Safety
 * `g` must be a live handle.
 */
enum CoposStatus copos_matrix_from_graph(const struct CoposGraph *g,
                                         double t,
                                         struct CoposMatrix **out);

/**
 * Horn matrix.
 *
 * # Safety
 * `out` must be writable.
 */
enum CoposStatus copos_matrix_horn(struct CoposMatrix **out);

/**
 * # Safety
 * `m` must be null or a handle from this library, not yet freed.
 */
void copos_matrix_free(struct CoposMatrix *m);

/**
 * # Safety
 * `m` must be a live handle.
 */
enum CoposStatus copos_matrix_dim(const struct CoposMatrix *m, size_t *out);

/**
 * Writes entry `(i, j)`.
 *
 * # Safety
 * `m` must be a live handle.
 */
enum CoposStatus copos_matrix_get(const struct CoposMatrix *m, size_t i, size_t j, double *out);

/**
 * Tests `M + margin·I` against the named cone (`Q`, `Qtilde`, `K`, `C`,
 * `Ctilde`, `Q0`) at level `r`. When `cert_out` is non-null and the answer
 * is `Yes`, a certificate handle is stored there (null otherwise).
 *
 * # Safety
 * `cone` must be a NUL-terminated string and `m` a live handle.
 */
enum CoposStatus copos_membership(const char *cone,
                                  const struct CoposMatrix *m,
                                  uint32_t r,
                                  double margin,
                                  enum CoposVerdict *verdict_out,
                                  struct CoposCertificate **cert_out);

/**
 * Exact 5×5 copositivity test up to `margin`.
 *
 * # Safety
 * `m` must be a live handle.
 */
enum CoposStatus copos_cop5(const struct CoposMatrix *m, double margin, enum CoposVerdict *out);

/**
 * Bound of the named hierarchy (`nu`, `nutilde`, `zeta`, `zetatilde`,
 * `theta`) at level `r`. `value_out` may receive +inf; `verified_out`, when
 * non-null, receives 1 when no probe was inconclusive.
 *
 * # Safety
 * `hierarchy` must be a NUL-terminated string and `g` a live handle.
 */
enum CoposStatus copos_bound(const char *hierarchy,
                             const struct CoposGraph *g,
                             uint32_t r,
                             double t_tol,
                             double *value_out,
                             int32_t *verified_out);

/**
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum CoposStatus copos_certificate_from_json(const char *text, struct CoposCertificate **out);

/**
 * # Safety
 * `c` must be a live handle.
 */
enum CoposStatus copos_certificate_to_json(const struct CoposCertificate *c, char **out);

/**
 * # Safety
 * `c` must be null or a handle from this library, not yet freed.
 */
void copos_certificate_free(struct CoposCertificate *c);

/**
 * Checks a certificate against `m`. `pass_out` receives 1 or 0; the
 * residual goes to `residual_out` when non-null.
 *
 * # Safety
 * `m` and `c` must be live handles.
 */
enum CoposStatus copos_verify(const struct CoposMatrix *m,
                              const struct CoposCertificate *c,
                              double tol,
                              int32_t *pass_out,
                              double *residual_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COPOS_H */
