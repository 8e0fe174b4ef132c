#ifndef HJNET_H
#define HJNET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HjnetStatus {
  HJNET_STATUS_OK = 0,
  HJNET_STATUS_NULL_POINTER = 1,
  HJNET_STATUS_INVALID_UTF8 = 2,
  HJNET_STATUS_PARSE_ERROR = 3,
  HJNET_STATUS_INVALID_GRAPH = 4,
  HJNET_STATUS_INVALID_MODEL = 5,
  HJNET_STATUS_DIMENSION_MISMATCH = 6,
  HJNET_STATUS_UNKNOWN_ID = 7,
  HJNET_STATUS_DOMAIN_ERROR = 8,
  HJNET_STATUS_BUDGET_EXCEEDED = 9,
  HJNET_STATUS_NUMERICAL_FAILURE = 10,
  HJNET_STATUS_PANIC = 11,
} HjnetStatus;

/**
 * Opaque model: a base graph with its edge Hamiltonians.
 */
typedef struct HjnetModel HjnetModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hjnet_version(void);

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *hjnet_last_error_message(void);

/**
 * Builds a model from graph and Hamiltonian JSON. Release with
 * `hjnet_model_free`.
 *
 * # Safety
 * The strings must be NUL-terminated; `out` must be writable.
 */
enum HjnetStatus hjnet_model_from_json(const char *graph_json,
                                       const char *hamiltonians_json,
                                       struct HjnetModel **out);

/**
 * # Safety
 * `model` must come from `hjnet_model_from_json` and not be used afterwards.
 */
void hjnet_model_free(struct HjnetModel *model);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum HjnetStatus hjnet_betti(const struct HjnetModel *model, size_t *out);

/**
 * `a₀`, the largest edge critical value.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum HjnetStatus hjnet_critical_value(const struct HjnetModel *model, double *out);

/**
 * θ of an edge (positive or `.rev`) written to `out[0..len]`, `len` = betti.
 *
 * # Safety
 * `model` must be a live handle; `edge_id` NUL-terminated; `out` holds `len` values.
 */
enum HjnetStatus hjnet_theta(const struct HjnetModel *model,
                             const char *edge_id,
                             int64_t *out,
                             size_t len);

/**
 * `H̄(p)`.
 *
 * # Safety
 * `model` must be a live handle; `p` holds `len` values; `out` must be writable.
 */
enum HjnetStatus hjnet_effective_hamiltonian(const struct HjnetModel *model,
                                             const double *p,
                                             size_t len,
                                             double *out);

/**
 * Mather's `β(h)`.
 *
 * # Safety
 * `model` must be a live handle; `h` holds `len` values; `out` must be writable.
 */
enum HjnetStatus hjnet_beta(const struct HjnetModel *model,
                            const double *h,
                            size_t len,
                            double *out);

/**
 * Dual minimal action from `(from, 0)` to `(to, h)` in time `t`.
 *
 * # Safety
 * `model` must be a live handle; ids NUL-terminated; `h` holds `len` values;
 * `out` must be writable.
 */
enum HjnetStatus hjnet_min_action(const struct HjnetModel *model,
                                  const char *from,
                                  const char *to,
                                  double t,
                                  const int64_t *h,
                                  size_t len,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HJNET_H */
