#ifndef OPEN_MARKOV_H
#define OPEN_MARKOV_H

/* generated by cbindgen from crates/capi; do not edit */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum OmpStatus {
  OMP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  OMP_STATUS_NULL_POINTER = 1,
  /**
   * Input text was not valid UTF-8.
   */
  OMP_STATUS_INVALID_UTF8 = 2,
  /**
   * The text failed to parse; the message carries line and column.
   */
  OMP_STATUS_SYNTAX_ERROR = 3,
  /**
   * The document parsed but broke an invariant.
   */
  OMP_STATUS_SEMANTIC_ERROR = 4,
  /**
   * Two processes could not be combined along their boundaries.
   */
  OMP_STATUS_BOUNDARY_MISMATCH = 5,
  /**
   * Any other error from the underlying library.
   */
  OMP_STATUS_INTERNAL_ERROR = 6,
} OmpStatus;

/**
 * An open Markov process together with its document name.
 */
typedef struct OmpProcess OmpProcess;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message left behind by the most recent failing call on this thread.
 * The pointer stays valid until the next failing call on the same thread.
 * Never returns null; before any failure the message is empty.
 */
const char *omp_last_error_message(void);

/**
 * Parses a process document and hands back an owned handle through `out`.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must point to writable
 * memory for one pointer. On success the handle must eventually go back
 * to `omp_process_free`.
 */
enum OmpStatus omp_process_parse(const char *text, struct OmpProcess **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `p` must have come from this library and not been freed before.
 */
void omp_process_free(struct OmpProcess *p);

/**
 * Renders the canonical document for a process. The string goes back to
 * `omp_string_free`.
 *
 * # Safety
 * `p` must be a live handle; `out` must point to writable memory for one
 * pointer.
 */
enum OmpStatus omp_process_print(const struct OmpProcess *p, char **out);

/**
 * Number of internal states, or 0 for a null handle.
 *
 * # Safety
 * `p` must be a live handle or null.
 */
size_t omp_process_n_states(const struct OmpProcess *p);

/**
 * Number of input boundary points, or 0 for a null handle.
 *
 * # Safety
 * `p` must be a live handle or null.
 */
size_t omp_process_n_inputs(const struct OmpProcess *p);

/**
 * Number of output boundary points, or 0 for a null handle.
 *
 * # Safety
 * `p` must be a live handle or null.
 */
size_t omp_process_n_outputs(const struct OmpProcess *p);

/**
 * Glues `a`'s outputs to `b`'s inputs and hands back the composite.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must point to writable memory
 * for one pointer.
 */
enum OmpStatus omp_compose(const struct OmpProcess *a,
                           const struct OmpProcess *b,
                           struct OmpProcess **out);

/**
 * Puts `a` and `b` side by side and hands back the sum.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must point to writable memory
 * for one pointer.
 */
enum OmpStatus omp_tensor(const struct OmpProcess *a,
                          const struct OmpProcess *b,
                          struct OmpProcess **out);

/**
 * Renders the steady-state boundary relation as one line of JSON. The
 * string goes back to `omp_string_free`.
 *
 * # Safety
 * `p` must be a live handle; `out` must point to writable memory for one
 * pointer.
 */
enum OmpStatus omp_black_box_json(const struct OmpProcess *p, char **out);

/**
 * Releases a string produced by this library. Null is ignored.
 *
 * # Safety
 * `s` must have come from this library and not been freed before.
 */
void omp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPEN_MARKOV_H */
