#ifndef KACBENCH_H
#define KACBENCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KbStatus {
  KB_STATUS_OK = 0,
  KB_STATUS_NULL_POINTER = 1,
  KB_STATUS_INVALID_UTF8 = 2,
  KB_STATUS_INVALID_ARGUMENT = 3,
  /**
   * A search budget ran out before a value was found.
   */
  KB_STATUS_ABSTAINED = 4,
  KB_STATUS_PANIC = 5,
} KbStatus;

/**
 * A tabulated allocation together with its system and target.
 */
typedef struct KbAllocation KbAllocation;

/**
 * A finite probability-preserving action.
 */
typedef struct KbSystem KbSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *kb_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void kb_string_free(char *s);

/**
 * `Z` acting on `0..n` by `x -> x + 1 mod n` with uniform masses.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum KbStatus kb_system_cycle(size_t n, struct KbSystem **out);

/**
 * A finite system from a group name such as `"Z^2"` or `"C4xC3"`.
 *
 * `generators` holds one permutation of `0..n_points` per group factor,
 * row after row. `masses` holds `n_points` rational strings such as
 * `"1/3"`, or is null for uniform masses.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `out` for writes.
 */
enum KbStatus kb_system_new(const char *group,
                            size_t n_points,
                            const char *const *masses,
                            const size_t *generators,
                            struct KbSystem **out);

/**
 * # Safety
 * `sys` must come from a constructor and not have been freed; null is ignored.
 */
void kb_system_free(struct KbSystem *sys);

/**
 * Number of points, or 0 for a null handle.
 *
 * # Safety
 * `sys` must be null or a live handle.
 */
size_t kb_system_n_points(const struct KbSystem *sys);

/**
 * # Safety
 * `sys` must be a live handle and `out` valid for writes.
 */
enum KbStatus kb_system_is_ergodic(const struct KbSystem *sys, bool *out);

/**
 * Integral over the target of the return time, as `"num/den"`, for a
 * `Z`-action. `holds` is set when it equals 1.
 *
 * # Safety
 * `points` must hold `len` indices; outputs must be valid for writes.
 * Free `*integral` with [`kb_string_free`].
 */
enum KbStatus kb_classical_kac(const struct KbSystem *sys,
                               const size_t *points,
                               size_t len,
                               char **integral,
                               bool *holds);

/**
 * Greedy allocation onto the target along the standard enumeration.
 *
 * # Safety
 * `points` must hold `len` indices and `out` be valid for writes.
 */
enum KbStatus kb_allocation_greedy(const struct KbSystem *sys,
                                   const size_t *points,
                                   size_t len,
                                   uint64_t budget,
                                   struct KbAllocation **out);

/**
 * # Safety
 * `alloc` must come from a constructor and not have been freed; null is ignored.
 */
void kb_allocation_free(struct KbAllocation *alloc);

/**
 * Writes the coordinates of `kappa(x)` into `coords` and their count into
 * `out_len`. When `cap` is too small only `out_len` is written and the
 * call fails with `InvalidArgument`.
 *
 * # Safety
 * `coords` must hold `cap` values; `out_len` must be valid for writes.
 */
enum KbStatus kb_allocation_kappa(const struct KbAllocation *alloc,
                                  size_t x,
                                  int64_t *coords,
                                  size_t cap,
                                  size_t *out_len);

/**
 * `|B(x)|`, zero off the target.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum KbStatus kb_allocation_cell_size(const struct KbAllocation *alloc, size_t x, size_t *out);

/**
 * Both sides of the transport identity for `f` as a JSON object
 * `{"lhs": "n/d", "rhs": "n/d", "equal": bool}`. `f` holds one value per
 * point, written as rationals or `"inf"`.
 *
 * # Safety
 * `f` must hold one string per point; `out_json` must be valid for writes.
 * Free `*out_json` with [`kb_string_free`].
 */
enum KbStatus kb_allocation_identity(const struct KbAllocation *alloc,
                                     const char *const *f,
                                     size_t len,
                                     char **out_json);

/**
 * Runs a workbench command (`"verify-kac"`, `"census"`, ...) on a TOML
 * config and returns the JSON report body. `exit_code` receives the code
 * the command-line tool would exit with. Config errors fail with
 * `InvalidArgument`; an abstaining run returns `Abstained` with the body
 * still written.
 *
 * # Safety
 * Strings must be NUL-terminated; outputs must be valid for writes.
 * Free `*out_json` with [`kb_string_free`].
 */
enum KbStatus kb_run_command(const char *command,
                             const char *config_toml,
                             char **out_json,
                             int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KACBENCH_H */
