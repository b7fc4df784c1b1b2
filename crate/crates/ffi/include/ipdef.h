#ifndef IPDEF_H
#define IPDEF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes returned by every fallible call.
 */
typedef enum IpdefStatus {
  IPDEF_STATUS_OK = 0,
  IPDEF_STATUS_NULL_POINTER = 1,
  IPDEF_STATUS_INVALID_UTF8 = 2,
  IPDEF_STATUS_INVALID_ARGUMENT = 3,
  IPDEF_STATUS_NOT_FOUND = 4,
  IPDEF_STATUS_PANIC = 5,
} IpdefStatus;

/**
 * Outcome of a zeta verification.
 */
typedef enum IpdefZetaOutcome {
  IPDEF_ZETA_OUTCOME_PASS = 0,
  IPDEF_ZETA_OUTCOME_FAIL = 1,
  IPDEF_ZETA_OUTCOME_EXPECTED_FAIL = 2,
  IPDEF_ZETA_OUTCOME_UNEXPECTED_PASS = 3,
} IpdefZetaOutcome;

/**
 * Closures of all subsets of R+ for one class.
 */
typedef struct IpdefClosure IpdefClosure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread; empty if none. Valid until the next call.
 */
const char *ipdef_last_error(void);

/**
 * Number of relations in R+.
 */
uint32_t ipdef_relation_count(void);

/**
 * Bit position of the R+ relation named `name`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out_bit` writable.
 */
enum IpdefStatus ipdef_relation_bit(const char *name, uint32_t *out_bit);

/**
 * Static NUL-terminated name of the relation at `bit`, or null if out of range.
 */
const char *ipdef_relation_name(uint32_t bit);

/**
 * Build the closure cache for `class_name` ("lin", "den", "dis" or "unb") from the bundled rules.
 *
 * # Safety
 * `class_name` must be a NUL-terminated string and `out` writable.
 */
enum IpdefStatus ipdef_closure_new(const char *class_name, struct IpdefClosure **out);

/**
 * Release a handle from [`ipdef_closure_new`]. Null is ignored.
 *
 * # Safety
 * `handle` must come from [`ipdef_closure_new`] and not be used afterwards.
 */
void ipdef_closure_free(struct IpdefClosure *handle);

/**
 * Closure of the relation set `set`.
 *
 * # Safety
 * `handle` must be live and `out` writable.
 */
enum IpdefStatus ipdef_closure_apply(const struct IpdefClosure *handle,
                                     uint16_t set,
                                     uint16_t *out);

/**
 * Whether `set` defines the relation at bit `target`.
 *
 * # Safety
 * `handle` must be live and `out` writable.
 */
enum IpdefStatus ipdef_closure_defines(const struct IpdefClosure *handle,
                                       uint16_t set,
                                       uint32_t target,
                                       bool *out);

/**
 * Verify the bundled zeta specification `id`.
 *
 * # Safety
 * `id` must be a NUL-terminated string and `out` writable.
 */
enum IpdefStatus ipdef_zeta_verify(const char *id,
                                   uint64_t samples,
                                   uint64_t seed,
                                   enum IpdefZetaOutcome *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IPDEF_H */
