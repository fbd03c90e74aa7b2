#ifndef PNET_H
#define PNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PnetStatus {
  PNET_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  PNET_STATUS_NULL_POINTER = 1,
  /**
   * Input text was not valid UTF-8.
   */
  PNET_STATUS_INVALID_UTF8 = 2,
  /**
   * The net description did not parse or validate.
   */
  PNET_STATUS_PARSE = 3,
  /**
   * An enum argument was out of range or a request is inconsistent.
   */
  PNET_STATUS_INVALID_ARGUMENT = 4,
  /**
   * A sequence or state limit was reached.
   */
  PNET_STATUS_LIMIT_EXCEEDED = 5,
  /**
   * The result does not fit the output type.
   */
  PNET_STATUS_OVERFLOW = 6,
  /**
   * A bug: the library panicked.
   */
  PNET_STATUS_INTERNAL = 7,
} PnetStatus;

typedef enum PnetSemantics {
  PNET_SEMANTICS_SET = 0,
  PNET_SEMANTICS_MAXIMAL = 1,
  PNET_SEMANTICS_INTERLEAVED = 2,
} PnetSemantics;

typedef enum PnetResetMode {
  PNET_RESET_MODE_CONTENTION = 0,
  PNET_RESET_MODE_STANDARD = 1,
} PnetResetMode;

typedef enum PnetDialect {
  /**
   * `#sum[..]` aggregates and pooled `num/1` literals.
   */
  PNET_DIALECT_LEGACY = 0,
  /**
   * `#sum{..}` aggregates accepted by current solvers.
   */
  PNET_DIALECT_CLINGO = 1,
} PnetDialect;

/**
 * A validated net with its initial marking. Opaque to C.
 */
typedef struct PnetNet PnetNet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or null if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *pnet_last_error(void);

/**
 * Parses a net description (`place`, `trans`, `arc`, ... lines).
 *
 * # Safety
 * `text` is a nul-terminated string; `out` is writable.
 */
enum PnetStatus pnet_net_parse(const char *text, struct PnetNet **out);

/**
 * Releases a net. Null is ignored.
 *
 * # Safety
 * `net` is null or was returned by [`pnet_net_parse`] and not yet freed.
 */
void pnet_net_free(struct PnetNet *net);

/**
 * Number of places and transitions.
 *
 * # Safety
 * `net` is a live handle; `places` and `transitions` are writable.
 */
enum PnetStatus pnet_net_counts(const struct PnetNet *net, size_t *places, size_t *transitions);

/**
 * Number of execution sequences with firings at steps `0..=steps`.
 * Fails with [`PnetStatus::Overflow`] when the count exceeds `u64`; use
 * [`pnet_count_sequences_decimal`] for exact large counts.
 *
 * # Safety
 * `net` is a live handle; `out` is writable.
 */
enum PnetStatus pnet_count_sequences(const struct PnetNet *net,
                                     uint32_t steps,
                                     uint32_t semantics,
                                     uint32_t reset_mode,
                                     uint64_t *out);

/**
 * Like [`pnet_count_sequences`] but writes the exact count as a decimal
 * string to be freed with [`pnet_string_free`].
 *
 * # Safety
 * `net` is a live handle; `out` is writable.
 */
enum PnetStatus pnet_count_sequences_decimal(const struct PnetNet *net,
                                             uint32_t steps,
                                             uint32_t semantics,
                                             uint32_t reset_mode,
                                             char **out);

/**
 * Every execution sequence as a JSON document
 * `{"semantics", "reset_mode", "k", "sequences": [{"firings", "markings"}]}`.
 * `max_sequences` of 0 means no limit; otherwise exceeding it fails with
 * [`PnetStatus::LimitExceeded`].
 *
 * # Safety
 * `net` is a live handle; `out` is writable.
 */
enum PnetStatus pnet_sequences_json(const struct PnetNet *net,
                                    uint32_t steps,
                                    uint32_t semantics,
                                    uint32_t reset_mode,
                                    uint64_t max_sequences,
                                    char **out);

/**
 * A token bound covering every count reachable within `steps` steps.
 *
 * # Safety
 * `net` is a live handle; `out` is writable.
 */
enum PnetStatus pnet_suggest_ntok(const struct PnetNet *net, uint32_t steps, uint64_t *out);

/**
 * The answer-set program simulating the net, at the lowest encoding level
 * that covers its arc kinds.
 *
 * # Safety
 * `net` is a live handle; `out` is writable.
 */
enum PnetStatus pnet_emit_asp(const struct PnetNet *net,
                              uint32_t steps,
                              uint32_t semantics,
                              uint32_t reset_mode,
                              uint64_t ntok,
                              uint32_t dialect,
                              char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` is null or was returned by this library and not yet freed.
 */
void pnet_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PNET_H */
