#ifndef GHZANON_H
#define GHZANON_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GhzStatus {
  GHZ_STATUS_OK = 0,
  GHZ_STATUS_NULL_POINTER = 1,
  GHZ_STATUS_INVALID_ARGUMENT = 2,
  GHZ_STATUS_ODD_AGENT_COUNT = 3,
  GHZ_STATUS_DIMENSION_MISMATCH = 4,
  GHZ_STATUS_TOO_LARGE = 5,
  GHZ_STATUS_INVALID_NOISE = 6,
  GHZ_STATUS_SOURCE_EXHAUSTED = 7,
  GHZ_STATUS_NUMERICAL = 8,
  GHZ_STATUS_IO = 9,
  GHZ_STATUS_BUFFER_TOO_SMALL = 10,
  GHZ_STATUS_PANIC = 11,
} GhzStatus;

/**
 * Opaque network of agents sharing a (possibly noisy) GHZ source.
 */
typedef struct GhzNetwork GhzNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent call on this thread, or NULL if that call
 * succeeded. Valid until the next library call on the same thread.
 */
const char *ghz_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ghz_version(void);

/**
 * Creates a network of `n` agents with security parameter `s`. The source
 * emits the GHZ state with probability `1 - delta` and otherwise a state from
 * the `(n-3)` eigenspace of the Bell operator.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum GhzStatus ghz_network_new(size_t n,
                               size_t s,
                               uint64_t seed,
                               double delta,
                               struct GhzNetwork **out);

/**
 * # Safety
 * `net` must be NULL or a handle from [`ghz_network_new`] not yet freed.
 */
void ghz_network_free(struct GhzNetwork *net);

/**
 * Runs the parity protocol on `len` input bits; the parity is written to `out_y`.
 *
 * # Safety
 * `net` must be a live handle, `inputs` must point to `len` bytes and `out_y`
 * must be writable.
 */
enum GhzStatus ghz_network_run_parity(struct GhzNetwork *net,
                                      const uint8_t *inputs,
                                      size_t len,
                                      uint8_t *out_y);

/**
 * Runs the anonymous logical OR; the result is written to `out_v`.
 *
 * # Safety
 * As for [`ghz_network_run_parity`].
 */
enum GhzStatus ghz_network_run_logical_or(struct GhzNetwork *net,
                                          const uint8_t *inputs,
                                          size_t len,
                                          uint8_t *out_v);

/**
 * Runs collision detection on `len` wish bits; `out_v` receives 0, 1 or 2.
 *
 * # Safety
 * As for [`ghz_network_run_parity`].
 */
enum GhzStatus ghz_network_run_collision_detection(struct GhzNetwork *net,
                                                   const uint8_t *wish_bits,
                                                   size_t len,
                                                   uint8_t *out_v);

/**
 * Runs entanglement generation with the strict verification policy.
 * `out_success` is 1 when an EPR pair was produced, in which case
 * `out_fidelity` holds its fidelity to `(|00> + |11>)/sqrt(2)` (0 otherwise).
 *
 * # Safety
 * `net` must be a live handle; every output pointer must be writable.
 */
enum GhzStatus ghz_network_run_aeg(struct GhzNetwork *net,
                                   size_t sender,
                                   size_t receiver,
                                   uint64_t max_repetitions,
                                   uint8_t *out_success,
                                   double *out_fidelity,
                                   uint64_t *out_repetitions);

/**
 * # Safety
 * `lo` and `hi` must be writable.
 */
enum GhzStatus ghz_parity_success_bounds(size_t n, double epsilon, double *lo, double *hi);

/**
 * # Safety
 * `lo` and `hi` must be writable.
 */
enum GhzStatus ghz_fidelity_deficit_bounds(double epsilon, size_t n, double *lo, double *hi);

/**
 * # Safety
 * `out` must be writable.
 */
enum GhzStatus ghz_theorem2_bound(size_t n, size_t s, double epsilon, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum GhzStatus ghz_theorem3_bound(size_t k, double epsilon, double *out);

/**
 * Brute-force local-realistic maximum of the Bell operator.
 *
 * # Safety
 * `out` must be writable.
 */
enum GhzStatus ghz_lr_max(size_t n, int64_t *out);

/**
 * Writes the `2^n` eigenvalues of the Bell operator in descending order into
 * `buf`. `written` receives the count; if `cap` is too small nothing is
 * copied, `written` receives the required size and the status is
 * `BufferTooSmall`.
 *
 * # Safety
 * `buf` must be valid for `cap` doubles and `written` must be writable.
 */
enum GhzStatus ghz_bell_spectrum(size_t n, double *buf, size_t cap, size_t *written);

/**
 * Runs an experiment described by a JSON plan and returns its JSON-lines
 * report in `out_report` (free with [`ghz_string_free`]). `out_pass` is 1 when
 * every check passed.
 *
 * # Safety
 * `plan_json` must be a NUL-terminated string; the output pointers must be writable.
 */
enum GhzStatus ghz_run_experiment_json(const char *plan_json, char **out_report, uint8_t *out_pass);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, freed at most once.
 */
void ghz_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GHZANON_H */
