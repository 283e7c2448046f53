/* C interface to the ncclab network-coding laboratory. */

#pragma once

/* Generated with cbindgen:0.29.4 */

/* Generated from the Rust sources by cbindgen; edit those instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Zero is success; anything else names the
 * failure family and leaves a detailed message in `ncc_last_error_message`.
 */
typedef enum NccStatus {
  NCC_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  NCC_STATUS_NULL_ARGUMENT = 1,
  /**
   * Malformed caller data: bad UTF-8, out-of-range values, zero sizes.
   */
  NCC_STATUS_INVALID_INPUT = 2,
  /**
   * Text in one of the line-oriented file formats failed to parse.
   */
  NCC_STATUS_PARSE_ERROR = 3,
  /**
   * Parameters outside the mathematical domain: composite modulus,
   * missing root of unity, adaptive structure, oversized search space.
   */
  NCC_STATUS_DOMAIN_ERROR = 4,
  /**
   * The computation itself failed or found an inconsistency.
   */
  NCC_STATUS_COMPUTE_ERROR = 5,
  /**
   * A bug: an internal panic was caught at the boundary.
   */
  NCC_STATUS_INTERNAL_ERROR = 6,
} NccStatus;

/**
 * An optimal concurrent-flow solution for one network.
 */
typedef struct NccFlowSolution NccFlowSolution;

/**
 * A parsed capacitated network with its source-target pairs.
 */
typedef struct NccNetwork NccNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; never freed by the caller.
 */
const char *ncc_version(void);

/**
 * Message describing this thread's most recent failure. Valid until the
 * next failing call on the same thread; never freed by the caller.
 */
const char *ncc_last_error_message(void);

/**
 * Releases a string obtained from any `char **` out-parameter. NULL is a
 * no-op.
 */
void ncc_string_free(char *s);

/**
 * Parses the line-oriented network format (`network <directed|undirected>
 * <vertices> <edges> <pairs>` header, then `e u v cap` and `p s t`
 * records) into a new handle.
 */
enum NccStatus ncc_network_parse(const char *text, struct NccNetwork **out);

/**
 * Renders a network back into the file format it was parsed from. The
 * output round-trips: parsing it reproduces the network exactly.
 */
enum NccStatus ncc_network_render(const struct NccNetwork *net, char **out);

/**
 * Writes the vertex, edge, and pair counts of a network. Any of the three
 * destinations may be NULL to skip it.
 */
enum NccStatus ncc_network_counts(const struct NccNetwork *net,
                                  uintptr_t *vertices,
                                  uintptr_t *edges,
                                  uintptr_t *pairs);

/**
 * Whether the network's edges are one-directional. Returns false for a
 * NULL handle.
 */
bool ncc_network_is_directed(const struct NccNetwork *net);

/**
 * Copies a network, dropping edge orientations; capacities and pairs are
 * kept.
 */
enum NccStatus ncc_network_undirect(const struct NccNetwork *net, struct NccNetwork **out);

/**
 * Releases a network handle. NULL is a no-op.
 */
void ncc_network_free(struct NccNetwork *net);

/**
 * Solves the maximum concurrent multicommodity flow on the network and
 * returns the solution as a new handle.
 */
enum NccStatus ncc_flow_rate(const struct NccNetwork *net, struct NccFlowSolution **out);

/**
 * The concurrent flow rate: the largest r shipped by every commodity
 * simultaneously. NaN for a NULL handle.
 */
double ncc_flow_solution_rate(const struct NccFlowSolution *sol);

/**
 * Largest conservation or capacity residual of the solution. NaN for a
 * NULL handle.
 */
double ncc_flow_solution_max_violation(const struct NccFlowSolution *sol);

/**
 * Per-arc flows as `commodity,u,v,flow` CSV text.
 */
enum NccStatus ncc_flow_solution_csv(const struct NccFlowSolution *sol, char **out);

/**
 * Releases a flow solution handle. NULL is a no-op.
 */
void ncc_flow_solution_free(struct NccFlowSolution *sol);

/**
 * Exhaustively searches scalar coding schemes up to `max_rate_bits` bits
 * per message (at most 2) and writes the best achievable rate in bits;
 * zero means even one bit is undeliverable.
 */
enum NccStatus ncc_coding_search_best_bits(const struct NccNetwork *net,
                                           uint32_t max_rate_bits,
                                           uint32_t *out_bits);

/**
 * Runs the coding-rate search, the directed flow LP, and the undirected
 * comparison, and returns the combined report as a JSON document.
 */
enum NccStatus ncc_gap_report_json(const struct NccNetwork *net,
                                   uint32_t max_rate_bits,
                                   char **out);

/**
 * Evaluates (or, with `inverse`, interpolates) a length-`len` vector over
 * GF(`p`) at the canonical order-`len` root of unity, writing `len` values
 * to `out`. Requires `len` to divide `p - 1` and all inputs below `p`.
 */
enum NccStatus ncc_ffft(uint64_t p,
                        const uint64_t *values,
                        uintptr_t len,
                        bool inverse,
                        uint64_t *out);

/**
 * Compiles the block inverter with parameters (`n`, `t`) into its layered
 * network, prunes at out-degree `q*t`, buckets a permutation census
 * (exhaustive for n <= 8, else `samples` draws seeded by `seed`; 0 picks a
 * default), replays the selected bucket, and returns the audit report as a
 * JSON document.
 */
enum NccStatus ncc_inversion_audit_json(uintptr_t n,
                                        uintptr_t t,
                                        uintptr_t q,
                                        double epsilon,
                                        uintptr_t samples,
                                        uint64_t seed,
                                        char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
