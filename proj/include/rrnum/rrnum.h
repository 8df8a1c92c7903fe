/*
 * rrnum — utility-optimal scheduling over partially observable Markov ON/OFF
 * channels: achievable-region computation, the QRRNUM frame controller and a
 * slotted Monte Carlo simulator.
 *
 * Conventions
 *   - Every fallible call returns rrnum_status; RRNUM_OK is 0. On failure the
 *     calling thread's last error message is available via rrnum_last_error().
 *   - Objects are opaque handles created by *_create / *_load / *_run calls and
 *     released by the matching *_destroy (which accepts NULL).
 *   - Vectors are caller-owned arrays of length N (the channel count) unless
 *     stated otherwise.
 *   - Subsets are 64-bit masks; bit 0 is channel 1.
 *   - Strings are copied into caller buffers: pass buf = NULL or a too-small
 *     capacity to learn the required size (including the terminator) through
 *     *needed; the call then returns RRNUM_E_INVALID_ARGUMENT only if buf was
 *     non-NULL and too small.
 */
#ifndef RRNUM_RRNUM_H
#define RRNUM_RRNUM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RRNUM_API __declspec(dllexport)
#else
#define RRNUM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rrnum_status {
    RRNUM_OK = 0,
    RRNUM_E_INVALID_ARGUMENT = 1,
    RRNUM_E_CONFIG = 2,
    RRNUM_E_CAP_EXCEEDED = 3,
    RRNUM_E_FEASIBILITY = 4,
    RRNUM_E_NONCONCAVE = 5,
    RRNUM_E_IO = 6,
    RRNUM_E_NUMERIC = 7,
    RRNUM_E_INTERNAL = 8
} rrnum_status;

typedef enum rrnum_region_kind { RRNUM_REGION_FULL = 0, RRNUM_REGION_PAIRS = 1 } rrnum_region_kind;

typedef enum rrnum_membership {
    RRNUM_INSIDE = 0,
    RRNUM_BOUNDARY = 1,
    RRNUM_OUTSIDE = 2
} rrnum_membership;

typedef enum rrnum_mode {
    RRNUM_MODE_EXHAUSTIVE = 0,
    RRNUM_MODE_SYMMETRIC_FAST = 1,
    RRNUM_MODE_PAIRS_ONLY = 2
} rrnum_mode;

typedef enum rrnum_format { RRNUM_FORMAT_CSV = 0, RRNUM_FORMAT_JSON = 1 } rrnum_format;

typedef enum rrnum_stability {
    RRNUM_STABLE = 0,
    RRNUM_UNSTABLE = 1,
    RRNUM_INCONCLUSIVE = 2
} rrnum_stability;

typedef struct rrnum_channels rrnum_channels;
typedef struct rrnum_region rrnum_region;
typedef struct rrnum_utility rrnum_utility;
typedef struct rrnum_config rrnum_config;
typedef struct rrnum_run rrnum_run;

/* ---- library ---------------------------------------------------------- */

RRNUM_API const char* rrnum_version(void);
RRNUM_API const char* rrnum_status_string(rrnum_status status);
/* Message of the last failed call on this thread ("" if none). */
RRNUM_API const char* rrnum_last_error(void);

/* ---- channels --------------------------------------------------------- */

/* One (p01, p10) pair per channel; requires 0 < p < 1 and p01 + p10 < 1. */
RRNUM_API rrnum_status rrnum_channels_create(const double* p01, const double* p10, size_t n, rrnum_channels** out);
RRNUM_API rrnum_status rrnum_channels_create_symmetric(double p01, double p10, size_t n, rrnum_channels** out);
RRNUM_API void rrnum_channels_destroy(rrnum_channels* channels);
RRNUM_API size_t rrnum_channels_count(const rrnum_channels* channels);

/* P(ON after k slots | state `from_on`), k >= 1. */
RRNUM_API rrnum_status rrnum_k_step_prob(double p01, double p10, int from_on, uint64_t k, double* out);

/* ---- capacity --------------------------------------------------------- */

/* Throughput vertex of round robin over `mask`; writes N entries. */
RRNUM_API rrnum_status rrnum_eta_vector(const rrnum_channels* channels, uint64_t mask, double* eta);
/* Sum throughput of M identical channels served in round robin. */
RRNUM_API rrnum_status rrnum_c_coefficient(double p01, double p10, uint32_t m, double* out);
/* E[T] and E[T^2] of one round over `mask`. */
RRNUM_API rrnum_status rrnum_round_moments(const rrnum_channels* channels, uint64_t mask, double* mean,
                                           double* second_moment);
/* B = N * E[T_max^2]. */
RRNUM_API rrnum_status rrnum_b_constant(const rrnum_channels* channels, double* out);

RRNUM_API rrnum_status rrnum_region_create(const rrnum_channels* channels, rrnum_region_kind kind,
                                           size_t enumeration_cap, rrnum_region** out);
RRNUM_API void rrnum_region_destroy(rrnum_region* region);
RRNUM_API size_t rrnum_region_dimension(const rrnum_region* region);
RRNUM_API size_t rrnum_region_vertex_count(const rrnum_region* region);
/* Vertex `index`: its subset mask and N-entry throughput vector. */
RRNUM_API rrnum_status rrnum_region_vertex(const rrnum_region* region, size_t index, uint64_t* mask, double* eta);
/* Classify lambda. `slack` (may be NULL) receives the max uniform slack;
 * `direction` (may be NULL, N entries) receives a separating direction when
 * the verdict is RRNUM_OUTSIDE and zeros otherwise. */
RRNUM_API rrnum_status rrnum_region_membership(const rrnum_region* region, const double* lambda, double tolerance,
                                               rrnum_membership* verdict, double* slack, double* direction);
/* Farthest point of the region along a nonnegative nonzero ray. */
RRNUM_API rrnum_status rrnum_region_probe(const rrnum_region* region, const double* direction, double* point);
/* Maximise the utility over the region (Frank-Wolfe). `gap` may be NULL. */
RRNUM_API rrnum_status rrnum_offline_optimum(const rrnum_region* region, const rrnum_utility* utility, double* point,
                                             double* value, double* gap);

/* ---- utility ---------------------------------------------------------- */

typedef double (*rrnum_scalar_fn)(double r, void* user_data);

/* weights may be NULL (all ones). */
RRNUM_API rrnum_status rrnum_utility_create_log1p(size_t n, const double* weights, rrnum_utility** out);
RRNUM_API rrnum_status rrnum_utility_create_linear(size_t n, const double* weights, rrnum_utility** out);
/* weight_n * fn(r); fn must be concave, nondecreasing and nonnegative on [0, 1]
 * and must stay callable for the lifetime of the handle. */
RRNUM_API rrnum_status rrnum_utility_create_generic(size_t n, const double* weights, rrnum_scalar_fn fn,
                                                    void* user_data, rrnum_utility** out);
RRNUM_API void rrnum_utility_destroy(rrnum_utility* utility);
RRNUM_API rrnum_status rrnum_utility_value(const rrnum_utility* utility, const double* rates, double* out);

/* ---- controller ------------------------------------------------------- */

/* Per-user admission rates for backlog Q and weight vg >= 0. `h_star` may be NULL. */
RRNUM_API rrnum_status rrnum_solve_admission(const rrnum_utility* utility, const double* backlog, double vg,
                                             double* rates, double* h_star);
RRNUM_API rrnum_status rrnum_ratio_metric(const rrnum_channels* channels, const double* backlog, uint64_t mask,
                                          double* out);
/* Subset maximising the ratio metric; *mask = 0 means idle. `value` may be NULL. */
RRNUM_API rrnum_status rrnum_select_phi(const rrnum_channels* channels, const double* backlog, rrnum_mode mode,
                                        size_t enumeration_cap, uint64_t* mask, double* value);

/* ---- experiment configuration ---------------------------------------- */

RRNUM_API rrnum_status rrnum_config_load(const char* path, rrnum_config** out);
RRNUM_API rrnum_status rrnum_config_parse(const char* yaml_text, rrnum_config** out);
RRNUM_API void rrnum_config_destroy(rrnum_config* config);
/* Override one field by dotted key ("run.seed", "sweep.vg", "output.dir")
 * with a YAML value ("7", "[10, 50]"); the config is re-validated and left
 * unchanged on failure. */
RRNUM_API rrnum_status rrnum_config_set(rrnum_config* config, const char* key, const char* yaml_value);
/* Field by dotted key: scalars as plain text, collections in YAML flow style. */
RRNUM_API rrnum_status rrnum_config_get(const rrnum_config* config, const char* key, char* buf, size_t capacity,
                                        size_t* needed);
RRNUM_API rrnum_status rrnum_config_get_double(const rrnum_config* config, const char* key, double* out);
RRNUM_API rrnum_status rrnum_config_get_u64(const rrnum_config* config, const char* key, uint64_t* out);
/* List field; writes up to `capacity` entries and the full length to *count. */
RRNUM_API rrnum_status rrnum_config_get_doubles(const rrnum_config* config, const char* key, double* out,
                                                size_t capacity, size_t* count);
/* Canonical YAML echo; re-parsing it yields an identical config. */
RRNUM_API rrnum_status rrnum_config_echo(const rrnum_config* config, char* buf, size_t capacity, size_t* needed);
RRNUM_API uint64_t rrnum_config_hash(const rrnum_config* config);
/* Channel set and utility described by the config (new handles). */
RRNUM_API rrnum_status rrnum_config_channels(const rrnum_config* config, rrnum_channels** out);
RRNUM_API rrnum_status rrnum_config_utility(const rrnum_config* config, rrnum_utility** out);
/* Inner region per the config's mode and enumeration cap (pairs region for
 * pairs_only mode). */
RRNUM_API rrnum_status rrnum_config_region(const rrnum_config* config, rrnum_region** out);

/* ---- region export ---------------------------------------------------- */

/* Output files carry the given config hash and seed. */
RRNUM_API rrnum_status rrnum_write_region_vertices(const rrnum_region* region, const char* path, rrnum_format format,
                                                   uint64_t config_hash, uint64_t seed);
RRNUM_API rrnum_status rrnum_write_region_boundary(const rrnum_region* region, const char* path, size_t rays,
                                                   rrnum_format format, uint64_t config_hash, uint64_t seed);
RRNUM_API rrnum_status rrnum_write_region_summary(const rrnum_channels* channels, const rrnum_region* region,
                                                  const char* path, uint64_t config_hash, uint64_t seed);

/* ---- simulation ------------------------------------------------------- */

/* One QRRNUM run with the config's channels, utility, mode, horizon, warmup
 * and age cap, at the given V_g and seed. */
RRNUM_API rrnum_status rrnum_run_qrrnum(const rrnum_config* config, double vg, uint64_t seed, rrnum_run** out);
/* Fixed randomised round robin (k components; mask 0 = idle slot) with fixed
 * per-user admission rates, over the config's channels and run settings. */
RRNUM_API rrnum_status rrnum_run_fixed(const rrnum_config* config, size_t k, const uint64_t* masks,
                                       const double* weights, const double* rates, uint64_t seed, rrnum_run** out);
RRNUM_API void rrnum_run_destroy(rrnum_run* run);
RRNUM_API size_t rrnum_run_channels(const rrnum_run* run);
RRNUM_API uint64_t rrnum_run_frames(const rrnum_run* run);
/* Post-warmup averages (N entries each). */
RRNUM_API rrnum_status rrnum_run_delivered(const rrnum_run* run, double* out);
RRNUM_API rrnum_status rrnum_run_admitted(const rrnum_run* run, double* out);
RRNUM_API rrnum_status rrnum_run_backlog(const rrnum_run* run, double* out);
/* g(delivered average) under the run's utility. */
RRNUM_API double rrnum_run_utility(const rrnum_run* run);
RRNUM_API double rrnum_run_mean_backlog(const rrnum_run* run);
RRNUM_API double rrnum_run_max_ledger_error(const rrnum_run* run);
RRNUM_API rrnum_status rrnum_run_stability(const rrnum_run* run, double threshold, rrnum_stability* verdict,
                                           double* slope);
RRNUM_API rrnum_status rrnum_run_write_frames(const rrnum_run* run, const char* path, rrnum_format format,
                                              uint64_t config_hash);
/* JSON summary (always JSON) including B and B/V_g. */
RRNUM_API rrnum_status rrnum_run_write_summary(const rrnum_run* run, const char* path, double threshold,
                                               uint64_t config_hash);

/* ---- verification helpers -------------------------------------------- */

/* Saturated RR(mask) for `slots` measured slots after `warmup`; writes the
 * empirical and analytic per-channel throughput (N entries each). */
RRNUM_API rrnum_status rrnum_verify_throughput(const rrnum_channels* channels, uint64_t mask, uint64_t slots,
                                               uint64_t warmup, uint64_t seed, double* empirical, double* analytic);
/* Perpetual RR(mask) for `rounds` rounds: smallest chi-square p-value of the
 * per-channel stay-length laws, and empirical vs analytic E[T]. */
RRNUM_API rrnum_status rrnum_verify_round_law(const rrnum_channels* channels, uint64_t mask, uint64_t rounds,
                                              uint64_t seed, double* min_p_value, double* mean_empirical,
                                              double* mean_analytic);

#ifdef __cplusplus
}
#endif

#endif /* RRNUM_RRNUM_H */
