#ifndef FORBIDDEN_DEGREE_H
#define FORBIDDEN_DEGREE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

#define FD_OK 0

#define FD_ERR_INVALID_ARGUMENT 1

#define FD_ERR_NUMERIC 2

#define FD_ERR_IO 3

#define FD_ERR_CONFIG 4

#define FD_ERR_RETRY_EXHAUSTED 5

#define FD_ERR_NULL 6

#define FD_ERR_PANIC 7

/**
 * A graph of the process at the end of a run.
 */
typedef struct FdGraph FdGraph;

/**
 * A discretised offspring kernel.
 */
typedef struct FdKernel FdKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. The pointer
 * stays valid until the next failing call on this thread.
 */
const char *fd_last_error(void);

/**
 * Library version, a static NUL-terminated string.
 */
const char *fd_version(void);

int32_t fd_compute_pi(double t, uint32_t k, double *out_pi);

int32_t fd_threshold_lhs(double t, uint32_t k, double *out_value);

/**
 * Sets `*out_found` to 1 and fills the interval if `threshold_lhs(., k)`
 * exceeds 1 somewhere on `[0, t_max]`, else sets it to 0.
 */
int32_t fd_supercritical_interval(uint32_t k,
                                  double t_max,
                                  int32_t *out_found,
                                  double *out_lo,
                                  double *out_hi);

/**
 * Simulates `G^k_{n,t}` from stream `(seed, stream)`. `k = 0` means no
 * forbidden degree.
 */
int32_t fd_graph_simulate(size_t n,
                          uint32_t k,
                          double t,
                          uint64_t seed,
                          uint64_t stream,
                          struct FdGraph **out_graph);

void fd_graph_free(struct FdGraph *graph);

int32_t fd_graph_counts(const struct FdGraph *graph, size_t *out_vertices, size_t *out_edges);

/**
 * Endpoints and label of edge record `index`.
 */
int32_t fd_graph_edge(const struct FdGraph *graph,
                      size_t index,
                      uint32_t *out_u,
                      uint32_t *out_v,
                      double *out_label);

int32_t fd_graph_c_max(const struct FdGraph *graph, size_t *out_c_max);

/**
 * Monte Carlo survival probability of `T^k_t` with generation cap
 * `gen_cap` and component cap `comp_cap`.
 */
int32_t fd_estimate_survival(double t,
                             uint32_t k,
                             uint64_t replicas,
                             uint32_t gen_cap,
                             size_t comp_cap,
                             uint64_t seed,
                             double *out_a_hat,
                             double *out_se);

int32_t fd_kernel_build(double t,
                        uint32_t k,
                        size_t bins,
                        size_t samples_per_cell,
                        uint64_t seed,
                        struct FdKernel **out_kernel);

void fd_kernel_free(struct FdKernel *kernel);

int32_t fd_kernel_bins(const struct FdKernel *kernel, size_t *out_bins);

int32_t fd_kernel_spectral_radius(const struct FdKernel *kernel, double *out_rho);

/**
 * Applies the generating operator to `f` (length `bins`), writing `bins`
 * values to `out_values`.
 */
int32_t fd_kernel_phi(const struct FdKernel *kernel, const double *f, double *out_values);

/**
 * Extinction fixed point: writes the two-stage extinction probability,
 * the spectral radius, and `1` to `*out_converged` if both brackets agreed.
 */
int32_t fd_kernel_solve(const struct FdKernel *kernel,
                        double tol,
                        double *out_q_twostage,
                        double *out_rho,
                        int32_t *out_converged);

int32_t fd_kernel_save(const struct FdKernel *kernel, const char *path);

int32_t fd_kernel_load(const char *path, struct FdKernel **out_kernel);

/**
 * Runs an experiment described by a TOML (or, if it starts with `{`, JSON)
 * config and returns the record rendered in the config's format. The
 * string must be released with `fd_string_free`. Nothing is written to disk.
 */
int32_t fd_run_config(const char *config, char **out_text);

void fd_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FORBIDDEN_DEGREE_H */
