#ifndef NPPAC_H
#define NPPAC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Field selectors for [`nppac_sim_copy_field`].
 */
#define NPPAC_FIELD_U 0

#define NPPAC_FIELD_C 1

/**
 * Full potential including the electrode lift.
 */
#define NPPAC_FIELD_PHI 2

/**
 * Homogenised potential, zero on both electrodes.
 */
#define NPPAC_FIELD_PHI_BAR 3

/**
 * Status code returned by every fallible function.
 */
typedef enum NppacStatus {
  NPPAC_STATUS_OK = 0,
  NPPAC_STATUS_NULL_POINTER = 1,
  NPPAC_STATUS_INVALID_ARGUMENT = 2,
  NPPAC_STATUS_NUMERICAL = 3,
  NPPAC_STATUS_INTERFACE_NOT_FOUND = 4,
  NPPAC_STATUS_IO = 5,
  NPPAC_STATUS_CONFIG = 6,
  NPPAC_STATUS_BUFFER_TOO_SMALL = 7,
  NPPAC_STATUS_PANIC = 8,
} NppacStatus;

/**
 * Opaque simulation handle.
 */
typedef struct NppacSim NppacSim;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a simulation with default parameters on an `nx` by `ny` mesh
 * (`0` keeps the default resolution).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum NppacStatus nppac_sim_new_default(size_t nx, size_t ny, struct NppacSim **out);

/**
 * Creates a simulation from the text of a `key = value` configuration.
 *
 * # Safety
 * `config_text` must be a NUL-terminated string; `out` must be writable.
 */
enum NppacStatus nppac_sim_new_from_config(const char *config_text, struct NppacSim **out);

/**
 * Releases a handle. Passing NULL does nothing.
 *
 * # Safety
 * `sim` must be NULL or a handle from `nppac_sim_new_*` not yet freed.
 */
void nppac_sim_free(struct NppacSim *sim);

/**
 * Advances the simulation by `n_steps` time steps. On failure the state
 * is left at the last completed step.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum NppacStatus nppac_sim_step(struct NppacSim *sim, size_t n_steps);

/**
 * Number of mesh nodes, i.e. the length of every field.
 *
 * # Safety
 * `sim` must be a live handle and `out` writable.
 */
enum NppacStatus nppac_sim_num_nodes(const struct NppacSim *sim, size_t *out);

/**
 * Current time and step index.
 *
 * # Safety
 * `sim` must be a live handle; `t` and `k` must be writable or NULL.
 */
enum NppacStatus nppac_sim_time(const struct NppacSim *sim, double *t, size_t *k);

/**
 * Copies one nodal field (`NPPAC_FIELD_*`) into `buf`, which must hold
 * at least `nppac_sim_num_nodes` values. Node `(i, j)` of the structured
 * mesh is at index `j * (nx + 1) + i`.
 *
 * # Safety
 * `sim` must be a live handle and `buf` valid for `len` writes.
 */
enum NppacStatus nppac_sim_copy_field(const struct NppacSim *sim,
                                      uint32_t field,
                                      double *buf,
                                      size_t len);

/**
 * Writes the current state as a legacy ASCII VTK file.
 *
 * # Safety
 * `sim` must be a live handle and `path` a NUL-terminated string.
 */
enum NppacStatus nppac_sim_write_vtk(const struct NppacSim *sim, const char *path);

/**
 * Fourier amplitudes (modes `0..=n_modes`) of the interface radius around
 * the seed centre, from `n_rays` rays. `buf` must hold `n_modes + 1`
 * values.
 *
 * # Safety
 * `sim` must be a live handle and `buf` valid for `len` writes.
 */
enum NppacStatus nppac_sim_interface_modes(const struct NppacSim *sim,
                                           size_t n_modes,
                                           size_t n_rays,
                                           double *buf,
                                           size_t len);

/**
 * Message of the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *nppac_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nppac_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NPPAC_H */
