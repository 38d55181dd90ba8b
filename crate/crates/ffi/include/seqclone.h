#ifndef SEQCLONE_H
#define SEQCLONE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum SeqcloneStatus {
  SEQCLONE_STATUS_OK = 0,
  SEQCLONE_STATUS_NULL_POINTER = 1,
  SEQCLONE_STATUS_INVALID_ARGUMENT = 2,
  SEQCLONE_STATUS_STRUCTURAL = 3,
  SEQCLONE_STATUS_NUMERIC = 4,
  SEQCLONE_STATUS_RESOURCE = 5,
  SEQCLONE_STATUS_STATE = 6,
  SEQCLONE_STATUS_PARSE = 7,
  SEQCLONE_STATUS_IO = 8,
  SEQCLONE_STATUS_PANIC = 9,
} SeqcloneStatus;

typedef enum SeqcloneMethod {
  SEQCLONE_METHOD_SVD_TRUNCATION = 0,
  SEQCLONE_METHOD_VARIATIONAL = 1,
  SEQCLONE_METHOD_VARIATIONAL_SEEDED_BY_SVD = 2,
} SeqcloneMethod;

// Matrix product state.
typedef struct SeqcloneMps SeqcloneMps;

// Dense state of `n` qubits.
typedef struct SeqcloneStatevector SeqcloneStatevector;

// Outcome of a schedule search.
typedef struct SeqcloneSynthesis SeqcloneSynthesis;

typedef struct SeqcloneComplex {
  double re;
  double im;
} SeqcloneComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Owned by the
// library; valid until the next call on this thread.
const char *seqclone_last_error(void);

// Release a string returned by this library.
//
// # Safety
// `s` must come from this library and not have been freed.
void seqclone_string_free(char *s);

// Cloner output for `clones` copies of `alpha|0> + beta|1>`.
//
// # Safety
// `out` must be valid for a pointer write.
enum SeqcloneStatus seqclone_gm_state(size_t clones,
                                      struct SeqcloneComplex alpha,
                                      struct SeqcloneComplex beta,
                                      struct SeqcloneStatevector **out);

// Statevector from `2^qubits` amplitudes.
//
// # Safety
// `amplitudes` must point to `len` values; `out` must be writable.
enum SeqcloneStatus seqclone_statevector_new(size_t qubits,
                                             const struct SeqcloneComplex *amplitudes,
                                             size_t len,
                                             struct SeqcloneStatevector **out);

// # Safety
// `v` must be a live handle; `out` must be writable.
enum SeqcloneStatus seqclone_statevector_qubits(const struct SeqcloneStatevector *v, size_t *out);

// Copy amplitudes into `buffer`, which must hold `2^qubits` entries.
//
// # Safety
// `v` must be a live handle; `buffer` must be writable for `len` values.
enum SeqcloneStatus seqclone_statevector_amplitudes(const struct SeqcloneStatevector *v,
                                                    struct SeqcloneComplex *buffer,
                                                    size_t len);

// # Safety
// `v` must be null or a live handle, freed at most once.
void seqclone_statevector_free(struct SeqcloneStatevector *v);

// Exact MPS of a normalized statevector, dropping singular values below
// `rank_tol` relative to the largest.
//
// # Safety
// `v` must be a live handle; `out` must be writable.
enum SeqcloneStatus seqclone_mps_from_statevector(const struct SeqcloneStatevector *v,
                                                  double rank_tol,
                                                  struct SeqcloneMps **out);

// # Safety
// `m` must be a live handle; `out` must be writable.
enum SeqcloneStatus seqclone_mps_qubits(const struct SeqcloneMps *m, size_t *out);

// Bond dimensions `D_1..D_{n+1}`. Writes the count to `count` and, when
// `buffer` holds at least that many entries, the values.
//
// # Safety
// `m` must be a live handle; `buffer` null or writable for `len` values.
enum SeqcloneStatus seqclone_mps_bond_dims(const struct SeqcloneMps *m,
                                           size_t *buffer,
                                           size_t len,
                                           size_t *count);

// `<a|b>`.
//
// # Safety
// `a`, `b` must be live handles; `out` must be writable.
enum SeqcloneStatus seqclone_mps_overlap(const struct SeqcloneMps *a,
                                         const struct SeqcloneMps *b,
                                         struct SeqcloneComplex *out);

// Compress to at most `bond_cap`. Writes the new state and its fidelity to
// the target.
//
// # Safety
// `m` must be a live handle; `out` and `fidelity` must be writable.
enum SeqcloneStatus seqclone_mps_compress(const struct SeqcloneMps *m,
                                          size_t bond_cap,
                                          enum SeqcloneMethod method,
                                          uint64_t seed,
                                          struct SeqcloneMps **out,
                                          double *fidelity);

// Serialize as a `seqclone.mps/1` JSON document.
//
// # Safety
// `m` must be a live handle; `out` must be writable.
enum SeqcloneStatus seqclone_mps_to_json(const struct SeqcloneMps *m, char **out);

// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum SeqcloneStatus seqclone_mps_from_json(const char *json, struct SeqcloneMps **out);

// # Safety
// `m` must be null or a live handle, freed at most once.
void seqclone_mps_free(struct SeqcloneMps *m);

// Fit an XXZ ancilla-qubit schedule emitting `target`.
//
// # Safety
// `target` must be a live handle; `out` must be writable.
enum SeqcloneStatus seqclone_optimize_schedule(const struct SeqcloneStatevector *target,
                                               bool aux,
                                               size_t restarts,
                                               uint64_t seed,
                                               struct SeqcloneSynthesis **out);

// # Safety
// `s` must be a live handle; `out` must be writable.
enum SeqcloneStatus seqclone_synthesis_fidelity(const struct SeqcloneSynthesis *s, double *out);

// # Safety
// `s` must be a live handle; `out` must be writable.
enum SeqcloneStatus seqclone_synthesis_iterations(const struct SeqcloneSynthesis *s, size_t *out);

// Best schedule as JSON.
//
// # Safety
// `s` must be a live handle; `out` must be writable.
enum SeqcloneStatus seqclone_synthesis_schedule_json(const struct SeqcloneSynthesis *s, char **out);

// # Safety
// `s` must be null or a live handle, freed at most once.
void seqclone_synthesis_free(struct SeqcloneSynthesis *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEQCLONE_H */
