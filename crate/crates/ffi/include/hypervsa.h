#ifndef HYPERVSA_H
#define HYPERVSA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HvStatus {
  HV_STATUS_OK = 0,
  HV_STATUS_NULL_POINTER = 1,
  HV_STATUS_INVALID_ARGUMENT = 2,
  HV_STATUS_DIM_MISMATCH = 3,
  HV_STATUS_ORDER_MISMATCH = 4,
  HV_STATUS_EMPTY = 5,
  HV_STATUS_NUMERIC = 6,
  HV_STATUS_DATA = 7,
  HV_STATUS_FORMAT = 8,
  HV_STATUS_IO = 9,
  /**
   * A Rust panic was caught at the boundary; the library state is intact
   * but the call had no effect.
   */
  HV_STATUS_PANIC = 10,
} HvStatus;

/**
 * A set of basis hypervectors, e.g. one per quantization level.
 */
typedef struct HvBasis HvBasis;

/**
 * A trained classifier loaded from a model file.
 */
typedef struct HvModel HvModel;

/**
 * Seeded random stream.
 */
typedef struct HvRng HvRng;

/**
 * A binary or cyclic hypervector.
 */
typedef struct HvVector HvVector;

/**
 * Circuit depth of one inference model.
 */
typedef struct HvCdcDepth {
  double depth;
  uint64_t rounded;
} HvCdcDepth;

typedef struct HvCdcReport {
  struct HvCdcDepth binary_hdc;
  struct HvCdcDepth group;
  struct HvCdcDepth perceptron;
} HvCdcReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *hv_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hv_version(void);

/**
 * Stream `stream` of master seed `seed`. Never returns NULL.
 */
struct HvRng *hv_rng_new(uint64_t seed, uint64_t stream);

/**
 * # Safety
 * `rng` must be NULL or a handle from [`hv_rng_new`] not yet freed.
 */
void hv_rng_free(struct HvRng *rng);

/**
 * # Safety
 * `v` must be NULL or a vector handle not yet freed.
 */
void hv_vector_free(struct HvVector *v);

/**
 * Uniform random vector: fair signs, or uniform group elements.
 *
 * # Safety
 * `rng` must be a live handle; `out` must be writable.
 */
enum HvStatus hv_vector_random(uint8_t order, size_t dim, struct HvRng *rng, struct HvVector **out);

/**
 * Binary vector from `len` signs, each -1 or +1.
 *
 * # Safety
 * `signs` must point to `len` readable bytes; `out` must be writable.
 */
enum HvStatus hv_vector_from_signs(const int8_t *signs, size_t len, struct HvVector **out);

/**
 * Cyclic vector of order `order` from `len` elements in `0..order`.
 *
 * # Safety
 * `elems` must point to `len` readable bytes; `out` must be writable.
 */
enum HvStatus hv_vector_from_elems(uint8_t order,
                                   const uint8_t *elems,
                                   size_t len,
                                   struct HvVector **out);

/**
 * Dimension, or 0 for NULL.
 *
 * # Safety
 * `v` must be NULL or a live vector handle.
 */
size_t hv_vector_dim(const struct HvVector *v);

/**
 * Order byte (0 = binary), or 0 for NULL.
 *
 * # Safety
 * `v` must be NULL or a live vector handle.
 */
uint8_t hv_vector_order(const struct HvVector *v);

/**
 * Copies coordinates into `buf`: -1/+1 for binary, elements for cyclic.
 * `len` must equal the dimension.
 *
 * # Safety
 * `v` must be a live handle; `buf` must point to `len` writable `int32_t`.
 */
enum HvStatus hv_vector_read(const struct HvVector *v, int32_t *buf, size_t len);

/**
 * Similarity in [-1, 1]; cyclic vectors use the default character kernel.
 *
 * # Safety
 * `a`, `b` must be live handles; `out` must be writable.
 */
enum HvStatus hv_similarity(const struct HvVector *a, const struct HvVector *b, double *out);

/**
 * # Safety
 * `a`, `b` must be live handles; `out` must be writable.
 */
enum HvStatus hv_bind(const struct HvVector *a, const struct HvVector *b, struct HvVector **out);

/**
 * Cyclic shift: output coordinate `i` is input coordinate `i - shift` mod D.
 *
 * # Safety
 * `v` must be a live handle; `out` must be writable.
 */
enum HvStatus hv_permute(const struct HvVector *v, int64_t shift, struct HvVector **out);

/**
 * Bundles `count` vectors of one family; ties are broken from `rng`.
 *
 * # Safety
 * `vs` must point to `count` live handles; `rng` must be live; `out` writable.
 */
enum HvStatus hv_bundle(const struct HvVector *const *vs,
                        size_t count,
                        struct HvRng *rng,
                        struct HvVector **out);

/**
 * Serializes to the canonical record format. Call with `buf = NULL` to get
 * the size in `len`; otherwise `*len` is the capacity on entry and the
 * written size on return.
 *
 * # Safety
 * `v` must be live; `len` writable; `buf` NULL or `*len` writable bytes.
 */
enum HvStatus hv_vector_serialize(const struct HvVector *v, uint8_t *buf, size_t *len);

/**
 * # Safety
 * `buf` must point to `len` readable bytes; `out` must be writable.
 */
enum HvStatus hv_vector_deserialize(const uint8_t *buf, size_t len, struct HvVector **out);

/**
 * # Safety
 * `b` must be NULL or a basis handle not yet freed.
 */
void hv_basis_free(struct HvBasis *b);

/**
 * Samples `n` correlated vectors whose expected similarities approach the
 * row-major `n x n` target matrix.
 *
 * # Safety
 * `target` must point to `n * n` doubles; `rng` live; `out` writable.
 */
enum HvStatus hv_basis_sample(const double *target,
                              size_t n,
                              uint8_t order,
                              size_t dim,
                              struct HvRng *rng,
                              struct HvBasis **out);

/**
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string; `out` writable.
 */
enum HvStatus hv_basis_load(const char *path, struct HvBasis **out);

/**
 * # Safety
 * `b` must be live; `path` a NUL-terminated UTF-8 string.
 */
enum HvStatus hv_basis_save(const struct HvBasis *b, const char *path);

/**
 * Number of vectors, or 0 for NULL.
 *
 * # Safety
 * `b` must be NULL or live.
 */
size_t hv_basis_len(const struct HvBasis *b);

/**
 * Copy of vector `i`.
 *
 * # Safety
 * `b` must be live; `out` writable.
 */
enum HvStatus hv_basis_get(const struct HvBasis *b, size_t i, struct HvVector **out);

/**
 * Encodes quantized feature indices: feature `j` looks up basis vector
 * `indices[j]`, shifted by `j`, and all features are bound together.
 *
 * # Safety
 * `b` must be live; `indices` must point to `n` bytes; `out` writable.
 */
enum HvStatus hv_encode(const struct HvBasis *b,
                        const uint8_t *indices,
                        size_t n,
                        struct HvVector **out);

/**
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string; `out` writable.
 */
enum HvStatus hv_model_load(const char *path, struct HvModel **out);

/**
 * # Safety
 * `m` must be NULL or a model handle not yet freed.
 */
void hv_model_free(struct HvModel *m);

/**
 * Number of classes, or 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or live.
 */
size_t hv_model_classes(const struct HvModel *m);

/**
 * # Safety
 * `m`, `v` must be live; `out` writable.
 */
enum HvStatus hv_model_predict(const struct HvModel *m, const struct HvVector *v, size_t *out);

/**
 * Whether the row-major `n x n` similarity matrix lies within `eps` of a
 * mixture of binary sign patterns (`n` in 2..=12).
 *
 * # Safety
 * `m` must point to `n * n` doubles; `feasible` and `residual` writable
 * (`residual` may be NULL).
 */
enum HvStatus hv_check_expressible(const double *m,
                                   size_t n,
                                   double eps,
                                   bool *feasible,
                                   double *residual);

/**
 * Expected angle in degrees between a bundle of `2k + 1` random binary
 * vectors and one of its members.
 *
 * # Safety
 * `out` must be writable.
 */
enum HvStatus hv_bundling_angle(int64_t k, double *out);

/**
 * Circuit depth of inference for `n_features` inputs at dimension `dim`;
 * the group entry is G(2^`n_bits`).
 *
 * # Safety
 * `out` must be writable.
 */
enum HvStatus hv_cdc(uint64_t n_features, uint64_t dim, uint32_t n_bits, struct HvCdcReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERVSA_H */
