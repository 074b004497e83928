#ifndef CHAINPOLAR_H
#define CHAINPOLAR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CpStatus {
  CP_STATUS_OK = 0,
  CP_STATUS_NULL_POINTER = 1,
  CP_STATUS_INVALID_INPUT = 2,
  /**
   * The requested rates do not fit the code.
   */
  CP_STATUS_INFEASIBLE = 3,
  CP_STATUS_LENGTH_MISMATCH = 4,
  CP_STATUS_INTERNAL = 5,
} CpStatus;

/**
 * A constructed or loaded code instance.
 */
typedef struct CpInstance CpInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *cp_last_error(void);

/**
 * Loads an instance from its JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CpStatus cp_instance_from_json(const char *json, struct CpInstance **out);

/**
 * Builds an instance from a TOML config at block length `2^n`
 * (`n = 0` takes the exponent from the config).
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CpStatus cp_instance_construct(const char *config_toml, uint32_t n, struct CpInstance **out);

/**
 * Releases an instance; null is ignored.
 *
 * # Safety
 * `inst` must come from this library and not be used afterwards.
 */
void cp_instance_free(struct CpInstance *inst);

/**
 * Block length, block count and message sizes of an instance.
 *
 * # Safety
 * `inst` must be a live instance; output pointers may be null.
 */
enum CpStatus cp_instance_dims(const struct CpInstance *inst,
                               size_t *block_len,
                               size_t *blocks,
                               size_t *public_bits,
                               size_t *private_bits);

/**
 * Serializes an instance. Free the string with [`cp_string_free`].
 *
 * # Safety
 * `inst` must be a live instance and `out` a valid pointer.
 */
enum CpStatus cp_instance_to_json(const struct CpInstance *inst, char **out);

/**
 * # Safety
 * `s` must come from this library; null is ignored.
 */
void cp_string_free(char *s);

/**
 * Encodes the messages into `blocks * block_len` codeword bits.
 *
 * # Safety
 * Buffers must hold at least the given number of bytes.
 */
enum CpStatus cp_encode(const struct CpInstance *inst,
                        const uint8_t *public_bits,
                        size_t public_len,
                        const uint8_t *private_bits,
                        size_t private_len,
                        uint8_t *codeword,
                        size_t codeword_len);

/**
 * Decodes `blocks * block_len` output symbols of `receiver` (1, 2 or 3).
 * Receiver 1 also fills `private_out`; other receivers leave it alone and
 * accept a null pointer with length 0.
 *
 * # Safety
 * Buffers must hold at least the given number of elements.
 */
enum CpStatus cp_decode(const struct CpInstance *inst,
                        uint8_t receiver,
                        const uint32_t *observations,
                        size_t observations_len,
                        uint8_t *public_out,
                        size_t public_len,
                        uint8_t *private_out,
                        size_t private_len);

/**
 * Library version, a static NUL-terminated string.
 */
const char *cp_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHAINPOLAR_H */
