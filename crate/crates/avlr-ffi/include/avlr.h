#ifndef AVLR_H
#define AVLR_H

/* Generated by cbindgen from the avlr-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a fallible library call. Numeric values match the CLI's exit
 * codes where a counterpart exists.
 */
typedef enum AvlrStatus {
  /**
   * The call succeeded.
   */
  AvlrStatus_Ok = 0,
  /**
   * Rejected configuration: bad sizes, non-finite or out-of-range knobs.
   */
  AvlrStatus_ConfigError = 2,
  /**
   * Rejected input data, including malformed model JSON.
   */
  AvlrStatus_DataError = 3,
  /**
   * A numeric failure inside training or prediction.
   */
  AvlrStatus_NumericError = 4,
  /**
   * A required pointer argument was NULL.
   */
  AvlrStatus_NullArgument = 6,
  /**
   * An internal invariant failed; the library state is still sound.
   */
  AvlrStatus_InternalError = 7,
} AvlrStatus;

/**
 * Opaque fitted-model handle.
 */
typedef struct AvlrModel AvlrModel;

/**
 * Training knobs. Obtain defaults from `avlr_train_options_default` and
 * override fields as needed.
 */
typedef struct AvlrTrainOptions {
  /**
   * Full passes over the training rows.
   */
  size_t epochs;
  /**
   * Rows per optimizer step.
   */
  size_t batch_size;
  /**
   * Adam learning rate.
   */
  double learning_rate;
  /**
   * Importance samples per row during training.
   */
  size_t k;
  /**
   * Encoder hidden width.
   */
  size_t hidden;
  /**
   * Model the missingness mechanism instead of ignoring it.
   */
  bool mnar;
  /**
   * RNG seed; equal seeds give identical models.
   */
  uint64_t seed;
} AvlrTrainOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message for the most recent failure on this thread, or NULL if no
 * call has failed yet. The caller owns the string: release it with
 * `avlr_string_free`.
 */
char *avlr_last_error_message(void);

/**
 * Static name for a status code; do not free the result.
 */
const char *avlr_status_name(enum AvlrStatus status);

struct AvlrTrainOptions avlr_train_options_default(void);

/**
 * Fits a model on `n` rows of `d` covariates and writes the new handle to
 * `out_model`. Pass NULL options to train with the defaults.
 *
 * # Safety
 * `x` and `mask` must point to `n * d` readable elements, `y` to `n`
 * readable bytes, `out_model` to a writable pointer slot, and `options`,
 * when not NULL, to a valid `AvlrTrainOptions`.
 */
enum AvlrStatus avlr_train(const double *x,
                           const uint8_t *mask,
                           const uint8_t *y,
                           size_t n,
                           size_t d,
                           const struct AvlrTrainOptions *options,
                           struct AvlrModel **out_model);

/**
 * Releases a model handle. NULL is a no-op.
 *
 * # Safety
 * `model` must be NULL or a pointer produced by this library that has not
 * been freed already.
 */
void avlr_model_free(struct AvlrModel *model);

/**
 * Frees a string returned by this library. NULL is a no-op.
 *
 * # Safety
 * `s` must be NULL or a string pointer produced by this library that has
 * not been freed already.
 */
void avlr_string_free(char *s);

/**
 * Number of covariates the model was trained on, or 0 for NULL.
 *
 * # Safety
 * `model` must be NULL or a live handle from this library.
 */
size_t avlr_model_dim(const struct AvlrModel *model);

/**
 * Serializes the model to JSON and writes a caller-owned string to
 * `out_json` (free with `avlr_string_free`).
 *
 * # Safety
 * `model` must be a live handle and `out_json` a writable pointer slot.
 */
enum AvlrStatus avlr_model_to_json(const struct AvlrModel *model, char **out_json);

/**
 * Restores a model from `avlr_model_to_json` output and writes the new
 * handle to `out_model`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out_model` a writable
 * pointer slot.
 */
enum AvlrStatus avlr_model_from_json(const char *json, struct AvlrModel **out_model);

/**
 * Predicts `P(y = 1)` for `n` rows and writes them to `out_probs`.
 * Incomplete rows are integrated with `s` importance draws per candidate
 * label; `seed` fixes the randomness.
 *
 * # Safety
 * `model` must be a live handle; `x` and `mask` must point to `n * d`
 * readable elements; `out_probs` must point to `n` writable doubles.
 */
enum AvlrStatus avlr_predict_proba(const struct AvlrModel *model,
                                   const double *x,
                                   const uint8_t *mask,
                                   size_t n,
                                   size_t d,
                                   size_t s,
                                   uint64_t seed,
                                   double *out_probs);

/**
 * Writes the posterior-mean completion of `x` (row-major `n * d`) to
 * `out_x`: observed cells pass through, missing cells get their
 * variational posterior mean given the row's observed values and label.
 *
 * # Safety
 * `model` must be a live handle; `x` and `mask` must point to `n * d`
 * readable elements; `y` to `n` readable bytes; `out_x` to `n * d`
 * writable doubles.
 */
enum AvlrStatus avlr_impute(const struct AvlrModel *model,
                            const double *x,
                            const uint8_t *mask,
                            const uint8_t *y,
                            size_t n,
                            size_t d,
                            double *out_x);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AVLR_H */
