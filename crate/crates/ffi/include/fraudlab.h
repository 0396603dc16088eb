#ifndef FRAUDLAB_H
#define FRAUDLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every entry point. The non-zero error values match the
// CLI exit codes.
typedef enum FlStatus {
  FL_STATUS_OK = 0,
  FL_STATUS_CONFIG = 2,
  FL_STATUS_DATA = 3,
  FL_STATUS_TRAINING = 4,
  FL_STATUS_IO = 5,
  FL_STATUS_NULL_POINTER = 10,
  FL_STATUS_INVALID_ARGUMENT = 11,
  FL_STATUS_PANIC = 12,
} FlStatus;

// Model family selector for [`fl_model_train`].
typedef enum FlModelKind {
  FL_MODEL_KIND_LOGREG = 0,
  FL_MODEL_KIND_KNN = 1,
  FL_MODEL_KIND_TREE = 2,
  FL_MODEL_KIND_SVM = 3,
} FlModelKind;

// Opaque labelled feature table.
typedef struct FlDataset FlDataset;

// Opaque trained classifier.
typedef struct FlModel FlModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failed call on this thread, or null if the
// last call succeeded. Valid until the next call on the same thread.
const char *fl_last_error(void);

// Frees a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed already.
void fl_string_free(char *s);

// Loads a CSV with a 0/1 label column.
//
// # Safety
// `path` and `label_column` must be NUL-terminated strings; `out` must be
// writable.
enum FlStatus fl_dataset_load_csv(const char *path,
                                  const char *label_column,
                                  struct FlDataset **out);

// Generates a synthetic two-Gaussian dataset.
//
// # Safety
// `out` must be writable.
enum FlStatus fl_dataset_generate(size_t n_total,
                                  double positive_fraction,
                                  size_t n_features,
                                  double class_mean_separation,
                                  double noise_stddev,
                                  uint64_t seed,
                                  struct FlDataset **out);

// Releases a dataset. Null is ignored.
//
// # Safety
// `data` must come from this library and not have been freed already.
void fl_dataset_free(struct FlDataset *data);

// # Safety
// `data` must be a live dataset and `out` writable.
enum FlStatus fl_dataset_rows(const struct FlDataset *data, size_t *out);

// # Safety
// `data` must be a live dataset and `out` writable.
enum FlStatus fl_dataset_cols(const struct FlDataset *data, size_t *out);

// Counts of label 0 and label 1.
//
// # Safety
// `data` must be a live dataset; both outputs must be writable.
enum FlStatus fl_dataset_class_counts(const struct FlDataset *data,
                                      size_t *negatives,
                                      size_t *positives);

// Copies the 0/1 labels into `labels`, which must hold exactly the row
// count.
//
// # Safety
// `data` must be live and `labels` must point to `len` writable bytes.
enum FlStatus fl_dataset_labels(const struct FlDataset *data, uint8_t *labels, size_t len);

// Trains one model with default hyperparameters.
//
// # Safety
// `data` must be a live dataset and `out` writable.
enum FlStatus fl_model_train(enum FlModelKind kind,
                             const struct FlDataset *data,
                             uint64_t seed,
                             struct FlModel **out);

// Releases a model. Null is ignored.
//
// # Safety
// `model` must come from this library and not have been freed already.
void fl_model_free(struct FlModel *model);

// Scores every row of `data` into `scores`, which must hold `len` values
// and `len` must equal the row count.
//
// # Safety
// `model` and `data` must be live; `scores` must point to `len` writable
// doubles.
enum FlStatus fl_model_score(const struct FlModel *model,
                             const struct FlDataset *data,
                             double *scores,
                             size_t len);

// Serializes a model to JSON. Free the result with [`fl_string_free`].
//
// # Safety
// `model` must be live and `out` writable.
enum FlStatus fl_model_to_json(const struct FlModel *model, char **out);

// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum FlStatus fl_model_from_json(const char *json, struct FlModel **out);

// ROC AUC of `scores` against 0/1 `labels`, both of length `len`.
//
// # Safety
// `labels` and `scores` must each point to `len` readable values.
enum FlStatus fl_auc(const uint8_t *labels, const double *scores, size_t len, double *out);

// Runs the full pipeline from a TOML config file. When `output_dir` is not
// null it replaces the config's output directory. On success `report_json`
// receives the model reports as JSON; free it with [`fl_string_free`].
//
// # Safety
// `config_path` must be a NUL-terminated string, `output_dir` null or
// NUL-terminated, and `report_json` writable.
enum FlStatus fl_run_pipeline(const char *config_path, const char *output_dir, char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRAUDLAB_H */
