/* C interface for the kgem knowledge graph embedding toolkit. */

#ifndef KGEM_H
#define KGEM_H

/* Generated by cbindgen; edit src/lib.rs instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
#define KGEM_OK 0

#define KGEM_ERR_NULL_ARGUMENT 1

#define KGEM_ERR_INVALID_UTF8 2

#define KGEM_ERR_CONFIG 3

#define KGEM_ERR_DATA 4

#define KGEM_ERR_NUMERIC 5

#define KGEM_ERR_PANIC 6

// An immutable dataset: vocabularies, splits, and the filter set.
typedef struct KgemDataset KgemDataset;

// A trained (or loaded) model: embeddings plus the vocabulary and the
// resolved configuration it was trained with.
typedef struct KgemModel KgemModel;

// Link-prediction metrics for a whole test split.
typedef struct KgemMetrics {
  double mean_rank_raw;
  double mean_rank_filtered;
  double hits_at_k_raw;
  double hits_at_k_filtered;
} KgemMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread. Valid until the next
// failing call; never null.
const char *kgem_last_error(void);

// Load a dataset from triple TSV files (`head<TAB>relation<TAB>tail`).
// `valid` and `test` may be null.
//
// # Safety
// Strings must be null or valid NUL-terminated; `out` must be valid.
int32_t kgem_dataset_load(const char *train,
                          const char *valid,
                          const char *test,
                          struct KgemDataset **out);

// Generate a synthetic dataset; `generator` is one of
// `chain|clustered|random-er`.
//
// # Safety
// `generator` must be a valid NUL-terminated string; `out` must be valid.
int32_t kgem_dataset_generate(const char *generator,
                              uint64_t entities,
                              uint64_t relations,
                              double density,
                              uint64_t seed,
                              struct KgemDataset **out);

// Number of distinct entities across all splits; 0 for a null handle.
//
// # Safety
// `ds` must be null or a live dataset handle.
uint64_t kgem_dataset_num_entities(const struct KgemDataset *ds);

// Number of distinct relations across all splits; 0 for a null handle.
//
// # Safety
// `ds` must be null or a live dataset handle.
uint64_t kgem_dataset_num_relations(const struct KgemDataset *ds);

// Training triple count; 0 for a null handle.
//
// # Safety
// `ds` must be null or a live dataset handle.
uint64_t kgem_dataset_num_train(const struct KgemDataset *ds);

// Validation triple count; 0 for a null handle.
//
// # Safety
// `ds` must be null or a live dataset handle.
uint64_t kgem_dataset_num_valid(const struct KgemDataset *ds);

// Test triple count; 0 for a null handle.
//
// # Safety
// `ds` must be null or a live dataset handle.
uint64_t kgem_dataset_num_test(const struct KgemDataset *ds);

// # Safety
// `ds` must be null or a handle returned by a dataset constructor, not yet
// freed.
void kgem_dataset_free(struct KgemDataset *ds);

// Train a model. `config_text` is flat `key = value` text (the same format
// the CLI accepts); it must at least choose a `loss`.
//
// # Safety
// `ds` must be a live dataset handle; `config_text` null or a valid string;
// `out` valid.
int32_t kgem_train(const struct KgemDataset *ds, const char *config_text, struct KgemModel **out);

// # Safety
// `model` must be a live model handle; `path` a valid string.
int32_t kgem_model_save(const struct KgemModel *model, const char *path);

// # Safety
// `path` must be a valid string; `out` valid.
int32_t kgem_model_load(const char *path, struct KgemModel **out);

// Score one labeled triple with the model's norm; lower is better.
//
// # Safety
// `model` must be a live model handle; label strings valid; `out_score`
// valid.
int32_t kgem_model_score(const struct KgemModel *model,
                         const char *head,
                         const char *relation,
                         const char *tail,
                         double *out_score);

// Slack scalar of the model (the learned margin half-width is `|slack|`).
//
// # Safety
// `model` must be a live model handle; `out_slack` valid.
int32_t kgem_model_slack(const struct KgemModel *model, double *out_slack);

// Evaluate the model on the dataset's test split: raw and filtered Mean
// Rank and Hits@k.
//
// # Safety
// `model` and `ds` must be live handles; `out` valid.
int32_t kgem_evaluate(const struct KgemModel *model,
                      const struct KgemDataset *ds,
                      uint32_t k,
                      struct KgemMetrics *out);

// # Safety
// `model` must be null or a handle returned by a model constructor, not yet
// freed.
void kgem_model_free(struct KgemModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KGEM_H */
