/* C interface to the shapmix library.
 *
 * All functions return a shapmix_status. On failure, shapmix_last_error()
 * returns a thread-local message and shapmix_last_error_field() the
 * configuration key at fault (empty when not applicable). Strings returned
 * through char** must be released with shapmix_string_free(). Handles are
 * released with their matching *_free function; passing NULL is allowed. */
#ifndef SHAPMIX_SHAPMIX_H
#define SHAPMIX_SHAPMIX_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SHAPMIX_BUILDING)
#    define SHAPMIX_API __declspec(dllexport)
#  else
#    define SHAPMIX_API __declspec(dllimport)
#  endif
#else
#  define SHAPMIX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum shapmix_status {
  SHAPMIX_OK = 0,
  SHAPMIX_E_ARGUMENT = 1, /* null handle or output pointer */
  SHAPMIX_E_CONFIG = 2,   /* invalid configuration */
  SHAPMIX_E_DATA = 3,     /* invalid or inconsistent data */
  SHAPMIX_E_NUMERIC = 4,  /* NaN/Inf detected */
  SHAPMIX_E_IO = 5,       /* file system failure */
  SHAPMIX_E_PARSE = 6,    /* malformed file */
  SHAPMIX_E_INTERNAL = 7
} shapmix_status;

typedef struct shapmix_dataset shapmix_dataset;
typedef struct shapmix_run shapmix_run;
typedef struct shapmix_model shapmix_model;

typedef struct shapmix_dims {
  int32_t channels;
  int32_t frames;
  int32_t joints;
  int32_t performers;
} shapmix_dims;

SHAPMIX_API const char* shapmix_version(void);
SHAPMIX_API const char* shapmix_last_error(void);
SHAPMIX_API const char* shapmix_last_error_field(void);
SHAPMIX_API void shapmix_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

/* config_json keys: classes, per_class, dims [C,T,V,M], seed, noise, jitter,
 * split, partition (path, optional). */
SHAPMIX_API int shapmix_dataset_generate(const char* config_json, shapmix_dataset** out);
SHAPMIX_API int shapmix_dataset_load(const char* dir, shapmix_dataset** out);
SHAPMIX_API int shapmix_dataset_save(const shapmix_dataset* ds, const char* dir);
SHAPMIX_API int shapmix_dataset_pareto_subsample(const shapmix_dataset* ds,
                                                 double imbalance_factor,
                                                 int32_t max_per_class, uint64_t seed,
                                                 shapmix_dataset** out);
SHAPMIX_API int shapmix_dataset_dims(const shapmix_dataset* ds, shapmix_dims* out);
SHAPMIX_API size_t shapmix_dataset_size(const shapmix_dataset* ds);
SHAPMIX_API int32_t shapmix_dataset_num_classes(const shapmix_dataset* ds);
/* Writes min(capacity, num_classes) counts. */
SHAPMIX_API int shapmix_dataset_class_counts(const shapmix_dataset* ds, int32_t* counts,
                                             size_t capacity);
/* Warnings collected while loading (unknown manifest fields). */
SHAPMIX_API size_t shapmix_dataset_warning_count(const shapmix_dataset* ds);
SHAPMIX_API const char* shapmix_dataset_warning(const shapmix_dataset* ds, size_t i);
SHAPMIX_API void shapmix_dataset_free(shapmix_dataset* ds);

/* SHA-256 over a dataset directory's manifest and payload files. */
SHAPMIX_API int shapmix_dataset_content_hash(const char* dir, char** out_hex);

/* ---- training ---------------------------------------------------------- */

/* Fills in defaults and validates; returns the fully resolved config. */
SHAPMIX_API int shapmix_config_resolve(const char* config_json, char** out_json);

/* eval may be NULL, in which case per-epoch metrics use the training set. */
SHAPMIX_API int shapmix_train(const shapmix_dataset* train, const shapmix_dataset* eval,
                              const char* config_json, shapmix_run** out);
SHAPMIX_API int shapmix_run_report_json(const shapmix_run* run, char** out);
SHAPMIX_API int shapmix_run_timings_json(const shapmix_run* run, char** out);
SHAPMIX_API int shapmix_run_class_csv(const shapmix_run* run, char** out);
/* Fails with SHAPMIX_E_CONFIG for runs without a saliency table (baseline,
 * st-mix). top_k == 0 exports every coalition. */
SHAPMIX_API int shapmix_run_saliency_json(const shapmix_run* run, size_t top_k, char** out);
SHAPMIX_API int shapmix_run_has_saliency(const shapmix_run* run);
SHAPMIX_API int shapmix_run_save_checkpoint(const shapmix_run* run, const char* path);
SHAPMIX_API void shapmix_run_free(shapmix_run* run);

/* ---- evaluation -------------------------------------------------------- */

SHAPMIX_API int shapmix_model_load(const char* path, shapmix_model** out);
SHAPMIX_API int shapmix_model_dims(const shapmix_model* model, shapmix_dims* out);
/* Metrics JSON (overall/many/medium/few/per_class) and per-class CSV. Shot
 * buckets use the training counts stored in the checkpoint. Either output
 * pointer may be NULL. */
SHAPMIX_API int shapmix_evaluate(const shapmix_model* model, const shapmix_dataset* test,
                                 char** out_metrics_json, char** out_class_csv);
SHAPMIX_API void shapmix_model_free(shapmix_model* model);

#ifdef __cplusplus
}
#endif

#endif /* SHAPMIX_SHAPMIX_H */
