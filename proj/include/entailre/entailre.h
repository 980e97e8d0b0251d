/*
 * entailre: relation extraction by textual entailment.
 *
 * C interface over the engine. All objects are opaque handles created by an
 * `ere_*_load/open/...` function and released by the matching `ere_*_free`.
 * Every fallible call returns an ere_status; on failure, ere_last_error()
 * describes the problem for the calling thread until its next failing call.
 * Strings returned through `char **` are owned by the caller and released
 * with ere_string_free(). `const char **` outputs borrow from the handle and
 * stay valid while it lives.
 */
#ifndef ENTAILRE_ENTAILRE_H_
#define ENTAILRE_ENTAILRE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(ENTAILRE_BUILDING_LIBRARY)
#define ERE_API __attribute__((visibility("default")))
#else
#define ERE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ere_status {
  ERE_OK = 0,
  ERE_INVALID_ARGUMENT = 1,
  ERE_PARSE_ERROR = 2,
  ERE_IO_ERROR = 3,
  ERE_NOT_FOUND = 4,
  ERE_BACKEND_ERROR = 5,
  ERE_CONFLICT = 6,
  ERE_INTERNAL_ERROR = 7
} ere_status;

ERE_API const char *ere_version(void);
ERE_API const char *ere_status_name(ere_status status);
ERE_API const char *ere_last_error(void);
ERE_API void ere_string_free(char *s);

/* SHA-256 of a file as 64 hex characters plus NUL. */
ERE_API ere_status ere_file_sha256(const char *path, char out[65]);

/* ---- schema ---------------------------------------------------------- */

typedef struct ere_schema ere_schema;

ERE_API ere_status ere_schema_load(const char *path, ere_schema **out);
ERE_API ere_status ere_schema_parse(const char *text, ere_schema **out);
ERE_API ere_status ere_schema_serialize(const ere_schema *schema, char **out);
ERE_API void ere_schema_free(ere_schema *schema);

ERE_API ere_status ere_schema_relation_count(const ere_schema *schema,
                                             size_t *out);
/* Labels are enumerated in lexicographic order. */
ERE_API ere_status ere_schema_relation_label(const ere_schema *schema,
                                             size_t index, const char **out);
ERE_API ere_status ere_schema_template_count(const ere_schema *schema,
                                             const char *relation,
                                             size_t *out);
ERE_API ere_status ere_schema_negative_label(const ere_schema *schema,
                                             const char **out);
ERE_API ere_status ere_schema_has_norel_template(const ere_schema *schema,
                                                 int *out);
/* Type gate: *out is 1 when both argument types are allowed. */
ERE_API ere_status ere_schema_delta(const ere_schema *schema,
                                    const char *relation,
                                    const char *subj_type,
                                    const char *obj_type, int *out);
/* JSON array of admitted relation labels. */
ERE_API ere_status ere_schema_candidates(const ere_schema *schema,
                                         const char *subj_type,
                                         const char *obj_type, char **out);

ERE_API ere_status ere_verbalize(const char *pattern, const char *subj_text,
                                 const char *obj_text, char **out);

/* ---- scoring backends ------------------------------------------------ */

typedef struct ere_backend ere_backend;

typedef struct ere_backend_options {
  size_t batch_size;   /* remote: pairs per request */
  unsigned timeout_ms; /* remote: per request */
  unsigned concurrency;
  int strict_fixture; /* fixture: fail on misses instead of uniform scores */
} ere_backend_options;

ERE_API void ere_backend_options_init(ere_backend_options *options);
/* uri: "fixture:<path>", "lexical:" or "remote:<address>". */
ERE_API ere_status ere_backend_open(const char *uri,
                                    const ere_backend_options *options,
                                    ere_backend **out);
ERE_API ere_status ere_backend_describe(const ere_backend *backend,
                                        const char **out);
/* out[0..2] = entailment, neutral, contradiction. */
ERE_API ere_status ere_backend_score(const ere_backend *backend,
                                     const char *premise,
                                     const char *hypothesis, double out[3]);
ERE_API void ere_backend_free(ere_backend *backend);

/* ---- datasets -------------------------------------------------------- */

typedef struct ere_dataset ere_dataset;

/* TACRED release format; "no_relation" maps to negative_label. */
ERE_API ere_status ere_dataset_load(const char *path,
                                    const char *negative_label,
                                    ere_dataset **out);
ERE_API ere_status ere_dataset_save(const ere_dataset *dataset,
                                    const char *path);
ERE_API ere_status ere_dataset_size(const ere_dataset *dataset, size_t *out);
ERE_API ere_status ere_dataset_counts(const ere_dataset *dataset,
                                      size_t *positives, size_t *negatives,
                                      size_t *unlabeled);
/* JSON object label -> count (unlabeled examples under ""). */
ERE_API ere_status ere_dataset_label_counts(const ere_dataset *dataset,
                                            char **out);
/* `rest` may be NULL. */
ERE_API ere_status ere_dataset_split(const ere_dataset *dataset,
                                     double fraction, uint64_t seed,
                                     ere_dataset **selected,
                                     ere_dataset **rest);
ERE_API ere_status ere_dataset_strip_labels(const ere_dataset *dataset,
                                            ere_dataset **out);
ERE_API void ere_dataset_free(ere_dataset *dataset);

/* ---- inference ------------------------------------------------------- */

typedef enum ere_norel_mode {
  ERE_NOREL_THRESHOLD = 0,
  ERE_NOREL_TEMPLATE = 1
} ere_norel_mode;

typedef struct ere_inference_config {
  ere_norel_mode norel_mode;
  double threshold;
  size_t batch_size; /* pairs per pooled backend call */
  unsigned workers;
  int skip_failures;
} ere_inference_config;

typedef struct ere_predictions ere_predictions;

ERE_API void ere_inference_config_init(ere_inference_config *config);
ERE_API ere_status ere_classify(const ere_schema *schema,
                                const ere_dataset *dataset,
                                const ere_backend *backend,
                                const ere_inference_config *config,
                                ere_predictions **out);
/* One TACRED record in, one prediction document out. */
ERE_API ere_status ere_classify_json(const ere_schema *schema,
                                     const ere_backend *backend,
                                     const ere_inference_config *config,
                                     const char *example_json, char **out);

ERE_API ere_status ere_predictions_size(const ere_predictions *predictions,
                                        size_t *out);
ERE_API ere_status ere_predictions_get(const ere_predictions *predictions,
                                       size_t index, const char **example_id,
                                       const char **label, double *score);
ERE_API ere_status ere_predictions_failures(const ere_predictions *predictions,
                                            size_t *out);
/* JSON lines; verbose adds the per-relation score map. */
ERE_API ere_status ere_predictions_write(const ere_predictions *predictions,
                                         const char *path, int verbose);
ERE_API ere_status ere_predictions_read(const char *path,
                                        ere_predictions **out);
ERE_API void ere_predictions_free(ere_predictions *predictions);

/* Predictions must carry per-relation scores (in memory or verbose file). */
ERE_API ere_status ere_tune_threshold(const ere_predictions *dev_predictions,
                                      const ere_dataset *dev, double *threshold,
                                      double *f1);
ERE_API ere_status ere_f1_sweep(const ere_predictions *predictions,
                                const ere_dataset *gold, const double *grid,
                                size_t grid_size, double *f1_out);
/* JSON array of {fraction, runs, mean_f1, stderr_f1, mean_threshold}.
 * eval_* may be NULL to measure on the development set itself. */
ERE_API ere_status ere_threshold_curve(const ere_predictions *dev_predictions,
                                       const ere_dataset *dev,
                                       const ere_predictions *eval_predictions,
                                       const ere_dataset *eval,
                                       const double *fractions,
                                       size_t fraction_count, size_t runs,
                                       uint64_t seed, char **out);

/* ---- evaluation ------------------------------------------------------ */

typedef struct ere_report ere_report;

typedef struct ere_metrics {
  double precision;
  double recall;
  double f1;
  double p_metric;
  double pvsn_metric;
  size_t gold_positive;
  size_t predicted_positive;
  size_t correct;
} ere_metrics;

/* Predictions are matched to gold examples by id. */
ERE_API ere_status ere_evaluate(const ere_dataset *gold,
                                const ere_predictions *predictions,
                                ere_report **out);
ERE_API ere_status ere_report_metrics(const ere_report *report,
                                      ere_metrics *out);
ERE_API ere_status ere_report_json(const ere_report *report, char **out);
ERE_API ere_status ere_report_text(const ere_report *report, char **out);
ERE_API ere_status ere_report_confusion_csv(const ere_report *report,
                                            char **out);
ERE_API void ere_report_free(ere_report *report);

ERE_API ere_status ere_summarize(const double *values, size_t count,
                                 double *mean, double *median, double *stddev);

/* ---- pair compilation and silver data -------------------------------- */

ERE_API ere_status ere_generate_pairs(const ere_dataset *dataset,
                                      const ere_schema *schema, uint64_t seed,
                                      int use_norel_template, unsigned workers,
                                      const char *out_path, size_t *count);
/* `report` (JSON) may be NULL. */
ERE_API ere_status ere_annotate_silver(const ere_dataset *unlabeled,
                                       const ere_schema *schema,
                                       const ere_backend *backend,
                                       const ere_inference_config *config,
                                       ere_dataset **out, char **report);

/* ---- HTTP service ---------------------------------------------------- */

typedef struct ere_service ere_service;

/* Serves the schema at schema_path; edits are persisted back to it. Port 0
 * binds a free port. */
ERE_API ere_status ere_service_start(const char *schema_path,
                                     const ere_backend *backend,
                                     const ere_inference_config *config,
                                     const char *host, int port,
                                     ere_service **out);
ERE_API ere_status ere_service_port(const ere_service *service, int *out);
/* Blocks until ere_service_stop() is called. */
ERE_API ere_status ere_service_wait(ere_service *service);
ERE_API ere_status ere_service_stop(ere_service *service);
ERE_API void ere_service_free(ere_service *service);

#ifdef __cplusplus
}
#endif

#endif /* ENTAILRE_ENTAILRE_H_ */
