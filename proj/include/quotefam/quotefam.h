/*
 * quotefam: quotation families, sub-families, mutation rates and the
 * family growth simulator behind a plain C interface.
 *
 * Every fallible call returns a qf_status. On failure, qf_last_error()
 * returns a message for the calling thread, valid until its next call.
 * Strings passed in are UTF-8 and NUL terminated; returned const char*
 * pointers are owned by the library.
 */
#ifndef QUOTEFAM_H
#define QUOTEFAM_H

#include <stddef.h>
#include <stdint.h>

#if defined(QUOTEFAM_BUILDING)
#define QF_API __attribute__((visibility("default")))
#else
#define QF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* The first four values double as process exit codes of the CLI. */
typedef enum qf_status {
  QF_OK = 0,
  QF_ERR_INTERNAL = 1,
  QF_ERR_CONFIG = 2,
  QF_ERR_MISSING_PREREQUISITE = 3,
  QF_ERR_DATA = 4,
  QF_ERR_DOMAIN = 5,  /* precondition of a computation violated */
  QF_ERR_ARGUMENT = 6 /* NULL handle or output pointer */
} qf_status;

QF_API const char* qf_version(void);
QF_API const char* qf_status_string(qf_status status);
QF_API const char* qf_last_error(void);

/* ---- pipeline configuration ---- */

typedef struct qf_config qf_config;

QF_API qf_config* qf_config_new(void);
QF_API void qf_config_free(qf_config* config);
QF_API qf_config* qf_config_clone(const qf_config* config);

/* Keys are the long flag names; '-' and '_' are interchangeable. */
QF_API qf_status qf_config_set(qf_config* config, const char* key, const char* value);

/* Copies the value into buf (truncated, always NUL terminated when
 * buf_size > 0). *needed, when non-NULL, receives the full length + 1. */
QF_API qf_status qf_config_get(const qf_config* config, const char* key, char* buf, size_t buf_size,
                               size_t* needed);
QF_API qf_status qf_config_validate(const qf_config* config);
QF_API qf_status qf_config_digest(const qf_config* config, char* buf, size_t buf_size, size_t* needed);

QF_API size_t qf_option_count(void);
QF_API const char* qf_option_name(size_t index);
QF_API size_t qf_subcommand_count(void);
QF_API const char* qf_subcommand_name(size_t index);

/* ---- running stages ---- */

typedef struct qf_run_result qf_run_result;

/* On QF_OK *result is set and must be released with qf_run_result_free.
 * `report` succeeds with exit code 3 when sections are absent. */
QF_API qf_status qf_run(const qf_config* config, const char* subcommand, qf_run_result** result);
QF_API int qf_run_result_exit_code(const qf_run_result* result);
QF_API const char* qf_run_result_summary(const qf_run_result* result);
QF_API size_t qf_run_result_artifact_count(const qf_run_result* result);
QF_API const char* qf_run_result_artifact(const qf_run_result* result, size_t index);
QF_API void qf_run_result_free(qf_run_result* result);

/* ---- measures ---- */

/* Word-level Levenshtein distance over whitespace tokens. */
QF_API qf_status qf_token_edit_distance(const char* a, const char* b, size_t* out);
/* Entropy in nats of a mention distribution. */
QF_API qf_status qf_entropy(const uint64_t* mentions, size_t count, double* out);
QF_API qf_status qf_cohen_kappa(const int* a, const int* b, size_t count, double* out);
QF_API qf_status qf_randomization_test(const double* a, const double* b, size_t count, size_t iterations,
                                       uint64_t seed, double* p_value);

/* ---- simulator ---- */

typedef struct qf_rate_model qf_rate_model;

typedef enum qf_channel { QF_MICRO = 0, QF_MACRO = 1 } qf_channel;

QF_API qf_rate_model* qf_rate_model_published(void);
QF_API qf_rate_model* qf_rate_model_constant(double micro_rate, double macro_rate);
QF_API void qf_rate_model_free(qf_rate_model* model);
QF_API qf_status qf_combined_rate(const qf_rate_model* model, qf_channel channel, double l, double n, double* out);

typedef struct qf_simfamily qf_simfamily;

QF_API qf_status qf_simulate_family(const qf_rate_model* model, size_t l0, uint64_t mentions, uint64_t seed,
                                    qf_simfamily** out);
QF_API size_t qf_simfamily_versions(const qf_simfamily* family);
QF_API size_t qf_simfamily_subfamilies(const qf_simfamily* family);
QF_API uint64_t qf_simfamily_mentions(const qf_simfamily* family);
QF_API double qf_simfamily_entropy(const qf_simfamily* family);
QF_API void qf_simfamily_free(qf_simfamily* family);

#ifdef __cplusplus
}
#endif

#endif /* QUOTEFAM_H */
