/* C interface to the dcmi library: experiment configs, training runs,
 * lambda sweeps and a few standalone utilities.
 *
 * Every function that can fail returns a dcmi_status. On failure a message
 * is available from dcmi_last_error() on the calling thread until the next
 * call into the library from that thread. Strings returned through char**
 * are owned by the caller and released with dcmi_string_free(). */
#ifndef DCMI_DCMI_H
#define DCMI_DCMI_H

#include <stddef.h>

#if defined(DCMI_BUILDING_LIBRARY)
#define DCMI_API __attribute__((visibility("default")))
#else
#define DCMI_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dcmi_status {
  DCMI_OK = 0,
  DCMI_INVALID_ARGUMENT = 1, /* null pointer, bad size, undefined result */
  DCMI_INVALID_CONFIG = 2,   /* config failed schema or semantic validation */
  DCMI_IO_ERROR = 3,
  DCMI_RUNTIME_ERROR = 4,    /* a training run aborted (divergence, routing) */
  DCMI_BUDGET_EXCEEDED = 5   /* sweep larger than its configured budget */
} dcmi_status;

typedef struct dcmi_experiment dcmi_experiment;

DCMI_API const char* dcmi_version(void);
DCMI_API const char* dcmi_last_error(void);
DCMI_API const char* dcmi_status_name(dcmi_status status);
DCMI_API void dcmi_string_free(char* s);

/* Config loading. Relative data paths resolve against the config's directory
 * (or base_dir for the string form; may be NULL). */
DCMI_API dcmi_status dcmi_experiment_load(const char* path, dcmi_experiment** out);
DCMI_API dcmi_status dcmi_experiment_load_string(const char* json, const char* base_dir, dcmi_experiment** out);
DCMI_API void dcmi_experiment_free(dcmi_experiment* exp);

DCMI_API dcmi_status dcmi_experiment_set_output_dir(dcmi_experiment* exp, const char* dir);
DCMI_API dcmi_status dcmi_experiment_set_workers(dcmi_experiment* exp, size_t workers);
/* asc, dsc or rfd: sets lambda1 and lambda2. */
DCMI_API dcmi_status dcmi_experiment_apply_preset(dcmi_experiment* exp, const char* name);

/* Runs the variant x seed matrix and writes its artifacts. Returns
 * DCMI_RUNTIME_ERROR when any run aborted; completed runs and the partial
 * aggregate are still written and queryable. */
DCMI_API dcmi_status dcmi_experiment_run(dcmi_experiment* exp);
/* Runs the lambda grid. DCMI_BUDGET_EXCEEDED leaves nothing on disk. */
DCMI_API dcmi_status dcmi_experiment_sweep(dcmi_experiment* exp);

/* Results of the last run or sweep. */
DCMI_API size_t dcmi_experiment_result_count(const dcmi_experiment* exp);
DCMI_API dcmi_status dcmi_experiment_result_json(const dcmi_experiment* exp, size_t index, char** out);
/* Test macro/micro AUC of one run; DCMI_INVALID_ARGUMENT when undefined or aborted. */
DCMI_API dcmi_status dcmi_experiment_result_auc(const dcmi_experiment* exp, size_t index, double* macro, double* micro);
DCMI_API dcmi_status dcmi_experiment_aggregate(const dcmi_experiment* exp, char** out);

/* Validates without side effects. DCMI_OK with "ok", or DCMI_INVALID_CONFIG
 * with one "field: problem" line per diagnostic. */
DCMI_API dcmi_status dcmi_validate_file(const char* path, char** diagnostics);
DCMI_API dcmi_status dcmi_validate_string(const char* json, const char* base_dir, char** diagnostics);

/* Rank-statistic AUC; labels are 0/1. DCMI_INVALID_ARGUMENT for single-class input. */
DCMI_API dcmi_status dcmi_auc(const double* scores, const int* labels, size_t n, double* out);
/* Writes points values: 0 then points-1 log-spaced values from min to max. */
DCMI_API dcmi_status dcmi_log_grid(double max, size_t points, double min, double* out);
/* Generates a synthetic dataset from a JSON settings object (the
 * data.synthetic schema) and writes it as JSONL. */
DCMI_API dcmi_status dcmi_generate_synthetic_jsonl(const char* spec_json, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* DCMI_DCMI_H */
