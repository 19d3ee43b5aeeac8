/* C API of the coupling engine: opaque handles plus integer error codes.
 * Every function returns SKW_OK on success; on failure the return value is
 * one of the SKW_ERR_* codes and skw_last_error() carries a message for the
 * calling thread. Strings returned through char** are owned by the caller
 * and released with skw_string_free(). */

#ifndef SKW_CAPI_H
#define SKW_CAPI_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define SKW_OK 0
#define SKW_ERR_INVALID_ARGUMENT 1 /* null pointers, bad keys, bad specs   */
#define SKW_ERR_DOMAIN 2           /* violated invariants or preconditions */
#define SKW_ERR_NOT_CONVERGED 3    /* family member not couplable yet      */
#define SKW_ERR_CONTRACT 4         /* quantifier/contract violations       */
#define SKW_ERR_IO 5               /* file or JSON problems                */
#define SKW_ERR_INTERNAL 6

typedef struct skw_instance skw_instance;
typedef struct skw_tree skw_tree;
typedef struct skw_plan skw_plan;

const char* skw_version(void);

/* Thread-local message describing the most recent failure. */
const char* skw_last_error(void);

void skw_string_free(char* s);

/* ---- instances ---- */

int skw_instance_load_file(const char* path, skw_instance** out);
int skw_instance_load_json(const char* json_text, skw_instance** out);

/* Overridable keys: "delta", "eps", "k_max", "seed", "n". */
int skw_instance_override(skw_instance* instance, const char* key, double value);
int skw_instance_get_param(const skw_instance* instance, const char* key,
                           double* out);

void skw_instance_free(skw_instance* instance);

/* ---- partitions ---- */

int skw_partition_build(const skw_instance* instance, skw_tree** out);
int skw_partition_to_json(const skw_instance* instance, const skw_tree* tree,
                          char** out);
int skw_partition_summary_text(const skw_instance* instance,
                               const skw_tree* tree, char** out);
void skw_tree_free(skw_tree* tree);

/* ---- coupling plans ---- */

int skw_plan_build(const skw_instance* instance, skw_plan** out);
int skw_plan_load_file(const char* path, skw_plan** out);
int skw_plan_load_json(const char* json_text, skw_plan** out);
int skw_plan_to_json(const skw_plan* plan, char** out);
int skw_plan_summary_text(const skw_plan* plan, char** out);
int skw_plan_get_param(const skw_plan* plan, const char* key, double* out);
void skw_plan_free(skw_plan* plan);

/* ---- sampling and verification ---- */

int skw_sample_csv(const skw_plan* plan, unsigned long long seed, long long n,
                   char** out);

/* all_pass is set to 1 when every check in the report passes. */
int skw_verify_run(const skw_plan* plan, unsigned long long seed, long long n,
                   char** report_json, int* all_pass);
int skw_verify_summary_text(const char* report_json, char** out);

/* ---- real-line quantile coupling ---- */

/* grid_spec: "K uniform" or a comma list of u values; exclude_csv: optional
 * comma list of u values to drop from the grid (may be NULL). */
int skw_quantile_run(const skw_instance* instance, const char* grid_spec,
                     const char* exclude_csv, char** csv_out,
                     char** summary_out);

#ifdef __cplusplus
}
#endif

#endif /* SKW_CAPI_H */
