#ifndef ROLEGRAPH_ROLEGRAPH_H
#define ROLEGRAPH_ROLEGRAPH_H

#include <stddef.h>
#include <stdint.h>

#if defined(ROLEGRAPH_BUILDING)
#define RG_API __attribute__((visibility("default")))
#else
#define RG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rg_status {
  RG_OK = 0,
  RG_ERR_INVALID_ARGUMENT = 1,
  RG_ERR_IO = 2,
  RG_ERR_MALFORMED = 3,
  RG_ERR_CONFIG = 4,
  RG_ERR_SCHEMA_MISMATCH = 5,
  RG_ERR_SPAN = 6,
  RG_ERR_EMPTY_GRAPH = 7,
  RG_ERR_DIMENSION = 8,
  RG_ERR_INTERNAL = 99
} rg_status;

RG_API const char* rg_status_string(rg_status status);

/* Message of the last failed call on this thread; "" when none. */
RG_API const char* rg_last_error_message(void);

RG_API const char* rg_version(void);

/* Pipeline configuration ------------------------------------------------ */

typedef struct rg_config rg_config;

RG_API rg_status rg_config_new(rg_config** out);
RG_API rg_status rg_config_load(const char* path, rg_config** out);
/* key is "section.key", e.g. "score.threshold". Relative paths resolve
 * against the working directory. */
RG_API rg_status rg_config_set(rg_config* cfg, const char* key, const char* value);
RG_API void rg_config_free(rg_config* cfg);

typedef struct rg_train_summary {
  size_t alerts;
  size_t skipped;
  size_t warnings;
  size_t nodes;
  size_t edges;
  int64_t total_weight;
  size_t features;
  int num_roles;
  int num_bits;
} rg_train_summary;

typedef struct rg_score_summary {
  size_t windows;
  size_t scored;
  size_t flagged;
  double max_score;
} rg_score_summary;

typedef struct rg_simulate_summary {
  size_t alerts;
  size_t attack_alerts;
  int64_t windows;
} rg_simulate_summary;

/* Summaries may be NULL. */
RG_API rg_status rg_train(const rg_config* cfg, const char* out_dir, rg_train_summary* summary);
RG_API rg_status rg_score(const rg_config* cfg, const char* model_dir, const char* out_dir,
                          rg_score_summary* summary);
/* *text receives the report summary; release it with rg_string_free. text may be NULL. */
RG_API rg_status rg_report(const char* scores_csv, const char* out_dir, char** text);
/* A nonzero has_seed replaces the scenario's seed. */
RG_API rg_status rg_simulate(const char* scenario_path, const char* out_dir, int has_seed,
                             uint64_t seed, rg_simulate_summary* summary);
RG_API void rg_string_free(char* text);

/* Artifact graphs -------------------------------------------------------- */

typedef struct rg_graph rg_graph;

typedef struct rg_graph_summary {
  size_t nodes;
  size_t edges;
  int64_t total_weight;
  size_t layers;
} rg_graph_summary;

RG_API rg_status rg_graph_new(rg_graph** out);
/* Adds one alert given as n field-key/value pairs. Keys are canonicalized
 * ("sid" -> "sig_id", ...). Alerts with sig_id need src_ip and dst_ip,
 * others need rule_id and logfile. */
RG_API rg_status rg_graph_add_alert(rg_graph* g, const char* const* keys, const char* const* values,
                                    size_t n);
RG_API rg_status rg_graph_summary_get(rg_graph* g, rg_graph_summary* out);
/* Tab-separated edge list, or Graphviz DOT when dot is nonzero. */
RG_API rg_status rg_graph_write(rg_graph* g, const char* path, int dot);
RG_API void rg_graph_free(rg_graph* g);

/* Trained models --------------------------------------------------------- */

typedef struct rg_model rg_model;

RG_API rg_status rg_model_load(const char* dir, rg_model** out);
RG_API int rg_model_num_roles(const rg_model* m);
RG_API int rg_model_num_bits(const rg_model* m);
RG_API size_t rg_model_num_features(const rg_model* m);
/* F(role, feature); NaN when out of range. */
RG_API double rg_model_role_value(const rg_model* m, int role, size_t feature);
RG_API void rg_model_free(rg_model* m);

#ifdef __cplusplus
}
#endif

#endif
