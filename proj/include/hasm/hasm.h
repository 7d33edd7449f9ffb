#ifndef HASM_HASM_H
#define HASM_HASM_H

#include <stddef.h>
#include <stdint.h>

#if defined(HASM_BUILDING_LIBRARY)
#define HASM_API __attribute__((visibility("default")))
#else
#define HASM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hasm_status {
  HASM_OK = 0,
  HASM_ERR_INVALID_ARGUMENT = 1,
  HASM_ERR_CONFIG = 2,
  HASM_ERR_DATA = 3,
  HASM_ERR_DIMENSION = 4,
  HASM_ERR_IO = 5,
  HASM_ERR_STATE = 6,
  HASM_ERR_INTERNAL = 7
} hasm_status;

typedef struct hasm_config hasm_config;
typedef struct hasm_bank hasm_bank;
typedef struct hasm_session hasm_session;

/* Version string of the shared library, e.g. "1.0.0". */
HASM_API const char* hasm_version(void);

/* Message of the last failed call on this thread; "" after a success. */
HASM_API const char* hasm_last_error(void);
HASM_API const char* hasm_status_name(hasm_status status);

/* Configuration. */
HASM_API hasm_status hasm_config_default(hasm_config** out);
HASM_API hasm_status hasm_config_compliance(hasm_config** out);
HASM_API hasm_status hasm_config_load(const char* path, hasm_config** out);
HASM_API hasm_status hasm_config_set_seed(hasm_config* config, uint64_t seed);
HASM_API hasm_status hasm_config_set_beta(hasm_config* config, double beta);
HASM_API hasm_status hasm_config_dimension(const hasm_config* config, size_t* out);
HASM_API hasm_status hasm_config_joint_count(const hasm_config* config, size_t* out);
HASM_API void hasm_config_free(hasm_config* config);

/* Stateless building blocks. Output buffers are caller-owned. */
HASM_API hasm_status hasm_encode_joints(const hasm_config* config, const double* angles, size_t n_angles,
                                        double* out, size_t out_len);
HASM_API hasm_status hasm_embed(const hasm_config* config, const char* patch_id, const double* angles,
                                size_t n_angles, double rho, double* out, size_t out_len);
HASM_API hasm_status hasm_rope3d(const double* vec, size_t dimension, const double axis[3], double theta,
                                 double* out);
HASM_API hasm_status hasm_bind(const double* a, const double* b, size_t dimension, double* out);

/* Writes a recording. scenario: "compliance-sweep", "grasp-sequence" or
   "custom-script"; options_json may be NULL for defaults (see docs). */
HASM_API hasm_status hasm_record(const hasm_config* config, const char* scenario, const char* options_json,
                                 const char* out_path, size_t* out_records);

typedef struct hasm_train_stats {
  size_t states;
  size_t paired;
  size_t dropped;
  size_t sequences;
  size_t episodes;
  size_t columns;
} hasm_train_stats;

HASM_API hasm_status hasm_train(const hasm_config* config, const char* const* recording_paths, size_t n_paths,
                                const char* patch_id, hasm_train_stats* stats, hasm_bank** out);

typedef struct hasm_bank_info {
  size_t dimension;
  size_t columns;
  size_t joints;
  double beta;
  char patch_id[64];
} hasm_bank_info;

HASM_API hasm_status hasm_bank_save(const hasm_bank* bank, const char* path);
/* With a config, a bank trained for a different encoder is rejected
   (HASM_ERR_CONFIG). config may be NULL to skip the check. */
HASM_API hasm_status hasm_bank_load(const hasm_config* config, const char* path, hasm_bank** out);
HASM_API hasm_status hasm_bank_info_get(const hasm_bank* bank, hasm_bank_info* out);
HASM_API hasm_status hasm_bank_recall(const hasm_bank* bank, const double* angles, size_t n_angles, double rho,
                                      double* out_target, double* out_entropy);
HASM_API void hasm_bank_free(hasm_bank* bank);

typedef struct hasm_eval_metrics {
  size_t ticks;
  size_t recalls;
  double entropy_mean; /* NaN without recalls */
  double entropy_min;
  double entropy_max;
  /* sequence / replay */
  double replay_max_error;
  double replay_worst_ratio; /* max over joints of error / quantization resolution */
  size_t replay_steps;
  size_t replay_missed;
  /* compliance */
  double spearman; /* lowest over evaluated patches, NaN if not run */
  int compliance_increasing;
  int compliance_opposite_signs;
} hasm_eval_metrics;

/* scenario: "compliance", "sequence" (options {"recording": path}) or
   "script" (options {"touches": [...], "duration": s, "start": [...]}).
   out_csv may be NULL. */
HASM_API hasm_status hasm_eval(const hasm_config* config, const hasm_bank* const* banks, size_t n_banks,
                               const char* scenario, const char* options_json, const char* out_csv,
                               hasm_eval_metrics* out);

/* Drives the closed loop with the forces stored in a recording. */
HASM_API hasm_status hasm_replay(const hasm_config* config, const hasm_bank* const* banks, size_t n_banks,
                                 const char* recording_path, const char* out_csv, hasm_eval_metrics* out);

/* Live session: tick loop plus /session WebSocket and /healthz. */
HASM_API hasm_status hasm_session_create(const hasm_config* config, hasm_session** out);
HASM_API hasm_status hasm_session_load_bank(hasm_session* session, const hasm_bank* bank);
HASM_API hasm_status hasm_session_start(hasm_session* session, const char* address, uint16_t port);
HASM_API hasm_status hasm_session_port(const hasm_session* session, uint16_t* out);
HASM_API hasm_status hasm_session_tick_count(const hasm_session* session, uint64_t* out);
HASM_API hasm_status hasm_session_stop(hasm_session* session);
HASM_API void hasm_session_free(hasm_session* session);

#ifdef __cplusplus
}
#endif

#endif
