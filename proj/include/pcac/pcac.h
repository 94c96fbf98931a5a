/* C interface to the adaptive predictive flight-control simulator. */
#ifndef PCAC_PCAC_H
#define PCAC_PCAC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PCAC_BUILDING_LIBRARY)
#    define PCAC_API __declspec(dllexport)
#  else
#    define PCAC_API __declspec(dllimport)
#  endif
#else
#  define PCAC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pcac_status {
  PCAC_OK = 0,
  PCAC_ERR_INVALID_ARGUMENT = 1,
  PCAC_ERR_CONFIG = 2,
  PCAC_ERR_IO = 3,
  PCAC_ERR_OUT_OF_RANGE = 4,
  PCAC_ERR_INTERNAL = 5
} pcac_status;

typedef struct pcac_scenario pcac_scenario;
typedef struct pcac_run pcac_run;

PCAC_API const char* pcac_version(void);
PCAC_API const char* pcac_status_string(pcac_status status);

/* Message for the most recent failure on the calling thread; "" if none. */
PCAC_API const char* pcac_last_error(void);

/* Scenarios. Handles returned through `out` are owned by the caller. */
PCAC_API pcac_status pcac_scenario_load(const char* path, pcac_scenario** out);
PCAC_API pcac_status pcac_scenario_parse(const char* yaml_text, pcac_scenario** out);
/* "example1" takes theta0_bar as `parameter`; "example2" takes the mass ratio. */
PCAC_API pcac_status pcac_scenario_preset(const char* name, double parameter, pcac_scenario** out);
/* Replaces one value by dotted key path, e.g. "identification.vrf.eta". The
   scenario is left unchanged if the result does not validate. */
PCAC_API pcac_status pcac_scenario_override(pcac_scenario* scenario, const char* key_path, const char* value);
PCAC_API pcac_status pcac_scenario_set_seed(pcac_scenario* scenario, uint64_t seed);
PCAC_API const char* pcac_scenario_name(const pcac_scenario* scenario);
/* Normalized YAML for the scenario; valid until the handle changes or is freed. */
PCAC_API const char* pcac_scenario_yaml(const pcac_scenario* scenario);
PCAC_API void pcac_scenario_free(pcac_scenario* scenario);

/* Runs the closed loop. A simulation fault still yields PCAC_OK and a run
   holding the partial trace; query it with pcac_run_faulted. */
PCAC_API pcac_status pcac_simulate(const pcac_scenario* scenario, pcac_run** out);

PCAC_API int pcac_run_faulted(const pcac_run* run);
PCAC_API const char* pcac_run_fault_kind(const pcac_run* run);
PCAC_API const char* pcac_run_fault_message(const pcac_run* run);
PCAC_API double pcac_run_fault_time(const pcac_run* run);
PCAC_API double pcac_run_min_covariance_eigenvalue(const pcac_run* run);
PCAC_API size_t pcac_run_length(const pcac_run* run);

/* Trace rows follow the CSV column order. */
PCAC_API size_t pcac_trace_column_count(void);
PCAC_API const char* pcac_trace_column_name(size_t index);
PCAC_API pcac_status pcac_run_record(const pcac_run* run, size_t index, double* row, size_t row_length);
/* True input-matrix parameters for the plant at record `index` (12 values). */
PCAC_API pcac_status pcac_run_true_theta(const pcac_run* run, size_t index, double* theta, size_t length);

PCAC_API pcac_status pcac_run_write_csv(const pcac_run* run, const char* path);
/* Writes one SVG per panel group into `directory`, named <stem>_<group>.svg.
   `written` (optional) receives the number of files. */
PCAC_API pcac_status pcac_run_write_plots(const pcac_run* run, const char* directory, const char* stem,
                                          size_t* written);
PCAC_API void pcac_run_free(pcac_run* run);

/* Hover linearization, discretized; matrices row-major (12x12 and 12x4). */
PCAC_API pcac_status pcac_hover_model(double mass, const double inertia[3], double gravity, double sample_time,
                                      double ad[144], double bd[48]);
PCAC_API pcac_status pcac_true_theta(double mass, const double inertia[3], double gravity, double sample_time,
                                     double theta[12]);

typedef void (*pcac_verify_callback)(const char* name, int passed, double max_error, double tolerance,
                                     const char* detail, void* user_data);
/* Runs the built-in reference checks, reporting each through `callback`. */
PCAC_API pcac_status pcac_verify(pcac_verify_callback callback, void* user_data, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif
