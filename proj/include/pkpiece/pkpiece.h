/* C interface of the pkpiece planner library. */
#ifndef PKPIECE_PKPIECE_H
#define PKPIECE_PKPIECE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PKP_API __declspec(dllexport)
#else
#define PKP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct pkp_scenario pkp_scenario;
typedef struct pkp_plan pkp_plan;

typedef enum pkp_status {
  PKP_OK = 0,
  PKP_ERR_ARGUMENT = 1,
  PKP_ERR_PARSE = 2,
  PKP_ERR_VALIDATION = 3,
  PKP_ERR_IO = 4,
  PKP_ERR_INTERNAL = 5
} pkp_status;

typedef enum pkp_mode { PKP_MODE_PROBABILISTIC = 0, PKP_MODE_BASELINE = 1 } pkp_mode;

typedef struct pkp_step {
  double fx;
  double fy;
  double torque;
  double duration;
  double belief;
} pkp_step;

typedef struct pkp_stats {
  uint64_t iterations;
  uint64_t states;
  uint64_t cells;
  uint64_t nominal_propagations;
  uint64_t particle_propagations;
  uint64_t uncertainty_updates;
  uint64_t em_warnings;
  double wall_time;
} pkp_stats;

/* Called once per finished campaign row with the CSV line (no newline). */
typedef void (*pkp_record_fn)(const char* csv_row, void* user);

PKP_API const char* pkp_version(void);
/* Message of the last failed call on this thread; empty when none. */
PKP_API const char* pkp_last_error(void);
PKP_API const char* pkp_status_name(pkp_status status);

PKP_API pkp_status pkp_scenario_load(const char* path, pkp_scenario** out);
PKP_API pkp_status pkp_scenario_parse(const char* json_text, pkp_scenario** out);
PKP_API pkp_status pkp_scenario_save(const pkp_scenario* scenario, const char* path);
PKP_API pkp_status pkp_scenario_set_param(pkp_scenario* scenario, const char* name, double value);
PKP_API size_t pkp_scenario_object_count(const pkp_scenario* scenario);
PKP_API void pkp_scenario_free(pkp_scenario* scenario);

PKP_API pkp_status pkp_plan_compute(const pkp_scenario* scenario, pkp_mode mode, uint64_t seed, pkp_plan** out);
PKP_API int pkp_plan_solved(const pkp_plan* plan);
PKP_API size_t pkp_plan_length(const pkp_plan* plan);
PKP_API double pkp_plan_duration(const pkp_plan* plan);
PKP_API pkp_status pkp_plan_get_step(const pkp_plan* plan, size_t index, pkp_step* out);
PKP_API pkp_status pkp_plan_get_stats(const pkp_plan* plan, pkp_stats* out);
PKP_API pkp_status pkp_plan_save(const pkp_plan* plan, const char* path);
PKP_API pkp_status pkp_plan_load(const char* path, pkp_plan** out);
PKP_API void pkp_plan_free(pkp_plan* plan);

/* Open-loop replay success fraction; 0 trials yields 0. */
PKP_API pkp_status pkp_replay(const pkp_scenario* scenario, const pkp_plan* plan, int trials, uint64_t seed,
                              double* fraction);

/* Seeds: "A..B" or "1,2,3". Modes: comma list of baseline/probabilistic.
 * Sweep: "name=v1,v2" or NULL. replay_trials < 0 uses the scenario value.
 * Rows go to out_dir/runs.csv; completed rows are not re-run. */
PKP_API pkp_status pkp_bench_run(const pkp_scenario* scenario, const char* seeds, const char* modes,
                                 const char* sweep, const char* out_dir, int replay_trials, pkp_record_fn on_record,
                                 void* user, size_t* planner_invocations);

/* Reads dir/runs.csv and writes records.csv plus SVG charts into dir. */
PKP_API pkp_status pkp_report(const char* dir, size_t* files_written);

#ifdef __cplusplus
}
#endif

#endif
