#ifndef WS_H
#define WS_H

/* C interface to the vehicle-mounted surface simulator: link budget,
 * codebook synthesis and storage, scenario files, simulation runs and
 * protocol comparison. Handles are opaque and owned by the caller; every
 * call returns a ws_status and leaves a thread-local message readable via
 * ws_last_error(). Strings returned through char** are freed with
 * ws_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(WS_BUILDING_LIBRARY)
#define WS_API __attribute__((visibility("default")))
#else
#define WS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ws_status {
  WS_OK = 0,
  WS_ERR_DOMAIN = 1,   /* argument outside the operation's domain */
  WS_ERR_IO = 2,       /* file could not be read or written */
  WS_ERR_PARSE = 3,    /* malformed input */
  WS_ERR_CONFIG = 4,   /* semantically invalid configuration */
  WS_ERR_PROTOCOL = 5, /* illegal protocol state transition */
  WS_ERR_INTERNAL = 6,
  WS_ERR_ARGUMENT = 7  /* null handle or output pointer */
} ws_status;

typedef struct ws_scenario ws_scenario;
typedef struct ws_codebook ws_codebook;
typedef struct ws_result ws_result;

WS_API const char* ws_status_name(ws_status s);
/* Message of the last failed call on this thread; "" after a success. */
WS_API const char* ws_last_error(void);
WS_API void ws_string_free(char* s);

/* --- channel ------------------------------------------------------------ */

WS_API ws_status ws_fspl_db(double distance_m, double carrier_ghz, double* out_db);

typedef struct ws_linkbudget_params {
  double p_gnb_dbm;
  double l_gnb_db;
  double l_window_db;
  double g_ris_rx_dbi;
  double g_ris_tx_dbi;
  double l_ue_db;
  double g_ue_dbi;
  double p_nf_dbm;
  double l_gnb_s_db;
  double g_gnb_s_dbi;
} ws_linkbudget_params;

typedef enum ws_budget_kind { WS_BUDGET_SNR_UE = 0, WS_BUDGET_SNR_GNB = 1 } ws_budget_kind;

WS_API void ws_linkbudget_defaults(ws_linkbudget_params* p);
/* Text lists one signed term per line and ends with "<NAME> = <total> dB"
 * rounded to 0.1 dB. Either output may be null. */
WS_API ws_status ws_linkbudget(const ws_linkbudget_params* p, ws_budget_kind kind,
                               double* total_db, char** text);

/* --- scenario ----------------------------------------------------------- */

WS_API ws_status ws_scenario_load(const char* path, ws_scenario** out);
WS_API ws_status ws_scenario_parse(const char* text, const char* origin, ws_scenario** out);
WS_API void ws_scenario_free(ws_scenario* s);
WS_API ws_status ws_scenario_set_seed(ws_scenario* s, uint64_t seed);
/* "sa-baseline" or "wall-street". */
WS_API ws_status ws_scenario_set_protocol(ws_scenario* s, const char* protocol);
WS_API ws_status ws_scenario_set_codebook_path(ws_scenario* s, const char* path);
/* Canonical text with every key spelled out. */
WS_API ws_status ws_scenario_canonical(const ws_scenario* s, char** text);
/* One "section.key = value" line per default that filled a missing key. */
WS_API ws_status ws_scenario_defaults(const ws_scenario* s, char** text);
/* Borrowed strings, valid while the handle lives. */
WS_API const char* ws_scenario_name(const ws_scenario* s);
WS_API const char* ws_scenario_trace_file(const ws_scenario* s);
WS_API const char* ws_scenario_metrics_file(const ws_scenario* s);
WS_API const char* ws_scenario_protocol(const ws_scenario* s);
/* "" when the scenario names no codebook file. */
WS_API const char* ws_scenario_codebook_path(const ws_scenario* s);

/* --- codebook ----------------------------------------------------------- */

typedef struct ws_ga_params {
  int population;
  int tournament;
  double crossover_p;
  double mutation_sigma_v;
  double mutation_p;
  int generations;
  int elitism;
  int quantization_levels;
  double sidelobe_penalty;
  double split_penalty;
} ws_ga_params;

typedef struct ws_surface_geometry {
  int n_elements;
  double element_spacing; /* wavelengths */
  double carrier_ghz;
  double incident_deg;    /* incidence the codebook is built for */
} ws_surface_geometry;

WS_API void ws_ga_defaults(ws_ga_params* p);
/* Every key the scenario's trajectory can touch. `ga` may be null; its
 * split_penalty is replaced by the scenario's surface.split_penalty. */
WS_API ws_status ws_codebook_synth_scenario(const ws_scenario* s, uint64_t seed,
                                            const ws_ga_params* ga, int threads,
                                            ws_codebook** out);
/* Cartesian grid of keys; mode is "single", "dual-transflective" or
 * "dual-transmissive". */
WS_API ws_status ws_codebook_synth_grid(const ws_surface_geometry* g, const double* theta_t,
                                        size_t n_theta_t, const double* theta_r,
                                        size_t n_theta_r, const double* alpha, size_t n_alpha,
                                        const char* mode, uint64_t seed, const ws_ga_params* ga,
                                        int threads, ws_codebook** out);
WS_API ws_status ws_codebook_load(const char* path, ws_codebook** out);
WS_API ws_status ws_codebook_save(const ws_codebook* cb, const char* path);
WS_API void ws_codebook_free(ws_codebook* cb);
WS_API size_t ws_codebook_size(const ws_codebook* cb);
WS_API ws_status ws_codebook_export(const ws_codebook* cb, char** text);
/* Recomputes every entry's gains from its stored voltages. Table columns:
 * key, stored and recomputed g_w_tra / g_w_ref. `max_dev_db` receives the
 * largest absolute difference. */
WS_API ws_status ws_codebook_eval(const ws_codebook* cb, char** table, double* max_dev_db);

/* --- simulation --------------------------------------------------------- */

typedef struct ws_run_summary {
  long duration_ms;
  long ho_count;
  long ping_pong_count;
  long handover_actions;
  long decisions;
  long reverts;
  long mr_events;
  long reconfig_count;
  long measurement_interruption_ms;
  long outage_ms;
  double delivered_bits;
} ws_run_summary;

/* `cb` may be null for baseline runs or when the scenario names a codebook. */
WS_API ws_status ws_sim_run(const ws_scenario* s, const ws_codebook* cb, ws_result** out);
WS_API void ws_result_free(ws_result* r);
WS_API ws_status ws_result_summary(const ws_result* r, ws_run_summary* out);
/* Atomic writes: a failed call leaves no partial file. */
WS_API ws_status ws_result_write_trace(const ws_result* r, const char* path);
WS_API ws_status ws_result_write_metrics(const ws_result* r, const char* path);

/* Runs each protocol on copies of the scenario; text report. */
WS_API ws_status ws_sim_compare(const ws_scenario* s, const char* const* protocols,
                                size_t n_protocols, const ws_codebook* cb, char** report);

/* Tidy CSV of the trace records whose event starts with `event_prefix`
 * (all records when empty or null). */
WS_API ws_status ws_trace_export(const char* trace_path, const char* event_prefix,
                                 const char* csv_path);

/* Writes `text` atomically. */
WS_API ws_status ws_write_text(const char* path, const char* text);

#ifdef __cplusplus
}
#endif

#endif
