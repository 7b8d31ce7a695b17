#include "ws/ws.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>

#include "channel.hpp"
#include "codebook.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "sim.hpp"

struct ws_scenario {
  ws::config::ParseResult parsed;
};

struct ws_codebook {
  ws::codebook::Codebook cb;
};

struct ws_result {
  ws::sim::RunResult run;
};

namespace {

thread_local std::string g_last_error;

ws_status to_status(ws::ErrorCode c) {
  switch (c) {
    case ws::ErrorCode::domain: return WS_ERR_DOMAIN;
    case ws::ErrorCode::io: return WS_ERR_IO;
    case ws::ErrorCode::parse: return WS_ERR_PARSE;
    case ws::ErrorCode::config: return WS_ERR_CONFIG;
    case ws::ErrorCode::protocol: return WS_ERR_PROTOCOL;
    case ws::ErrorCode::internal: return WS_ERR_INTERNAL;
  }
  return WS_ERR_INTERNAL;
}

// Runs `f`, mapping exceptions to status codes; no exception crosses the
// C boundary.
template <class F>
ws_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return WS_OK;
  } catch (const ws::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return WS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WS_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Null handles and outputs are argument errors, distinct from domain errors.
#define WS_NEED(p)                                       \
  do {                                                   \
    if (!(p)) {                                          \
      g_last_error = std::string("null argument: ") + #p; \
      return WS_ERR_ARGUMENT;                            \
    }                                                    \
  } while (0)

ws::codebook::GaParams ga_from(const ws_ga_params* p) {
  ws::codebook::GaParams g;
  if (!p) return g;
  g.population = p->population;
  g.tournament = p->tournament;
  g.crossover_p = p->crossover_p;
  g.mutation_sigma_v = p->mutation_sigma_v;
  g.mutation_p = p->mutation_p;
  g.generations = p->generations;
  g.elitism = p->elitism;
  g.quantization_levels = p->quantization_levels;
  g.sidelobe_penalty = p->sidelobe_penalty;
  g.split_penalty = p->split_penalty;
  g.validate();
  return g;
}

ws::channel::LinkBudgetParams budget_from(const ws_linkbudget_params* p) {
  ws::channel::LinkBudgetParams b;
  b.p_gnb_dbm = p->p_gnb_dbm;
  b.l_gnb_db = p->l_gnb_db;
  b.l_window_db = p->l_window_db;
  b.g_ris_rx_dbi = p->g_ris_rx_dbi;
  b.g_ris_tx_dbi = p->g_ris_tx_dbi;
  b.l_ue_db = p->l_ue_db;
  b.g_ue_dbi = p->g_ue_dbi;
  b.p_nf_dbm = p->p_nf_dbm;
  b.l_gnb_s_db = p->l_gnb_s_db;
  b.g_gnb_s_dbi = p->g_gnb_s_dbi;
  return b;
}

std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

}  // namespace

extern "C" {

WS_API const char* ws_status_name(ws_status s) {
  switch (s) {
    case WS_OK: return "ok";
    case WS_ERR_DOMAIN: return "domain";
    case WS_ERR_IO: return "io";
    case WS_ERR_PARSE: return "parse";
    case WS_ERR_CONFIG: return "config";
    case WS_ERR_PROTOCOL: return "protocol";
    case WS_ERR_INTERNAL: return "internal";
    case WS_ERR_ARGUMENT: return "argument";
  }
  return "unknown";
}

WS_API const char* ws_last_error(void) { return g_last_error.c_str(); }

WS_API void ws_string_free(char* s) { std::free(s); }

// --- channel -------------------------------------------------------------------

WS_API ws_status ws_fspl_db(double distance_m, double carrier_ghz, double* out_db) {
  WS_NEED(out_db);
  return guarded([&] { *out_db = ws::channel::fspl_db(distance_m, carrier_ghz); });
}

WS_API void ws_linkbudget_defaults(ws_linkbudget_params* p) {
  if (!p) return;
  const ws::channel::LinkBudgetParams d;
  *p = {d.p_gnb_dbm, d.l_gnb_db,  d.l_window_db, d.g_ris_rx_dbi, d.g_ris_tx_dbi,
        d.l_ue_db,   d.g_ue_dbi,  d.p_nf_dbm,    d.l_gnb_s_db,   d.g_gnb_s_dbi};
}

WS_API ws_status ws_linkbudget(const ws_linkbudget_params* p, ws_budget_kind kind,
                               double* total_db, char** text) {
  WS_NEED(p);
  return guarded([&] {
    const auto b = budget_from(p);
    const bool ue = kind == WS_BUDGET_SNR_UE;
    if (!ue && kind != WS_BUDGET_SNR_GNB) ws::fail(ws::ErrorCode::domain, "unknown budget kind");
    const auto r = ue ? ws::channel::snr_ue(b) : ws::channel::snr_gnb(b);
    if (total_db) *total_db = r.total_db;
    if (text) {
      std::string out;
      for (const auto& t : r.terms)
        out += "  " + t.name + " " + (t.value_db >= 0 ? "+" : "") +
               ws::io::format_double(t.value_db) + " dB\n";
      out += std::string(ue ? "SNR_UE" : "SNR_gNB") + " = " + fixed1(r.total_db) + " dB\n";
      *text = dup_string(out);
    }
  });
}

// --- scenario ------------------------------------------------------------------

WS_API ws_status ws_scenario_load(const char* path, ws_scenario** out) {
  WS_NEED(path);
  WS_NEED(out);
  return guarded([&] { *out = new ws_scenario{ws::config::parse_config(path)}; });
}

WS_API ws_status ws_scenario_parse(const char* text, const char* origin, ws_scenario** out) {
  WS_NEED(text);
  WS_NEED(out);
  return guarded([&] {
    *out = new ws_scenario{ws::config::parse_config_text(text, origin ? origin : "<config>")};
  });
}

WS_API void ws_scenario_free(ws_scenario* s) { delete s; }

WS_API ws_status ws_scenario_set_seed(ws_scenario* s, uint64_t seed) {
  WS_NEED(s);
  return guarded([&] { s->parsed.scenario.noise.seed = seed; });
}

WS_API ws_status ws_scenario_set_protocol(ws_scenario* s, const char* protocol) {
  WS_NEED(s);
  WS_NEED(protocol);
  return guarded([&] {
    auto sc = s->parsed.scenario;
    sc.protocol.protocol = ws::handover::protocol_from_string(protocol);
    if (sc.protocol.protocol != ws::handover::Protocol::wall_street) sc.protocol.mbb_hold = false;
    sc.validate();
    s->parsed.scenario = std::move(sc);
  });
}

WS_API ws_status ws_scenario_set_codebook_path(ws_scenario* s, const char* path) {
  WS_NEED(s);
  WS_NEED(path);
  return guarded([&] { s->parsed.scenario.surface.codebook_path = path; });
}

WS_API ws_status ws_scenario_canonical(const ws_scenario* s, char** text) {
  WS_NEED(s);
  WS_NEED(text);
  return guarded([&] { *text = dup_string(ws::config::emit_canonical(s->parsed.scenario)); });
}

WS_API ws_status ws_scenario_defaults(const ws_scenario* s, char** text) {
  WS_NEED(s);
  WS_NEED(text);
  return guarded([&] {
    std::string out;
    for (const auto& d : s->parsed.defaults_applied) out += d + "\n";
    *text = dup_string(out);
  });
}

WS_API const char* ws_scenario_name(const ws_scenario* s) {
  return s ? s->parsed.scenario.name.c_str() : "";
}

WS_API const char* ws_scenario_trace_file(const ws_scenario* s) {
  return s ? s->parsed.scenario.output.trace_file.c_str() : "";
}

WS_API const char* ws_scenario_metrics_file(const ws_scenario* s) {
  return s ? s->parsed.scenario.output.metrics_file.c_str() : "";
}

WS_API const char* ws_scenario_protocol(const ws_scenario* s) {
  return s ? ws::handover::to_string(s->parsed.scenario.protocol.protocol) : "";
}

WS_API const char* ws_scenario_codebook_path(const ws_scenario* s) {
  return s ? s->parsed.scenario.surface.codebook_path.c_str() : "";
}

// --- codebook ------------------------------------------------------------------

WS_API void ws_ga_defaults(ws_ga_params* p) {
  if (!p) return;
  const ws::codebook::GaParams d;
  *p = {d.population, d.tournament, d.crossover_p,         d.mutation_sigma_v, d.mutation_p,
        d.generations, d.elitism,   d.quantization_levels, d.sidelobe_penalty, d.split_penalty};
}

WS_API ws_status ws_codebook_synth_scenario(const ws_scenario* s, uint64_t seed,
                                            const ws_ga_params* ga, int threads,
                                            ws_codebook** out) {
  WS_NEED(s);
  WS_NEED(out);
  return guarded([&] {
    auto cb = ws::sim::synth_codebook(s->parsed.scenario, seed, ga_from(ga), threads);
    *out = new ws_codebook{std::move(cb)};
  });
}

WS_API ws_status ws_codebook_synth_grid(const ws_surface_geometry* g, const double* theta_t,
                                        size_t n_theta_t, const double* theta_r,
                                        size_t n_theta_r, const double* alpha, size_t n_alpha,
                                        const char* mode, uint64_t seed, const ws_ga_params* ga,
                                        int threads, ws_codebook** out) {
  WS_NEED(g);
  WS_NEED(mode);
  WS_NEED(out);
  WS_NEED(theta_t || !n_theta_t);
  WS_NEED(theta_r || !n_theta_r);
  WS_NEED(alpha || !n_alpha);
  return guarded([&] {
    ws::surface::SurfaceGeometry geo{g->n_elements, g->element_spacing, g->carrier_ghz};
    geo.validate();
    const auto keys = ws::codebook::grid_keys({theta_t, n_theta_t}, {theta_r, n_theta_r},
                                              {alpha, n_alpha},
                                              ws::codebook::key_mode_from_string(mode));
    auto cb = ws::codebook::build_codebook(keys, geo, g->incident_deg, seed, ga_from(ga), threads);
    *out = new ws_codebook{std::move(cb)};
  });
}

WS_API ws_status ws_codebook_load(const char* path, ws_codebook** out) {
  WS_NEED(path);
  WS_NEED(out);
  return guarded([&] { *out = new ws_codebook{ws::codebook::load_codebook(path)}; });
}

WS_API ws_status ws_codebook_save(const ws_codebook* cb, const char* path) {
  WS_NEED(cb);
  WS_NEED(path);
  return guarded([&] { ws::codebook::save_codebook(cb->cb, path); });
}

WS_API void ws_codebook_free(ws_codebook* cb) { delete cb; }

WS_API size_t ws_codebook_size(const ws_codebook* cb) { return cb ? cb->cb.size() : 0; }

WS_API ws_status ws_codebook_export(const ws_codebook* cb, char** text) {
  WS_NEED(cb);
  WS_NEED(text);
  return guarded([&] { *text = dup_string(ws::codebook::export_text(cb->cb)); });
}

WS_API ws_status ws_codebook_eval(const ws_codebook* cb, char** table, double* max_dev_db) {
  WS_NEED(cb);
  return guarded([&] {
    using ws::io::format_double;
    std::string out = "mode,theta_t_deg,theta_r_deg,alpha,g_w_tra_db,g_w_ref_db,"
                      "eval_g_w_tra_db,eval_g_w_ref_db\n";
    double worst = 0.0;
    const auto dev = [](double a, double b) {
      if (!std::isfinite(a) && !std::isfinite(b)) return 0.0;
      return std::abs(a - b);
    };
    for (const auto& [k, e] : cb->cb.entries()) {
      const auto r = ws::codebook::finish_entry(k, e.config, cb->cb.geometry(),
                                                cb->cb.incident_deg());
      worst = std::max({worst, dev(r.g_w_tra_db, e.g_w_tra_db), dev(r.g_w_ref_db, e.g_w_ref_db)});
      out += std::string(ws::codebook::to_string(k.mode)) + "," + format_double(k.theta_t_deg) +
             "," + format_double(k.theta_r_deg) + "," + format_double(k.alpha) + "," +
             format_double(e.g_w_tra_db) + "," + format_double(e.g_w_ref_db) + "," +
             format_double(r.g_w_tra_db) + "," + format_double(r.g_w_ref_db) + "\n";
    }
    if (max_dev_db) *max_dev_db = worst;
    if (table) *table = dup_string(out);
  });
}

// --- simulation ----------------------------------------------------------------

WS_API ws_status ws_sim_run(const ws_scenario* s, const ws_codebook* cb, ws_result** out) {
  WS_NEED(s);
  WS_NEED(out);
  return guarded([&] {
    *out = new ws_result{ws::sim::run(s->parsed.scenario, cb ? &cb->cb : nullptr)};
  });
}

WS_API void ws_result_free(ws_result* r) { delete r; }

WS_API ws_status ws_result_summary(const ws_result* r, ws_run_summary* out) {
  WS_NEED(r);
  WS_NEED(out);
  return guarded([&] {
    const auto& m = r->run.metrics;
    double bits = 0.0;
    for (const auto& u : m.ues) bits += u.delivered_bits;
    *out = {m.duration_ms, m.ho_count,        m.ping_pong_count,
            m.handover_actions, m.decisions,  m.reverts,
            m.mr_events,   m.reconfig_count,  m.measurement_interruption_ms,
            m.outage_ms,   bits};
  });
}

WS_API ws_status ws_result_write_trace(const ws_result* r, const char* path) {
  WS_NEED(r);
  WS_NEED(path);
  return guarded([&] { ws::io::write_file_atomic(path, ws::sim::format_trace(r->run.trace)); });
}

WS_API ws_status ws_result_write_metrics(const ws_result* r, const char* path) {
  WS_NEED(r);
  WS_NEED(path);
  return guarded(
      [&] { ws::io::write_file_atomic(path, ws::sim::format_metrics(r->run.metrics)); });
}

WS_API ws_status ws_sim_compare(const ws_scenario* s, const char* const* protocols,
                                size_t n_protocols, const ws_codebook* cb, char** report) {
  WS_NEED(s);
  WS_NEED(protocols);
  WS_NEED(report);
  for (size_t i = 0; i < n_protocols; ++i) WS_NEED(protocols[i]);
  return guarded([&] {
    std::vector<ws::handover::Protocol> ps;
    for (size_t i = 0; i < n_protocols; ++i)
      ps.push_back(ws::handover::protocol_from_string(protocols[i]));
    const auto r = ws::sim::compare(s->parsed.scenario, ps, cb ? &cb->cb : nullptr);
    *report = dup_string(ws::sim::format_compare(r));
  });
}

WS_API ws_status ws_trace_export(const char* trace_path, const char* event_prefix,
                                 const char* csv_path) {
  WS_NEED(trace_path);
  WS_NEED(csv_path);
  return guarded([&] {
    const auto records = ws::sim::parse_trace(ws::io::read_file(trace_path), trace_path);
    const std::string prefix = event_prefix ? event_prefix : "";
    std::vector<ws::sim::TraceRecord> kept;
    for (const auto& r : records)
      if (r.event.starts_with(prefix)) kept.push_back(r);
    ws::io::write_file_atomic(csv_path, ws::sim::format_trace(kept));
  });
}

WS_API ws_status ws_write_text(const char* path, const char* text) {
  WS_NEED(path);
  WS_NEED(text);
  return guarded([&] { ws::io::write_file_atomic(path, text); });
}

}  // extern "C"
