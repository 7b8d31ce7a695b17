// wsim: command-line front end over the C API.
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
// Data goes to stdout; diagnostics and the resolved configuration to stderr.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ws/ws.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Failure {
  int code;
};

int exit_code(ws_status s) {
  switch (s) {
    case WS_ERR_PARSE:
    case WS_ERR_CONFIG:
    case WS_ERR_ARGUMENT: return kExitUsage;
    default: return kExitRuntime;
  }
}

void check(ws_status s, const std::string& what) {
  if (s == WS_OK) return;
  std::cerr << "wsim: " << what << ": " << ws_status_name(s) << " error: " << ws_last_error()
            << "\n";
  throw Failure{exit_code(s)};
}

[[noreturn]] void usage(const std::string& msg) {
  std::cerr << "wsim: " << msg << "\n";
  throw Failure{kExitUsage};
}

// Owns a string allocated by the library.
std::string take(char* s) {
  std::string out = s ? s : "";
  ws_string_free(s);
  return out;
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};
using Scenario = Handle<ws_scenario, ws_scenario_free>;
using Codebook = Handle<ws_codebook, ws_codebook_free>;
using Result = Handle<ws_result, ws_result_free>;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

struct GaFlags {
  std::optional<int> generations;
  std::optional<int> population;
  std::optional<int> quantization_levels;
  int threads = 1;

  void add(CLI::App* app) {
    app->add_option("--generations", generations, "GA generations");
    app->add_option("--population", population, "GA population size");
    app->add_option("--quant-levels", quantization_levels, "voltage levels (0 = continuous)");
    app->add_option("--threads", threads, "synthesis worker threads")->check(CLI::PositiveNumber);
  }
  ws_ga_params params() const {
    ws_ga_params p;
    ws_ga_defaults(&p);
    if (generations) p.generations = *generations;
    if (population) p.population = *population;
    if (quantization_levels) p.quantization_levels = *quantization_levels;
    return p;
  }
};

std::string out_path(const Globals& g, const std::string& name) {
  std::error_code ec;
  fs::create_directories(g.out_dir, ec);
  if (ec) {
    std::cerr << "wsim: cannot create output directory " << g.out_dir << ": " << ec.message()
              << "\n";
    throw Failure{kExitRuntime};
  }
  return (fs::path(g.out_dir) / name).string();
}

// Loads the scenario, applies --seed, and logs the resolved configuration.
void load_scenario(const Globals& g, Scenario& s) {
  if (g.config.empty()) usage("--config is required");
  check(ws_scenario_load(g.config.c_str(), &s.p), "loading " + g.config);
  if (g.seed) check(ws_scenario_set_seed(s.p, *g.seed), "setting seed");
  char* text = nullptr;
  check(ws_scenario_defaults(s.p, &text), "listing defaults");
  const std::string defaults = take(text);
  check(ws_scenario_canonical(s.p, &text), "emitting configuration");
  std::cerr << "# resolved configuration (" << g.config << ")\n" << take(text);
  std::cerr << "# defaults applied\n";
  if (defaults.empty()) std::cerr << "#   (none)\n";
  for (std::size_t pos = 0; pos < defaults.size();) {
    const auto end = defaults.find('\n', pos);
    std::cerr << "#   " << defaults.substr(pos, end - pos) << "\n";
    pos = end == std::string::npos ? defaults.size() : end + 1;
  }
}

// Codebook for a run: --codebook, else the scenario's own path, else a fresh
// synthesis over the scenario's keys.
void resolve_codebook(const Globals& g, const std::string& path, const GaFlags& ga,
                      const Scenario& s, bool needed, Codebook& cb) {
  if (!path.empty()) {
    check(ws_codebook_load(path.c_str(), &cb.p), "loading codebook " + path);
    return;
  }
  if (!needed || *ws_scenario_codebook_path(s.p)) return;
  std::cerr << "# no codebook given; synthesizing the scenario's keys\n";
  const auto p = ga.params();
  check(ws_codebook_synth_scenario(s.p, g.seed.value_or(1), &p, ga.threads, &cb.p),
        "synthesizing codebook");
}

std::vector<double> parse_list(const std::string& flag, const std::string& v) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto end = std::min(v.find(',', pos), v.size());
    const std::string item = v.substr(pos, end - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      usage(flag + ": not a number list: '" + v + "'");
    }
    pos = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vehicle-mounted metasurface handover simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "scenario file");
  app.add_option("--seed", g.seed, "seed for noise and synthesis");
  app.add_option("--out-dir", g.out_dir, "directory for output files");

  // codebook
  auto* cb_cmd = app.add_subcommand("codebook", "codebook synthesis and inspection");
  cb_cmd->require_subcommand(1);
  auto* synth = cb_cmd->add_subcommand("synth", "synthesize a codebook");
  GaFlags synth_ga;
  synth_ga.add(synth);
  std::string synth_out = "codebook.wscb", synth_mode = "single";
  std::string synth_tt, synth_tr = "0", synth_alpha = "0";
  int synth_n = 64;
  double synth_spacing = 0.5, synth_carrier = 26.0, synth_incident = 0.0;
  synth->add_option("--out", synth_out, "output file name inside --out-dir");
  synth->add_option("--theta-t", synth_tt, "comma list of transmissive angles (grid mode)");
  synth->add_option("--theta-r", synth_tr, "comma list of second-beam angles");
  synth->add_option("--alpha", synth_alpha, "comma list of power fractions");
  synth->add_option("--mode", synth_mode, "single | dual-transflective | dual-transmissive");
  synth->add_option("--n-elements", synth_n, "surface elements");
  synth->add_option("--spacing", synth_spacing, "element spacing in wavelengths");
  synth->add_option("--carrier-ghz", synth_carrier, "carrier frequency");
  synth->add_option("--incident", synth_incident, "incidence the codebook is built for");

  auto* eval = cb_cmd->add_subcommand("eval", "recompute stored gains from voltages");
  std::string eval_path;
  eval->add_option("--codebook", eval_path, "codebook file")->required();
  auto* exp = cb_cmd->add_subcommand("export", "text listing of a codebook");
  std::string exp_path;
  exp->add_option("--codebook", exp_path, "codebook file")->required();

  // sim
  auto* sim_cmd = app.add_subcommand("sim", "simulation runs");
  sim_cmd->require_subcommand(1);
  auto* run = sim_cmd->add_subcommand("run", "run one scenario");
  std::string run_cb, run_protocol;
  GaFlags run_ga;
  run_ga.add(run);
  run->add_option("--codebook", run_cb, "codebook file");
  run->add_option("--protocol", run_protocol, "override: sa-baseline | wall-street");
  auto* cmp = sim_cmd->add_subcommand("compare", "run several protocols on one scenario");
  std::string cmp_cb, cmp_protocols = "sa-baseline,wall-street", cmp_out = "compare.txt";
  GaFlags cmp_ga;
  cmp_ga.add(cmp);
  cmp->add_option("--codebook", cmp_cb, "codebook file");
  cmp->add_option("--protocols", cmp_protocols, "comma list; deltas are against the first");
  cmp->add_option("--out", cmp_out, "report file name inside --out-dir");

  // linkbudget
  auto* lb = app.add_subcommand("linkbudget", "surface link budget breakdown");
  bool lb_defaults = false;
  std::string lb_kind = "both";
  lb->add_flag("--reference-defaults", lb_defaults,
               "fill unset terms with the reference 26 GHz deployment values");
  lb->add_option("--kind", lb_kind, "ue | gnb | both")
      ->check(CLI::IsMember({"ue", "gnb", "both"}));
  std::map<std::string, std::optional<double>> lb_terms;
  const std::vector<std::pair<std::string, double ws_linkbudget_params::*>> lb_fields = {
      {"p-gnb-dbm", &ws_linkbudget_params::p_gnb_dbm},
      {"l-gnb-db", &ws_linkbudget_params::l_gnb_db},
      {"l-window-db", &ws_linkbudget_params::l_window_db},
      {"g-ris-rx-dbi", &ws_linkbudget_params::g_ris_rx_dbi},
      {"g-ris-tx-dbi", &ws_linkbudget_params::g_ris_tx_dbi},
      {"l-ue-db", &ws_linkbudget_params::l_ue_db},
      {"g-ue-dbi", &ws_linkbudget_params::g_ue_dbi},
      {"p-nf-dbm", &ws_linkbudget_params::p_nf_dbm},
      {"l-gnb-s-db", &ws_linkbudget_params::l_gnb_s_db},
      {"g-gnb-s-dbi", &ws_linkbudget_params::g_gnb_s_dbi},
  };
  for (const auto& [name, _] : lb_fields) lb->add_option("--" + name, lb_terms[name]);

  // trace
  auto* trace_cmd = app.add_subcommand("trace", "trace files");
  trace_cmd->require_subcommand(1);
  auto* texp = trace_cmd->add_subcommand("export", "tidy CSV of selected trace records");
  std::string texp_in, texp_event = "data", texp_out = "trace_export.csv";
  texp->add_option("--trace", texp_in, "trace file")->required();
  texp->add_option("--event", texp_event, "event prefix to keep (empty = all)");
  texp->add_option("--out", texp_out, "output file name inside --out-dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      const auto ga = synth_ga.params();
      Codebook cb;
      if (!g.config.empty()) {
        Scenario s;
        load_scenario(g, s);
        check(ws_codebook_synth_scenario(s.p, g.seed.value_or(1), &ga, synth_ga.threads, &cb.p),
              "synthesizing codebook");
      } else {
        if (synth_tt.empty()) usage("codebook synth needs --config or --theta-t");
        const auto tt = parse_list("--theta-t", synth_tt);
        const auto tr = parse_list("--theta-r", synth_tr);
        const auto al = parse_list("--alpha", synth_alpha);
        const ws_surface_geometry geo{synth_n, synth_spacing, synth_carrier, synth_incident};
        std::cerr << "# grid synthesis n_elements=" << synth_n << " spacing=" << synth_spacing
                  << " carrier_ghz=" << synth_carrier << " incident_deg=" << synth_incident
                  << " mode=" << synth_mode << " seed=" << g.seed.value_or(1)
                  << " generations=" << ga.generations << " population=" << ga.population
                  << "\n";
        check(ws_codebook_synth_grid(&geo, tt.data(), tt.size(), tr.data(), tr.size(),
                                     al.data(), al.size(), synth_mode.c_str(),
                                     g.seed.value_or(1), &ga, synth_ga.threads, &cb.p),
              "synthesizing codebook");
      }
      const auto path = out_path(g, synth_out);
      check(ws_codebook_save(cb.p, path.c_str()), "writing " + path);
      std::cout << path << " entries=" << ws_codebook_size(cb.p) << "\n";
    } else if (eval->parsed()) {
      Codebook cb;
      check(ws_codebook_load(eval_path.c_str(), &cb.p), "loading codebook " + eval_path);
      char* table = nullptr;
      double dev = 0.0;
      check(ws_codebook_eval(cb.p, &table, &dev), "evaluating codebook");
      std::cout << take(table);
      std::cerr << "# max |stored - recomputed| = " << dev << " dB\n";
    } else if (exp->parsed()) {
      Codebook cb;
      check(ws_codebook_load(exp_path.c_str(), &cb.p), "loading codebook " + exp_path);
      char* text = nullptr;
      check(ws_codebook_export(cb.p, &text), "exporting codebook");
      std::cout << take(text);
    } else if (run->parsed()) {
      Scenario s;
      load_scenario(g, s);
      if (!run_protocol.empty())
        check(ws_scenario_set_protocol(s.p, run_protocol.c_str()), "setting protocol");
      Codebook cb;
      resolve_codebook(g, run_cb, run_ga, s, std::string(ws_scenario_protocol(s.p)) == "wall-street", cb);
      Result r;
      check(ws_sim_run(s.p, cb.p, &r.p), "running " + g.config);
      const auto trace = out_path(g, ws_scenario_trace_file(s.p));
      const auto metrics = out_path(g, ws_scenario_metrics_file(s.p));
      check(ws_result_write_trace(r.p, trace.c_str()), "writing " + trace);
      check(ws_result_write_metrics(r.p, metrics.c_str()), "writing " + metrics);
      ws_run_summary m;
      check(ws_result_summary(r.p, &m), "summarizing");
      std::cout << "trace," << trace << "\nmetrics," << metrics << "\nho_count," << m.ho_count
                << "\nping_pong_count," << m.ping_pong_count << "\nhandover_actions,"
                << m.handover_actions << "\nmeasurement_interruption_ms,"
                << m.measurement_interruption_ms << "\noutage_ms," << m.outage_ms << "\n";
    } else if (cmp->parsed()) {
      Scenario s;
      load_scenario(g, s);
      std::vector<std::string> names;
      for (std::size_t pos = 0; pos <= cmp_protocols.size();) {
        const auto end = std::min(cmp_protocols.find(',', pos), cmp_protocols.size());
        names.push_back(cmp_protocols.substr(pos, end - pos));
        pos = end + 1;
      }
      bool surface = false;
      for (const auto& n : names) surface = surface || n == "wall-street";
      Codebook cb;
      resolve_codebook(g, cmp_cb, cmp_ga, s, surface, cb);
      std::vector<const char*> ptrs;
      for (const auto& n : names) ptrs.push_back(n.c_str());
      char* report = nullptr;
      check(ws_sim_compare(s.p, ptrs.data(), ptrs.size(), cb.p, &report), "comparing");
      const std::string text = take(report);
      const auto path = out_path(g, cmp_out);
      check(ws_write_text(path.c_str(), text.c_str()), "writing " + path);
      std::cout << text;
    } else if (lb->parsed()) {
      ws_linkbudget_params p;
      ws_linkbudget_defaults(&p);
      std::vector<std::string> missing;
      for (const auto& [name, field] : lb_fields) {
        const auto& v = lb_terms[name];
        if (v) p.*field = *v;
        else if (!lb_defaults) missing.push_back("--" + name);
      }
      if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += " " + m;
        usage("linkbudget: missing parameters (set them or pass --reference-defaults):" + list);
      }
      for (auto kind : {WS_BUDGET_SNR_UE, WS_BUDGET_SNR_GNB}) {
        if (lb_kind == "ue" && kind != WS_BUDGET_SNR_UE) continue;
        if (lb_kind == "gnb" && kind != WS_BUDGET_SNR_GNB) continue;
        char* text = nullptr;
        const ws_status st = ws_linkbudget(&p, kind, nullptr, &text);
        // Out-of-range terms come from the command line.
        if (st == WS_ERR_DOMAIN) usage(std::string("linkbudget: ") + ws_last_error());
        check(st, "link budget");
        std::cout << take(text);
      }
    } else if (texp->parsed()) {
      const auto path = out_path(g, texp_out);
      check(ws_trace_export(texp_in.c_str(), texp_event.c_str(), path.c_str()),
            "exporting " + texp_in);
      std::cout << path << "\n";
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
