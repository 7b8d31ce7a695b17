// Runs every acceptance criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. The exit status counts failures that are
// not listed in kKnownUnattainable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "channel.hpp"
#include "codebook.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "handover.hpp"
#include "io.hpp"
#include "oracles.hpp"
#include "sim.hpp"

using namespace ws;
using codebook::CodebookKey;
using codebook::KeyMode;
using handover::Protocol;
using surface::SurfaceGeometry;

namespace {

// 150 m at 26 GHz is 104.27 dB by the free-space formula, outside 103 +- 1.
const std::set<int> kKnownUnattainable{2};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string violations;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      violations += " [violated: " + what + "]";
    }
  }
};

std::string fmt(double v, int digits = 2) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << v;
  return o.str();
}

std::filesystem::path work_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "ws_acceptance";
  std::filesystem::create_directories(dir);
  return dir;
}

// Runs a shell command, returning its exit status and stdout.
std::pair<int, std::string> shell(const std::string& cmd) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, out};
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int rc = pclose(p);
  return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, out};
}

sim::Scenario load(const std::string& name) {
  return config::parse_config(std::string(WS_SCENARIO_DIR) + "/" + name).scenario;
}

sim::Scenario with(sim::Scenario s, Protocol p, std::uint64_t seed = 1) {
  s.protocol.protocol = p;
  if (p != Protocol::wall_street) s.protocol.mbb_hold = false;
  s.noise.seed = seed;
  return s;
}

// Full-effort scenario codebooks, synthesized once and saved for CLI runs.
const codebook::Codebook& codebook_for(const std::string& name) {
  static std::map<std::string, codebook::Codebook> cache;
  auto it = cache.find(name);
  if (it == cache.end()) {
    it = cache.emplace(name, sim::synth_codebook(load(name), 1)).first;
    codebook::save_codebook(it->second, (work_dir() / (name + ".wscb")).string());
  }
  return it->second;
}

std::string codebook_file(const std::string& name) {
  codebook_for(name);
  return (work_dir() / (name + ".wscb")).string();
}

// Count after "ues=" in a batched handover record.
int batch_size(const std::string& event) {
  const auto pos = event.find("ues=");
  return pos == std::string::npos ? 0 : std::atoi(event.c_str() + pos + 4);
}

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

// ---------------------------------------------------------------- criteria

void link_budget(Outcome& o) {
  const auto [rc, out] = shell(std::string(WSIM_PATH) + " linkbudget --reference-defaults 2>&1");
  o.require(rc == 0, "exit code 0");
  o.require(out.find("SNR_UE = 27.0 dB") != std::string::npos, "prints SNR_UE = 27.0 dB");
  o.require(out.find("SNR_gNB = 14.5 dB") != std::string::npos, "prints SNR_gNB = 14.5 dB");
  const channel::LinkBudgetParams p;
  const double ue = channel::snr_ue(p).total_db, gnb = channel::snr_gnb(p).total_db;
  o.require(std::abs(ue - 27.0) <= 0.1, "SNR_UE within 0.1 dB of 27.0");
  o.require(std::abs(gnb - 14.5) <= 0.1, "SNR_gNB within 0.1 dB of 14.5");
  o.detail << "SNR_UE=" << fmt(ue, 3) << " SNR_gNB=" << fmt(gnb, 3);
}

void fspl_anchors(Outcome& o) {
  const double far = channel::fspl_db(150.0, 26.0), near = channel::fspl_db(4.0, 26.0);
  o.require(std::abs(far - 103.0) <= 1.0, "FSPL(150 m) within 1 dB of 103");
  o.require(std::abs(near - 72.0) <= 1.0, "FSPL(4 m) within 1 dB of 72");
  o.detail << "FSPL(150m)=" << fmt(far) << " FSPL(4m)=" << fmt(near);
}

void dual_beam(Outcome& o) {
  const SurfaceGeometry g{64, 0.5, 26.0};
  for (const auto& [tt, tr] : {std::pair{-40.0, 40.0}, std::pair{-45.0, 68.0}}) {
    const auto d = codebook::synth_entry({tt, tr, 0.5, KeyMode::dual_transflective}, g, 0.0, 1).entry;
    const auto st = codebook::synth_entry({tt, 0.0, 0.0, KeyMode::single}, g, 0.0, 1).entry;
    const auto sr = codebook::synth_entry({0.0, tr, 1.0, KeyMode::single}, g, 0.0, 1).entry;
    const double pt = oracle::global_peak(d.config, g, 0.0, false);
    const double pr = oracle::global_peak(d.config, g, 0.0, true);
    const std::string key = "(" + fmt(tt, 0) + "," + fmt(tr, 0) + ",0.5)";
    o.require(std::abs(pt - tt) <= 1.0, key + " transmissive argmax");
    o.require(std::abs(pr - tr) <= 1.0, key + " reflective argmax");
    o.require(std::abs(d.g_w_tra_db - (st.g_w_tra_db - 3.0)) <= 1.5, key + " transmissive gain");
    o.require(std::abs(d.g_w_ref_db - (sr.g_w_ref_db - 3.0)) <= 1.5, key + " reflective gain");
    o.detail << key << ": peaks " << fmt(pt, 0) << "/" << fmt(pr, 0) << " deg, gains "
             << fmt(d.g_w_tra_db) << "/" << fmt(d.g_w_ref_db) << " vs single-3 "
             << fmt(st.g_w_tra_db - 3.0) << "/" << fmt(sr.g_w_ref_db - 3.0) << (tt == -40.0 ? "; " : "");
  }
}

void ga_vs_exact(Outcome& o) {
  const SurfaceGeometry g{8, 0.5, 26.0};
  codebook::GaParams ga;
  ga.quantization_levels = 5;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> ang(-14, 14);
  std::uniform_int_distribution<int> al(1, 3);
  double worst = 0.0;
  for (int t = 0; t < 5; ++t) {
    const CodebookKey k{5.0 * ang(rng), 5.0 * ang(rng), 0.25 * al(rng), KeyMode::dual_transflective};
    const double opt = oracle::exact_max_db(oracle::options(k, g, 0.0, 5));
    const double got = codebook::synth_entry(k, g, 0.0, 500 + t, ga).entry.objective_db;
    o.require(got <= opt + 1e-9, codebook::to_string(k) + " GA above the exact optimum");
    worst = std::max(worst, opt - got);
  }
  o.require(worst <= 1.0, "GA within 1 dB of the exact optimum");
  o.detail << "worst gap " << fmt(worst, 3) << " dB over 5 keys";
}

void argmax_invariance(Outcome& o) {
  const SurfaceGeometry g{64, 0.5, 26.0};
  const double tt = -30.0, tr = 45.0;
  std::vector<double> pt, pr, ref;
  for (double a : {0.25, 0.5, 0.75}) {
    const auto e = codebook::synth_entry({tt, tr, a, KeyMode::dual_transflective}, g, 0.0, 3).entry;
    pt.push_back(oracle::global_peak(e.config, g, 0.0, false));
    pr.push_back(oracle::global_peak(e.config, g, 0.0, true));
    ref.push_back(e.g_w_ref_db);
  }
  for (std::size_t i = 0; i < pt.size(); ++i) {
    o.require(std::abs(pt[i] - pt[0]) <= 1.0, "transmissive argmax stable");
    o.require(std::abs(pr[i] - pr[0]) <= 1.0, "reflective argmax stable");
  }
  o.require(ref[0] < ref[1] && ref[1] < ref[2], "g_w_ref strictly increasing");
  o.detail << "peaks T " << fmt(pt[0], 0) << "/" << fmt(pt[1], 0) << "/" << fmt(pt[2], 0)
           << " R " << fmt(pr[0], 0) << "/" << fmt(pr[1], 0) << "/" << fmt(pr[2], 0)
           << " deg, g_w_ref " << fmt(ref[0]) << " < " << fmt(ref[1]) << " < " << fmt(ref[2]);
}

void reciprocity(Outcome& o) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> n(2, 96);
  std::uniform_real_distribution<double> v(0.0, 16.0), ang(-85.0, 85.0), sp(0.25, 0.75);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const SurfaceGeometry g{n(rng), sp(rng), 26.0};
    surface::SurfaceConfig cfg;
    for (int i = 0; i < g.n_elements; ++i) cfg.voltages.push_back({v(rng), v(rng)});
    const auto c = surface::coefficients(cfg, g);
    const double a = ang(rng), b = ang(rng);
    for (auto side : {surface::Side::transmissive, surface::Side::reflective}) {
      const auto down = surface::array_factor(c, g, b, side, a);
      const auto up = surface::array_factor(c, g, a, side, b);
      worst = std::max(worst, std::abs(down - up) / std::max(1.0, std::abs(down)));
    }
  }
  o.require(worst <= 1e-9, "relative UL/DL difference <= 1e-9");
  o.detail << "worst relative difference " << worst << " over 1000 configs";
}

void bound_soundness(Outcome& o) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> k(1, 4);
  std::uniform_real_distribution<double> x(-110.0, -40.0), g(-10.0, 10.0), w(30.0, 50.0),
      h(0.0, 20.0);
  const double l_min = -60.0, l_max = -50.0;
  std::uniform_real_distribution<double> l(l_min, l_max);
  int outside = 0, false_pos = 0, handovers = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const double x_s = x(rng), x_n = x(rng), g_ref = w(rng);
    const int n = k(rng);
    std::vector<double> m_s, g_tra, g_ue;
    for (int i = 0; i < n; ++i) {
      g_tra.push_back(w(rng));
      g_ue.push_back(g(rng));
      m_s.push_back(x_s + g_tra.back() + g_ue.back() + l(rng));
    }
    const auto agg = handover::slot_aggregates(x_s + x_n + g_ref, m_s, g_ref, g_tra, g_ue);
    const auto b = handover::bound_xs(agg.s2, l_min, l_max);
    if (!(x_s >= b.lb_s - 1e-9 && x_s <= b.ub_s + 1e-9)) ++outside;
    const double hd = h(rng);
    if (handover::decide(agg.s1, b.ub_s, hd) == handover::Decision::handover) {
      ++handovers;
      if (x_n - x_s < hd - 1e-9) ++false_pos;
    }
  }
  o.require(outside == 0, "X_s inside [lb_s, ub_s]");
  o.require(false_pos == 0, "no false-positive handover");
  o.detail << outside << " outside, " << false_pos << " false positives, " << handovers
           << " handovers in 10000 instances";
}

void attachment(Outcome& o) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> v(-120.0, -50.0);
  std::bernoulli_distribution out(0.1);
  int mismatches = 0, bad_time = 0;
  for (int trial = 0; trial < 100; ++trial) {
    double table[8][8][4];
    bool blocked[8][8][4];
    for (auto& a : table)
      for (auto& b : a)
        for (auto& c : b) c = std::round(v(rng));
    for (auto& a : blocked)
      for (auto& b : a)
        for (auto& c : b) c = out(rng);
    const auto r = handover::initial_attachment([&](int gb, int s, int u) -> std::optional<double> {
      if (blocked[gb][s][u]) return std::nullopt;
      return table[gb][s][u];
    });
    int bg = -1, bs = -1, bu = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int gb = 0; gb < 8; ++gb)
      for (int s = 0; s < 8; ++s)
        for (int u = 0; u < 4; ++u)
          if (!blocked[gb][s][u] && table[gb][s][u] > best) {
            best = table[gb][s][u];
            bg = gb, bs = s, bu = u;
          }
    if (!r.found || r.gnb_beam != bg || r.surface_angle != bs || r.ue_beam != bu ||
        r.rsrp_dbm != best)
      ++mismatches;
    if (r.elapsed_ms != 80) ++bad_time;
  }
  o.require(mismatches == 0, "matches brute force");
  o.require(bad_time == 0, "80 ms elapsed");
  o.detail << mismatches << " mismatches, " << bad_time << " wrong durations in 100 oracles";
}

void zero_interruption_scan(Outcome& o) {
  const auto s = load("outdoor_crossover_10kmh.ini");
  const auto& cb = codebook_for("outdoor_crossover_10kmh.ini");
  const auto ws = sim::run(with(s, Protocol::wall_street), &cb).metrics;
  const auto sa = sim::run(with(s, Protocol::sa_baseline), &cb).metrics;
  o.require(ws.measurement_interruption_ms == 0, "WS measurement interruption 0 ms");
  o.require(sa.mr_events > 0, "SA produced measurement reports");
  o.require(sa.measurement_interruption_ms >= 20 * sa.mr_events, "SA >= 20 ms per MR event");
  o.detail << "WS " << ws.measurement_interruption_ms << " ms; SA "
           << sa.measurement_interruption_ms << " ms over " << sa.mr_events << " MR events";
}

void mbb_dedup(Outcome& o) {
  std::mt19937_64 rng(10);
  std::bernoulli_distribution l1(0.3), l2(0.4);
  handover::DapsBuffer buf(100);
  std::set<long> delivered;
  long last = -1;
  bool ordered = true;
  const long n = 100000;
  for (long seq = 0; seq < n; ++seq) {
    const long t = seq / 10;
    std::vector<long> out;
    if (!l1(rng)) out = buf.deliver(1, seq, t);
    if (!l2(rng)) {
      const auto b = buf.deliver(2, seq, t);
      out.insert(out.end(), b.begin(), b.end());
    }
    for (long x : out) {
      ordered = ordered && x > last && delivered.insert(x).second;
      last = x;
    }
  }
  for (long x : buf.flush_all()) ordered = ordered && delivered.insert(x).second;
  const double per = 1.0 - double(delivered.size()) / double(n);
  o.require(std::abs(per - 0.12) <= 0.01, "combined PER 0.12 +- 0.01");
  o.require(ordered, "in-order delivery without duplicates");

  const auto s = load("outdoor_mbb_hold.ini");
  const auto r = sim::run(with(s, Protocol::wall_street), &codebook_for("outdoor_mbb_hold.ini"));
  long windows = 0, dual = 0, worse = 0;
  for (const auto& u : r.metrics.ues)
    for (const auto& w : u.windows) {
      if (std::isnan(w.per)) continue;
      ++windows;
      double best = std::numeric_limits<double>::infinity();
      if (!std::isnan(w.per_link_a)) best = std::min(best, w.per_link_a);
      if (!std::isnan(w.per_link_b)) {
        best = std::min(best, w.per_link_b);
        ++dual;
      }
      if (w.per > best + 1e-12) ++worse;
    }
  o.require(dual > 0, "MBB scenario has dual-link windows");
  o.require(worse == 0, "combined PER <= min link PER in every window");
  o.detail << "combined PER " << fmt(per, 4) << "; MBB scenario " << worse << " of " << windows
           << " windows above the better link (" << dual << " dual-link)";
}

void batched_handover(Outcome& o) {
  const auto s = load("outdoor_crossover_10kmh.ini");
  const auto& cb = codebook_for("outdoor_crossover_10kmh.ini");
  const int n_ues = static_cast<int>(s.ues.size());
  long ws_ho = 0, sa_ho = 0, ws_pp = 0, sa_pp = 0, ws_decisions = 0;
  int seed_violations = 0, batch_violations = 0, sa_violations = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto ws = sim::run(with(s, Protocol::wall_street, seed), &cb);
    const auto sa = sim::run(with(s, Protocol::sa_baseline, seed), &cb);
    // Each WS handover decision is followed by exactly one action for all UEs.
    int pending = -1;
    for (const auto& rec : ws.trace) {
      if (rec.event == "decision:handover") {
        if (pending >= 0 && pending != 1) ++batch_violations;
        pending = 0;
        ++ws_decisions;
      } else if (starts_with(rec.event, "handover:")) {
        if (pending < 0 || batch_size(rec.event) != n_ues) ++batch_violations;
        if (pending >= 0) ++pending;
      }
    }
    if (pending >= 0 && pending != 1) ++batch_violations;
    // SA moves UEs one action at a time: every cell that all UEs reach
    // costs at least one action per UE.
    std::map<int, std::set<int>> moved;
    std::map<int, int> actions;
    for (const auto& rec : sa.trace)
      if (starts_with(rec.event, "handover:")) {
        if (batch_size(rec.event) != 1) ++sa_violations;
        moved[rec.gnb_id].insert(rec.ue_id);
        ++actions[rec.gnb_id];
      }
    int shared = 0;
    for (const auto& [target, ues] : moved)
      if (static_cast<int>(ues.size()) == n_ues) {
        ++shared;
        if (actions[target] < 2) ++sa_violations;
      }
    if (shared == 0) ++sa_violations;
    if (ws.metrics.ho_count > sa.metrics.ho_count ||
        ws.metrics.ping_pong_count > sa.metrics.ping_pong_count)
      ++seed_violations;
    ws_ho += ws.metrics.ho_count;
    sa_ho += sa.metrics.ho_count;
    ws_pp += ws.metrics.ping_pong_count;
    sa_pp += sa.metrics.ping_pong_count;
  }
  o.require(ws_decisions > 0, "WS made handover decisions");
  o.require(batch_violations == 0, "one WS action per decision covering every UE");
  o.require(sa_violations == 0, "SA takes >= 2 actions per shared cell change");
  o.require(seed_violations == 0, "WS ho_count and ping_pong_count <= SA on every seed");
  o.detail << "seeds 1-20: ho WS " << ws_ho << " / SA " << sa_ho << ", ping-pong WS " << ws_pp
           << " / SA " << sa_pp << ", " << ws_decisions << " WS decisions, "
           << batch_violations << " batch violations";
}

void coverage_ordering(Outcome& o) {
  const auto s = load("outdoor_blocked_cargo.ini");
  const auto& cb = codebook_for("outdoor_blocked_cargo.ini");
  const auto sa = sim::run(with(s, Protocol::sa_baseline), &cb);
  const auto ws = sim::run(with(s, Protocol::wall_street), &cb);
  const auto& sa2 = sa.metrics.ues.at(1);
  const double frac = double(sa2.outage_ms) / double(sa.metrics.duration_ms);
  o.require(sa2.ue_id == 2, "second UE is UE 2");
  o.require(frac >= 0.5, "baseline UE-2 outage fraction >= 0.5");
  o.require(ws.metrics.outage_ms == 0, "WS outage 0");

  // Every 100 ms along the drive UE 2 is blocked toward some gNBs; for each
  // gNB it still sees directly, the surface path through the deployed
  // codebook entry must beat that direct path. Noise-free on both sides.
  const channel::Channel ch(s.gnbs, s.ues, s.surface.mount, s.channel_params(), s.surface.geometry);
  double margin = std::numeric_limits<double>::infinity();
  long compared = 0;
  for (long t = 0; t <= s.duration_ms(); t += 100) {
    const auto pose = sim::mobility_step(s.trajectory, t / 1000.0, s.duration_s);
    bool blocked = false;
    for (const auto& g : s.gnbs) blocked = blocked || ch.direct_terms(pose, g.id, 2).outage;
    if (!blocked) continue;
    for (const auto& g : s.gnbs) {
      const auto direct = ch.direct_terms(pose, g.id, 2);
      const auto in = ch.incident(pose, g.id);
      if (direct.outage || in.back_side) continue;
      const auto key = channel::key_angle(in.deg, ch.ue_exit_angle(2),
                                          s.surface.codebook_incident_deg, s.surface.key_step_deg);
      if (!key) continue;
      const auto& e = cb.at({*key, 0.0, 0.0, KeyMode::single});
      const auto coeffs = surface::coefficients(e.config, s.surface.geometry);
      const auto via = ch.transmissive_terms(pose, g.id, 2,
                                             {coeffs, surface::Mode::single_transmissive});
      margin = std::min(margin, via.value_dbm() - direct.value_dbm());
      ++compared;
    }
  }
  o.require(compared > 0, "blocked-adjacent samples exist");
  o.require(margin >= 12.0, "surface RSRP >= direct + 12 dB");
  o.detail << "baseline UE-2 outage " << fmt(frac, 3) << ", WS outage " << ws.metrics.outage_ms
           << " ms, min surface-over-direct margin " << fmt(margin) << " dB over " << compared
           << " gNB-position pairs";
}

void determinism(Outcome& o) {
  const auto dir = work_dir();
  struct Case {
    std::string scenario, protocol, codebook;
  };
  const std::vector<Case> cases{
      {"outdoor_crossover_10kmh.ini", "wall-street", codebook_file("outdoor_crossover_10kmh.ini")},
      {"outdoor_crossover_10kmh.ini", "sa-baseline", ""},
      {"outdoor_blocked_cargo.ini", "wall-street", codebook_file("outdoor_blocked_cargo.ini")}};
  int compared = 0;
  for (const auto& c : cases) {
    std::vector<std::string> outs;
    for (const char* tag : {"a", "b"}) {
      const auto out = (dir / (c.scenario + "." + c.protocol + "." + tag)).string();
      std::string cmd = std::string(WSIM_PATH) + " --config " + WS_SCENARIO_DIR + "/" + c.scenario +
                        " --seed 11 --out-dir " + out + " sim run --protocol " + c.protocol;
      if (!c.codebook.empty()) cmd += " --codebook " + c.codebook;
      const auto [rc, text] = shell(cmd + " 2>/dev/null");
      o.require(rc == 0, c.scenario + " " + c.protocol + " run succeeds");
      outs.push_back(out);
    }
    for (const char* file : {"trace.csv", "metrics.csv"}) {
      std::string a, b;
      try {
        a = io::read_file(outs[0] + "/" + file);
        b = io::read_file(outs[1] + "/" + file);
      } catch (const Error& e) {
        o.require(false, std::string("reading ") + file + ": " + e.what());
        continue;
      }
      o.require(!a.empty() && a == b, c.scenario + " " + c.protocol + " " + file + " identical");
      ++compared;
    }
  }
  o.detail << compared << " file pairs compared byte for byte";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"link budget", link_budget},
      {"free-space path loss anchors", fspl_anchors},
      {"dual-beam codebook at N=64", dual_beam},
      {"GA vs exact quantized optimum", ga_vs_exact},
      {"argmax invariance under power split", argmax_invariance},
      {"uplink/downlink reciprocity", reciprocity},
      {"bound soundness", bound_soundness},
      {"initial attachment search", attachment},
      {"zero-interruption scanning", zero_interruption_scan},
      {"duplicate combining", mbb_dedup},
      {"batched handover", batched_handover},
      {"coverage ordering", coverage_ordering},
      {"determinism", determinism}};
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool known = kKnownUnattainable.count(id) > 0;
    if (!o.pass && !known) ++unexpected;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first
              << ", " << fmt(secs, 1) << " s): " << o.detail.str() << o.violations
              << (!o.pass && known ? " [known unattainable]" : "") << std::endl;
  }
  return unexpected;
}
