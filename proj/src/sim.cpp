#include "sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>

#include "errors.hpp"
#include "io.hpp"

namespace ws::sim {

using channel::Path;
using codebook::CodebookKey;
using codebook::KeyMode;
using handover::ActionKind;
using handover::EventKind;
using handover::HoState;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based uniform draw in [0, 1) for per-link packet loss.
double loss_draw(std::uint64_t seed, int ue, int gnb, long seq) {
  std::uint64_t h = mix64(seed ^ 0x6c6f7373ULL);
  h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(ue)));
  h = mix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(gnb)) << 32));
  h = mix64(h ^ static_cast<std::uint64_t>(seq));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

bool same_double(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

}  // namespace

bool operator==(const UeWindow& a, const UeWindow& b) {
  return a.start_ms == b.start_ms && same_double(a.throughput_mbps, b.throughput_mbps) &&
         same_double(a.rtt_ms, b.rtt_ms) && same_double(a.per, b.per) &&
         same_double(a.per_link_a, b.per_link_a) && same_double(a.per_link_b, b.per_link_b) &&
         a.outage_ms == b.outage_ms && a.interruption_ms == b.interruption_ms;
}

bool operator==(const UeMetrics& a, const UeMetrics& b) {
  return a.ue_id == b.ue_id && a.windows == b.windows && a.outage_ms == b.outage_ms &&
         a.interruption_ms == b.interruption_ms &&
         a.measurement_interruption_ms == b.measurement_interruption_ms &&
         a.rach_interruption_ms == b.rach_interruption_ms && a.degraded_ms == b.degraded_ms &&
         a.attach_ms == b.attach_ms && a.sent_bits == b.sent_bits &&
         a.delivered_bits == b.delivered_bits && a.lost_bits == b.lost_bits &&
         a.inflight_bits == b.inflight_bits && a.duplicates == b.duplicates;
}

// --- mobility and data-plane formulas -------------------------------------

double path_length_m(const Trajectory& traj) {
  double len = 0.0;
  for (std::size_t i = 1; i < traj.waypoints.size(); ++i)
    len += std::hypot(traj.waypoints[i].x - traj.waypoints[i - 1].x,
                      traj.waypoints[i].y - traj.waypoints[i - 1].y);
  return len;
}

channel::VehiclePose mobility_step(const Trajectory& traj, double t_s, double duration_s) {
  require(!traj.waypoints.empty(), ErrorCode::domain, "trajectory has no waypoints");
  require(traj.speed_kmh > 0.0, ErrorCode::domain, "speed must be > 0");
  if (!(t_s >= 0.0 && t_s <= duration_s + 1e-9))
    fail(ErrorCode::domain, "time " + io::format_double(t_s) + " s outside [0, " +
                                io::format_double(duration_s) + "] s");
  const auto& w = traj.waypoints;
  channel::VehiclePose pose;
  pose.pos = w.front();
  pose.heading_deg = 0.0;
  double remaining = traj.speed_kmh / 3.6 * t_s;
  for (std::size_t i = 1; i < w.size(); ++i) {
    const double dx = w[i].x - w[i - 1].x, dy = w[i].y - w[i - 1].y;
    const double seg = std::hypot(dx, dy);
    if (seg == 0.0) continue;
    pose.heading_deg = std::atan2(dy, dx) / kDeg;
    if (remaining <= seg) {
      const double f = remaining / seg;
      pose.pos = {w[i - 1].x + f * dx, w[i - 1].y + f * dy};
      return pose;
    }
    remaining -= seg;
    pose.pos = w[i];
  }
  return pose;
}

double goodput_mbps(double sinr_db, double bandwidth_hz, double efficiency, bool outage,
                    bool interrupted, double factor) {
  if (outage || interrupted || !std::isfinite(sinr_db)) return 0.0;
  return factor * efficiency * bandwidth_hz * std::log2(1.0 + std::pow(10.0, sinr_db / 10.0)) / 1e6;
}

double per_from_sinr(double sinr_db, double midpoint_db, double slope) {
  if (std::isnan(sinr_db) || sinr_db == -INFINITY) return 1.0;
  if (sinr_db == INFINITY) return 0.0;
  return 1.0 / (1.0 + std::exp(slope * (sinr_db - midpoint_db)));
}

double percentile(std::vector<double> values, double p) {
  require(p >= 0.0 && p <= 100.0, ErrorCode::domain, "percentile must lie in [0, 100]");
  std::erase_if(values, [](double v) { return std::isnan(v); });
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  if (rank == 0) rank = 1;
  return values[rank - 1];
}

// --- trace format -----------------------------------------------------------

std::string format_trace(const std::vector<TraceRecord>& records) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.t_ms) + ',' + std::to_string(r.ue_id) + ',' +
           std::to_string(r.gnb_id) + ',' + r.path + ',' + std::to_string(r.gnb_beam) + ',' +
           io::format_double(r.surf_t_deg) + ',' + io::format_double(r.surf_r_deg) + ',' +
           io::format_double(r.alpha) + ',' + io::format_double(r.rsrp_dbm) + ',' +
           io::format_double(r.sinr_db) + ',' + io::format_double(r.per) + ',' + r.event + '\n';
  }
  return out;
}

std::vector<TraceRecord> parse_trace(const std::string& text, const std::string& origin) {
  std::vector<TraceRecord> out;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (io::trim(line).empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (!header) {
      if (line != kTraceHeader) fail(ErrorCode::parse, where + ": unexpected trace header");
      header = true;
      continue;
    }
    const auto f = io::split(line, ',');
    if (f.size() != 12)
      fail(ErrorCode::parse, where + ": expected 12 fields, got " + std::to_string(f.size()));
    TraceRecord r;
    r.t_ms = io::parse_int(f[0], where + " t_ms");
    r.ue_id = static_cast<int>(io::parse_int(f[1], where + " ue_id"));
    r.gnb_id = static_cast<int>(io::parse_int(f[2], where + " gnb_id"));
    r.path = std::string(io::trim(f[3]));
    r.gnb_beam = static_cast<int>(io::parse_int(f[4], where + " gnb_beam"));
    r.surf_t_deg = io::parse_double(f[5], where + " surf_t_deg");
    r.surf_r_deg = io::parse_double(f[6], where + " surf_r_deg");
    r.alpha = io::parse_double(f[7], where + " alpha");
    r.rsrp_dbm = io::parse_double(f[8], where + " rsrp_dbm");
    r.sinr_db = io::parse_double(f[9], where + " sinr_db");
    r.per = io::parse_double(f[10], where + " per");
    r.event = std::string(io::trim(f[11]));
    if (r.path != "-") channel::path_from_string(r.path);
    if (!std::isnan(r.per) && (r.per < 0.0 || r.per > 1.0))
      fail(ErrorCode::parse, where + ": per outside [0,1]");
    if (!out.empty() && r.t_ms < out.back().t_ms)
      fail(ErrorCode::parse, where + ": records are not time-ordered");
    out.push_back(std::move(r));
  }
  if (!header) fail(ErrorCode::parse, origin + ": empty trace");
  return out;
}

// --- codebook key bookkeeping ------------------------------------------------

namespace {

std::optional<double> theta_key(const Scenario& s, const channel::Channel& ch,
                                const channel::VehiclePose& pose, int gnb, int ue) {
  const auto in = ch.incident(pose, gnb);
  if (in.back_side) return std::nullopt;
  return channel::key_angle(in.deg, ch.ue_exit_angle(ue), s.surface.codebook_incident_deg,
                            s.surface.key_step_deg);
}

std::optional<double> attach_key(const Scenario& s, const channel::Channel& ch,
                                 const channel::VehiclePose& pose, int gnb, double angle) {
  const auto in = ch.incident(pose, gnb);
  if (in.back_side) return std::nullopt;
  return channel::key_angle(in.deg, angle, s.surface.codebook_incident_deg,
                            s.surface.key_step_deg);
}

CodebookKey single_key(double t) { return {t, 0.0, 0.0, KeyMode::single}; }

channel::Channel make_channel(const Scenario& s) {
  return channel::Channel(s.gnbs, s.ues, s.surface.mount, s.channel_params(), s.surface.geometry);
}

}  // namespace

std::vector<CodebookKey> required_keys(const Scenario& s) {
  s.validate();
  const auto ch = make_channel(s);
  std::set<CodebookKey> keys;
  const long dur = s.duration_ms();
  for (long t = 0; t <= dur; ++t) {
    const auto pose = mobility_step(s.trajectory, static_cast<double>(t) / 1000.0, s.duration_s);
    std::map<int, std::vector<std::optional<double>>> th;
    for (const auto& g : s.gnbs) {
      for (double a : s.surface.attach_angles_deg)
        if (auto k = attach_key(s, ch, pose, g.id, a)) keys.insert(single_key(*k));
      auto& v = th[g.id];
      for (const auto& u : s.ues) v.push_back(theta_key(s, ch, pose, g.id, u.id));
    }
    for (const auto& g : s.gnbs) {
      for (std::size_t i = 0; i < s.ues.size(); ++i) {
        const auto ts = th[g.id][i];
        if (!ts) continue;
        keys.insert(single_key(*ts));
        for (double a : s.surface.scan_angles_deg) {
          keys.insert({*ts, a, s.protocol.alpha_slot1, KeyMode::dual_transflective});
          keys.insert({*ts, a, s.protocol.alpha_slot2, KeyMode::dual_transflective});
        }
        for (const auto& n : s.gnbs) {
          if (n.id == g.id) continue;
          if (const auto tn = th[n.id][i])
            keys.insert({*ts, *tn, s.protocol.alpha_mbb, KeyMode::dual_transmissive});
        }
      }
    }
  }
  return {keys.begin(), keys.end()};
}

codebook::Codebook synth_codebook(const Scenario& s, std::uint64_t seed,
                                  const codebook::GaParams& ga, int threads) {
  const auto keys = required_keys(s);
  auto params = ga;
  params.split_penalty = s.surface.split_penalty;
  return codebook::build_codebook(keys, s.surface.geometry, s.surface.codebook_incident_deg, seed,
                                  params, threads);
}

// --- engine -------------------------------------------------------------------

namespace {

// Tag of a channel query, stored in the trace event column.
constexpr const char* kTagData = "data";
constexpr const char* kTagAttach = "attach";
constexpr const char* kTagMeas = "meas";
constexpr const char* kTagScan = "scan";
constexpr const char* kTagSlot2 = "slot2";
constexpr const char* kTagCheck = "mbb_check";

// Replayed channel values: exact (t, ue, gnb, path, tag) first, else the
// latest record of the same link at or before t.
class ReplaySource {
 public:
  ReplaySource(const std::vector<TraceRecord>& recs, double offset_db) : offset_(offset_db) {
    for (const auto& r : recs) {
      if (r.path == "-") continue;
      exact_[{r.t_ms, r.ue_id, r.gnb_id, r.path, r.event}].push_back(r.rsrp_dbm);
      held_[{r.ue_id, r.gnb_id, r.path}].emplace_back(r.t_ms, r.rsrp_dbm);
    }
  }

  double value(long t, int ue, int gnb, Path path, const std::string& tag) {
    const std::string p = channel::to_string(path);
    auto it = exact_.find({t, ue, gnb, p, tag});
    if (it != exact_.end() && !it->second.empty()) {
      const double v = it->second.front();
      it->second.pop_front();
      return adjust(v);
    }
    auto h = held_.find({ue, gnb, p});
    if (h == held_.end()) return -INFINITY;
    const auto& v = h->second;
    auto pos = std::upper_bound(v.begin(), v.end(), t,
                                [](long tt, const std::pair<long, double>& e) { return tt < e.first; });
    if (pos == v.begin()) return -INFINITY;
    return adjust(std::prev(pos)->second);
  }

 private:
  double adjust(double v) const { return std::isfinite(v) ? v + offset_ : v; }

  double offset_;
  std::map<std::tuple<long, int, int, std::string, std::string>, std::deque<double>> exact_;
  std::map<std::tuple<int, int, std::string>, std::vector<std::pair<long, double>>> held_;
};

struct Interval {
  long from = 0;
  long to = 0;
  handover::Cause cause = handover::Cause::none;
  double factor = 1.0;
  bool interrupt = true;
};

struct WindowAcc {
  double delivered_bits = 0.0;
  double rtt_sum = 0.0;
  long rtt_n = 0;
  long sent = 0, lost = 0;
  long a_sent = 0, a_lost = 0;
  long b_sent = 0, b_lost = 0;
  long outage = 0, interruption = 0;
};

struct UeRt {
  int id = 0;
  int machine = -1;        // index into machines once attached
  long attach_at = 0;      // next attachment attempt
  long attach_until = -1;  // attachment completes at this tick
  int attach_gnb = -1;
  bool initial = true;
  long pkt = 0;            // packets sent (loss-draw counter)
  long buf_seq = 0;        // sequence numbers handed to the reorder buffer
  std::vector<double> bits;
  handover::DapsBuffer buf{100};
  std::vector<Interval> intervals;
  std::vector<WindowAcc> win;
  UeMetrics m;
};

struct MachineRt {
  handover::HoStateMachine m;
  handover::PingPongCounter pp{1000};
  long next_mr = 0;
  long scan_from = -1, scan_until = -1;
  long slot2_from = -1, slot2_until = -1;
  double slot2_theta_r = 0.0;
  std::vector<std::optional<CodebookKey>> prev_keys;
};

struct LinkUse {
  int gnb = 0;
  Path path = Path::direct;
  std::optional<CodebookKey> key;
};

struct Queued {
  int machine = 0;
  handover::Event event;
};

class Engine {
 public:
  Engine(const Scenario& s, const codebook::Codebook* cb)
      : s_(s), ch_(make_channel(s)), dur_(s.duration_ms()), seed_(s.noise.seed),
        ws_(s.protocol.protocol == handover::Protocol::wall_street) {
    if (ws_) prepare_codebook(cb);
    if (s.output.mode == RunMode::trace_replay) {
      const auto recs = parse_trace(io::read_file(s.output.replay_trace), s.output.replay_trace);
      replay_.emplace(recs, s.output.replay_calibration ? s.output.calibration_db : 0.0);
    }
    const long nwin = dur_ / s.output.window_ms;
    for (const auto& u : s.ues) {
      UeRt r;
      r.id = u.id;
      r.buf = handover::DapsBuffer(s.protocol.reorder_window_ms);
      r.win.assign(static_cast<std::size_t>(nwin), WindowAcc{});
      r.m.ue_id = u.id;
      ues_.push_back(std::move(r));
    }
    metrics_.protocol = handover::to_string(s.protocol.protocol);
    metrics_.seed = s.noise.seed;
    metrics_.duration_ms = dur_;
    metrics_.window_ms = s.output.window_ms;
  }

  RunResult run() {
    for (long t = 0; t < dur_; ++t) {
      pose_ = mobility_step(s_.trajectory, static_cast<double>(t) / 1000.0, s_.duration_s);
      attach_tick(t);
      fire_timers(t);
      drain(t);
      for (std::size_t i = 0; i < ues_.size(); ++i) data_tick(t, i);
      reconfig_and_links(t);
    }
    return finish();
  }

 private:
  // --- setup ---------------------------------------------------------------

  void prepare_codebook(const codebook::Codebook* cb) {
    if (!cb) {
      if (s_.surface.codebook_path.empty())
        fail(ErrorCode::config, "surface.codebook_path: wall-street runs need a codebook");
      owned_ = codebook::load_codebook(s_.surface.codebook_path, s_.surface.geometry);
      cb = &*owned_;
    }
    if (!(cb->geometry() == s_.surface.geometry))
      fail(ErrorCode::config, "surface: codebook geometry does not match the scenario surface");
    if (cb->incident_deg() != s_.surface.codebook_incident_deg)
      fail(ErrorCode::config, "surface.codebook_incident_deg: codebook was built for " +
                                  io::format_double(cb->incident_deg()) + " deg");
    for (const auto& k : required_keys(s_))
      if (!cb->find(k))
        fail(ErrorCode::config, "surface.codebook_path: codebook lacks key " + codebook::to_string(k));
    cb_ = cb;
  }

  const std::vector<surface::AtomCoeffs>& coeffs(const CodebookKey& k) {
    auto it = coeff_cache_.find(k);
    if (it == coeff_cache_.end())
      it = coeff_cache_.emplace(k, surface::coefficients(cb_->at(k).config, s_.surface.geometry)).first;
    return it->second;
  }

  channel::SurfaceState state_for(const CodebookKey& k) {
    return {coeffs(k), codebook::surface_mode(k)};
  }

  // --- channel queries -------------------------------------------------------

  // Evaluates one link, applies replay, and records it.
  channel::RsrpSample query(long t, int ue, int gnb, Path path, const channel::LinkTerms& terms,
                            const char* tag, const std::optional<CodebookKey>& key,
                            double* per_out = nullptr) {
    auto smp = ch_.rsrp(terms, path, gnb, ue, t, seed_);
    if (replay_) {
      smp.value_dbm = replay_->value(t, ue, gnb, path, tag);
      smp.outage = smp.value_dbm == -INFINITY;
    }
    const double sinr = ch_.sinr_db(smp.value_dbm);
    const double per = ch_.in_outage(smp) ? 1.0
                                          : per_from_sinr(sinr, s_.protocol.per_midpoint_db,
                                                          s_.protocol.per_slope);
    if (per_out) *per_out = per;
    TraceRecord r;
    r.t_ms = t;
    r.ue_id = ue;
    r.gnb_id = gnb;
    r.path = channel::to_string(path);
    r.gnb_beam = smp.gnb_beam;
    if (key) {
      r.surf_t_deg = key->theta_t_deg;
      r.surf_r_deg = key->theta_r_deg;
      r.alpha = key->alpha;
    }
    r.rsrp_dbm = smp.value_dbm;
    r.sinr_db = sinr;
    r.per = per;
    r.event = tag;
    trace_.push_back(std::move(r));
    return smp;
  }

  channel::RsrpSample transmissive(long t, int gnb, int ue, const CodebookKey& k, const char* tag,
                                   int gb = -1, int ub = -1, double* per = nullptr) {
    const auto terms = ch_.transmissive_terms(pose_, gnb, ue, state_for(k), gb, ub);
    return query(t, ue, gnb, Path::surface_transmissive, terms, tag, k, per);
  }

  channel::RsrpSample direct(long t, int gnb, int ue, const char* tag, int gb = -1, int ub = -1,
                             double* per = nullptr) {
    const auto terms = ch_.direct_terms(pose_, gnb, ue, gb, ub);
    return query(t, ue, gnb, Path::direct, terms, tag, std::nullopt, per);
  }

  double value(const channel::RsrpSample& smp) const {
    return ch_.in_outage(smp) ? -INFINITY : smp.value_dbm;
  }

  void event_record(long t, int ue, int gnb, const std::string& ev, double v = std::nan("")) {
    TraceRecord r;
    r.t_ms = t;
    r.ue_id = ue;
    r.gnb_id = gnb;
    r.path = "-";
    r.rsrp_dbm = v;
    r.sinr_db = std::nan("");
    r.per = std::nan("");
    r.event = ev;
    trace_.push_back(std::move(r));
  }

  // --- attachment -------------------------------------------------------------

  handover::MachineConfig machine_config() const {
    handover::MachineConfig c;
    c.protocol = s_.protocol.protocol;
    c.h_db = s_.protocol.h_db;
    c.ttt_ms = s_.protocol.ttt_ms;
    c.scan_blackout_ms = s_.timing.scan_blackout_ms;
    c.scan_aftermath_ms = s_.timing.scan_aftermath_ms;
    c.rach_gap_ms = s_.timing.rach_gap_ms;
    c.burst_ms = s_.timing.burst_ms;
    c.l_min_db = ch_.l_min();
    c.l_max_db = ch_.l_max();
    c.hold_mbb = s_.protocol.mbb_hold;
    return c;
  }

  // SA: per UE over direct paths; the surface-angle dimension is unused.
  std::optional<int> attach_sa(long t, int ue) {
    int best_gnb = -1;
    double best = -INFINITY;
    for (const auto& g : s_.gnbs) {
      std::map<std::pair<int, int>, std::optional<double>> memo;
      const auto res = handover::initial_attachment([&](int gb, int, int ub) {
        auto it = memo.find({gb, ub});
        if (it == memo.end()) {
          const double v = value(direct(t, g.id, ue, kTagAttach, gb, ub));
          it = memo.emplace(std::make_pair(gb, ub),
                            v == -INFINITY ? std::nullopt : std::optional<double>(v)).first;
        }
        return it->second;
      });
      if (res.found && res.rsrp_dbm > best) {
        best = res.rsrp_dbm;
        best_gnb = g.id;
      }
    }
    if (best_gnb < 0) return std::nullopt;
    return best_gnb;
  }

  // WS: per gNB, every UE sweeps the surface attachment angles; the serving
  // cell maximizes the summed per-UE best RSRP.
  std::optional<int> attach_ws(long t) {
    int best_gnb = -1;
    double best = -INFINITY;
    for (const auto& g : s_.gnbs) {
      std::vector<std::optional<double>> ks;
      for (double a : s_.surface.attach_angles_deg) ks.push_back(attach_key(s_, ch_, pose_, g.id, a));
      double sum = 0.0;
      bool all = true;
      for (const auto& u : s_.ues) {
        const auto res = handover::initial_attachment([&](int gb, int k, int ub) -> std::optional<double> {
          if (!ks[static_cast<std::size_t>(k)]) return std::nullopt;
          const double v =
              value(transmissive(t, g.id, u.id, single_key(*ks[static_cast<std::size_t>(k)]),
                                 kTagAttach, gb, ub));
          if (v == -INFINITY) return std::nullopt;
          return v;
        });
        if (!res.found) {
          all = false;
          break;
        }
        sum += res.rsrp_dbm;
      }
      if (all && sum > best) {
        best = sum;
        best_gnb = g.id;
      }
    }
    if (best_gnb < 0) return std::nullopt;
    return best_gnb;
  }

  void attach_tick(long t) {
    const long elapsed = handover::kAttachBursts * handover::kSsbPeriodMs;
    if (ws_) {
      UeRt& lead = ues_.front();
      if (lead.machine >= 0) return;
      if (t == lead.attach_at) {
        const auto g = attach_ws(t);
        for (auto& u : ues_) {
          if (g) {
            u.attach_until = t + elapsed;
            u.attach_gnb = *g;
          } else {
            u.attach_at = t + s_.timing.mr_period_ms;
            u.initial = false;
          }
        }
        event_record(t, -1, g ? *g : -1, g ? "attach_start" : "attach_failed");
      }
      if (t == lead.attach_until) {
        std::vector<int> ids;
        for (const auto& u : s_.ues) ids.push_back(u.id);
        add_machine(t, lead.attach_gnb, ids);
        for (auto& u : ues_) u.machine = static_cast<int>(machines_.size()) - 1;
        if (s_.protocol.mbb_hold) {
          if (s_.protocol.mbb_target == lead.attach_gnb)
            fail(ErrorCode::config, "protocol.mbb_target: equals the attached serving cell " +
                                        std::to_string(lead.attach_gnb));
          handover::Event e;
          e.kind = EventKind::force_mbb;
          e.t_ms = t;
          e.target = s_.protocol.mbb_target;
          push(t, static_cast<int>(machines_.size()) - 1, e);
        }
      }
      return;
    }
    for (auto& u : ues_) {
      if (u.machine >= 0) continue;
      if (t == u.attach_at) {
        const auto g = attach_sa(t, u.id);
        if (g) {
          u.attach_until = t + elapsed;
          u.attach_gnb = *g;
        } else {
          u.attach_at = t + s_.timing.mr_period_ms;
          u.initial = false;
        }
        event_record(t, u.id, g ? *g : -1, g ? "attach_start" : "attach_failed");
      }
      if (t == u.attach_until) {
        add_machine(t, u.attach_gnb, {u.id});
        u.machine = static_cast<int>(machines_.size()) - 1;
      }
    }
  }

  void add_machine(long t, int serving, std::vector<int> ue_ids) {
    MachineRt mr;
    mr.m = handover::make_machine(machine_config(), serving, std::move(ue_ids));
    mr.pp = handover::PingPongCounter(s_.protocol.ping_pong_window_ms);
    mr.next_mr = t + s_.timing.mr_period_ms;
    machines_.push_back(std::move(mr));
    event_record(t, machines_.back().m.ues.size() == 1 ? machines_.back().m.ues.front() : -1,
                 serving, "attached");
  }

  // --- event queue ------------------------------------------------------------

  void push(long t, int machine, handover::Event e) {
    e.t_ms = t;
    queue_.emplace(std::make_pair(t, qseq_++), Queued{machine, std::move(e)});
  }

  void fire_timers(long t) {
    for (std::size_t k = 0; k < machines_.size(); ++k) {
      if (machines_[k].next_mr != t) continue;
      machines_[k].next_mr += s_.timing.mr_period_ms;
      handover::Event e;
      e.kind = EventKind::mr_timer;
      push(t, static_cast<int>(k), e);
    }
  }

  void drain(long t) {
    while (!queue_.empty() && queue_.begin()->first.first <= t) {
      auto node = queue_.extract(queue_.begin());
      apply(t, node.mapped().machine, node.mapped().event);
    }
  }

  int vehicle_ue(const MachineRt& mr) const {
    return mr.m.ues.size() == 1 ? mr.m.ues.front() : -1;
  }

  void apply(long t, int k, const handover::Event& e) {
    MachineRt& mr = machines_[static_cast<std::size_t>(k)];
    const int old_serving = mr.m.serving;
    const HoState before = mr.m.state;
    auto res = handover::step(mr.m, e);
    mr.m = std::move(res.machine);
    if (e.kind != EventKind::mr_timer || before != mr.m.state)
      event_record(t, vehicle_ue(mr), mr.m.serving,
                   std::string("event:") + handover::to_string(e.kind) + ":" +
                       handover::to_string(mr.m.state));
    for (const auto& a : res.actions) act(t, k, old_serving, a);
  }

  void act(long t, int k, int old_serving, const handover::Action& a) {
    MachineRt& mr = machines_[static_cast<std::size_t>(k)];
    const int vue = vehicle_ue(mr);
    switch (a.kind) {
      case ActionKind::interrupt:
      case ActionKind::degrade: {
        for (int id : a.ues) {
          Interval iv{a.t_ms, a.t_ms + a.duration_ms, a.cause, a.factor,
                      a.kind == ActionKind::interrupt};
          ue_rt(id).intervals.push_back(iv);
        }
        event_record(t, vue, mr.m.serving,
                     std::string(handover::to_string(a.kind)) + ":" + handover::to_string(a.cause) +
                         ":" + std::to_string(a.t_ms) + "+" + std::to_string(a.duration_ms));
        if (a.kind == ActionKind::interrupt && a.cause == handover::Cause::rach) {
          handover::Event d;
          d.kind = EventKind::done;
          push(a.t_ms + a.duration_ms, k, d);
        }
        return;
      }
      case ActionKind::measure: {
        ++metrics_.mr_events;
        event_record(t, vue, mr.m.serving, "measure");
        handover::Event rep;
        rep.kind = EventKind::scan_report;
        const int ue = mr.m.ues.front();
        rep.m_s_dbm = value(direct(t, mr.m.serving, ue, kTagMeas));
        for (const auto& g : s_.gnbs) {
          if (g.id == mr.m.serving) continue;
          rep.neighbors.push_back({g.id, value(direct(t, g.id, ue, kTagMeas)), 0.0, 0.0});
        }
        push(t + s_.timing.scan_blackout_ms, k, rep);
        return;
      }
      case ActionKind::scan: {
        ++metrics_.mr_events;
        event_record(t, -1, mr.m.serving, "scan");
        mr.scan_from = t;
        mr.scan_until = t + s_.timing.burst_ms;
        handover::Event rep;
        rep.kind = EventKind::scan_report;
        std::optional<double> ts;
        for (int id : mr.m.ues)
          if ((ts = theta_key(s_, ch_, pose_, mr.m.serving, id))) break;
        for (const auto& g : s_.gnbs) {
          if (g.id == mr.m.serving) continue;
          if (!ts || ch_.incident(pose_, g.id).back_side) {
            rep.neighbors.push_back({g.id, -INFINITY, s_.surface.scan_angles_deg.front(), 0.0});
            continue;
          }
          const auto sr = handover::neighbor_scan(
              *ts, *cb_, s_.surface.scan_angles_deg,
              [&](const codebook::CodebookEntry& entry) {
                const auto terms = ch_.reflective_terms(pose_, g.id, mr.m.serving, state_for(entry.key));
                return value(query(t, -1, g.id, Path::surface_reflective, terms, kTagScan, entry.key));
              },
              s_.protocol.alpha_slot1);
          const auto& best = sr.samples[sr.best];
          const CodebookKey bk{*ts, best.theta_r_deg, s_.protocol.alpha_slot1,
                               KeyMode::dual_transflective};
          rep.neighbors.push_back({g.id, best.m_r_dbm, best.theta_r_deg,
                                   cb_->at(bk).g_w_ref_db + s_.surface.surface_gain_db});
        }
        push(t + s_.timing.burst_ms, k, rep);
        return;
      }
      case ActionKind::slot2: {
        event_record(t, -1, mr.m.serving, "slot2");
        double best_m = -INFINITY;
        double theta_r = s_.surface.scan_angles_deg.front();
        for (const auto& n : mr.m.slot1)
          if (n.m_dbm > best_m) {
            best_m = n.m_dbm;
            theta_r = n.theta_r_deg;
          }
        mr.slot2_from = t;
        mr.slot2_until = t + s_.timing.burst_ms;
        mr.slot2_theta_r = theta_r;
        handover::Event rep;
        rep.kind = EventKind::slot2_report;
        for (int id : mr.m.ues) {
          handover::UeReport u;
          u.ue = id;
          u.g_ue_db = ch_.g_ue(id, -1);
          if (const auto ts = theta_key(s_, ch_, pose_, mr.m.serving, id)) {
            const CodebookKey key{*ts, theta_r, s_.protocol.alpha_slot2, KeyMode::dual_transflective};
            u.m_s_dbm = value(transmissive(t, mr.m.serving, id, key, kTagSlot2));
            u.g_w_tra_db = cb_->at(key).g_w_tra_db + s_.surface.surface_gain_db;
          } else {
            u.m_s_dbm = -INFINITY;
          }
          rep.ues.push_back(u);
        }
        push(t + s_.timing.burst_ms, k, rep);
        return;
      }
      case ActionKind::decision: {
        ++metrics_.decisions;
        const bool ho = a.decision == handover::Decision::handover;
        if (ho) ++metrics_.handover_decisions;
        const double v = a.estimate ? a.estimate->delta_min : std::nan("");
        event_record(t, vue, a.target, std::string("decision:") + handover::to_string(a.decision), v);
        return;
      }
      case ActionKind::xn_request: {
        event_record(t, vue, a.target, "xn_request");
        handover::Event ack;
        ack.kind = EventKind::xn_ack;
        push(t + s_.timing.xn_delay_ms, k, ack);
        return;
      }
      case ActionKind::handover:
        ++metrics_.handover_actions;
        metrics_.ue_context_transfers += static_cast<long>(a.ues.size());
        event_record(t, vue, a.target, "handover:ues=" + std::to_string(a.ues.size()));
        return;
      case ActionKind::mbb_start:
        event_record(t, -1, a.target, "mbb_start");
        return;
      case ActionKind::mbb_check_request: {
        ++metrics_.mr_events;
        event_record(t, -1, a.target, "mbb_check_request");
        handover::Event rep;
        rep.kind = EventKind::mbb_check;
        for (int id : mr.m.ues) {
          handover::UeReport u;
          u.ue = id;
          u.m_s_dbm = -INFINITY;
          u.m_n_dbm = -INFINITY;
          const auto links = ws_links(mr, id, t);
          for (const auto& l : links) {
            const double v = value(transmissive(t, l.gnb, id, *l.key, kTagCheck));
            if (l.gnb == mr.m.serving) u.m_s_dbm = v;
            else u.m_n_dbm = v;
          }
          rep.ues.push_back(u);
        }
        push(t + 1, k, rep);
        return;
      }
      case ActionKind::complete: {
        ++metrics_.ho_count;
        if (mr.pp.record(old_serving, a.target, t)) ++metrics_.ping_pong_count;
        event_record(t, vue, a.target, "complete:from=" + std::to_string(old_serving));
        handover::Event d;
        d.kind = EventKind::done;
        push(t + 1, k, d);
        return;
      }
      case ActionKind::revert: {
        ++metrics_.reverts;
        event_record(t, -1, mr.m.serving, "revert");
        handover::Event d;
        d.kind = EventKind::done;
        push(t + 1, k, d);
        return;
      }
    }
  }

  UeRt& ue_rt(int id) {
    for (auto& u : ues_)
      if (u.id == id) return u;
    fail(ErrorCode::internal, "unknown UE " + std::to_string(id));
  }

  // --- data plane ---------------------------------------------------------------

  std::vector<LinkUse> ws_links(const MachineRt& mr, int ue, long t) {
    const auto ts = theta_key(s_, ch_, pose_, mr.m.serving, ue);
    if (!ts) return {};
    const auto st = mr.m.state;
    const bool mbb = (st == HoState::executing_mbb || st == HoState::completing ||
                      st == HoState::reverting) && mr.m.target >= 0;
    if (mbb) {
      if (const auto tn = theta_key(s_, ch_, pose_, mr.m.target, ue)) {
        const CodebookKey k{*ts, *tn, s_.protocol.alpha_mbb, KeyMode::dual_transmissive};
        return {{mr.m.serving, Path::surface_transmissive, k}, {mr.m.target, Path::surface_transmissive, k}};
      }
      return {{mr.m.serving, Path::surface_transmissive, single_key(*ts)}};
    }
    if (t >= mr.scan_from && t < mr.scan_until) {
      const long idx = std::min<long>(channel::kSurfaceScanAngles - 1,
                                      (t - mr.scan_from) * channel::kSurfaceScanAngles /
                                          s_.timing.burst_ms);
      const CodebookKey k{*ts, s_.surface.scan_angles_deg[static_cast<std::size_t>(idx)],
                          s_.protocol.alpha_slot1, KeyMode::dual_transflective};
      return {{mr.m.serving, Path::surface_transmissive, k}};
    }
    if (t >= mr.slot2_from && t < mr.slot2_until) {
      const CodebookKey k{*ts, mr.slot2_theta_r, s_.protocol.alpha_slot2, KeyMode::dual_transflective};
      return {{mr.m.serving, Path::surface_transmissive, k}};
    }
    return {{mr.m.serving, Path::surface_transmissive, single_key(*ts)}};
  }

  std::vector<LinkUse> links_for(const UeRt& u, long t) {
    if (u.machine < 0) return {};
    const MachineRt& mr = machines_[static_cast<std::size_t>(u.machine)];
    if (ws_) return ws_links(mr, u.id, t);
    return {{mr.m.serving, Path::direct, std::nullopt}};
  }

  void credit(UeRt& u, long t, const std::vector<long>& released) {
    for (long seq : released) {
      const double b = u.bits[static_cast<std::size_t>(seq)];
      u.m.delivered_bits += b;
      u.win[static_cast<std::size_t>(t / s_.output.window_ms)].delivered_bits += b;
    }
  }

  void data_tick(long t, std::size_t i) {
    UeRt& u = ues_[i];
    WindowAcc& w = u.win[static_cast<std::size_t>(t / s_.output.window_ms)];
    credit(u, t, u.buf.flush(t));

    if (u.machine < 0) {
      if (u.initial) ++u.m.attach_ms;
      else {
        ++u.m.outage_ms;
        ++w.outage;
      }
      tick_link_ok_[i] = false;
      return;
    }

    bool interrupted = false;
    double factor = reconfig_factor_;
    for (const auto& iv : u.intervals) {
      if (t < iv.from || t >= iv.to) continue;
      if (iv.interrupt) {
        interrupted = true;
        if (iv.cause == handover::Cause::measurement) ++u.m.measurement_interruption_ms;
        if (iv.cause == handover::Cause::rach) ++u.m.rach_interruption_ms;
      } else {
        factor *= iv.factor;
      }
    }
    std::erase_if(u.intervals, [&](const Interval& iv) { return iv.to <= t + 1; });

    const auto links = links_for(u, t);
    struct Eval {
      int gnb;
      double sinr;
      double per;
      bool outage;
    };
    std::vector<Eval> ev;
    for (const auto& l : links) {
      double per = 1.0;
      channel::RsrpSample smp;
      if (l.key) smp = transmissive(t, l.gnb, u.id, *l.key, kTagData, -1, -1, &per);
      else smp = direct(t, l.gnb, u.id, kTagData, -1, -1, &per);
      ev.push_back({l.gnb, ch_.sinr_db(smp.value_dbm), per, ch_.in_outage(smp)});
    }
    const bool outage = std::all_of(ev.begin(), ev.end(), [](const Eval& e) { return e.outage; });
    tick_link_ok_[i] = !outage;
    if (outage) {
      ++u.m.outage_ms;
      ++w.outage;
    }
    if (interrupted) {
      ++u.m.interruption_ms;
      ++w.interruption;
    } else if (factor < 1.0 && !outage) {
      ++u.m.degraded_ms;
    }
    if (outage || interrupted) return;

    double best_sinr = -INFINITY;
    double per_comb = 1.0;
    for (const auto& e : ev)
      if (!e.outage) {
        best_sinr = std::max(best_sinr, e.sinr);
        per_comb *= e.per;
      }
    const double rate = goodput_mbps(best_sinr, s_.protocol.bandwidth_mhz * 1e6,
                                     s_.protocol.efficiency, false, false, factor);
    const double bits = rate * 1e3;  // Mb/s over one 1 ms tick
    const long pkt = u.pkt++;
    u.m.sent_bits += bits;
    ++w.sent;
    bool any = false;
    std::vector<int> ok_links;
    for (std::size_t k = 0; k < ev.size(); ++k) {
      const bool lost = ev[k].outage || loss_draw(seed_, u.id, ev[k].gnb, pkt) < ev[k].per;
      if (k == 0) {
        ++w.a_sent;
        if (lost) ++w.a_lost;
      } else {
        ++w.b_sent;
        if (lost) ++w.b_lost;
      }
      if (!lost) {
        any = true;
        ok_links.push_back(static_cast<int>(k));
      }
    }
    if (!any) {
      ++w.lost;
      u.m.lost_bits += bits;
    } else {
      const long seq = u.buf_seq++;
      u.bits.push_back(bits);
      for (int k : ok_links) credit(u, t, u.buf.deliver(k, seq, t));
    }
    if (rate > 0.0) {
      w.rtt_sum += s_.protocol.base_rtt_ms + s_.protocol.packet_bits / (rate * 1e6) * 1e3 +
                   per_comb * s_.protocol.retx_penalty_ms;
      ++w.rtt_n;
    }
  }

  // Counts surface reconfigurations and raises link events.
  void reconfig_and_links(long t) {
    reconfig_factor_ = 1.0;
    for (std::size_t k = 0; k < machines_.size(); ++k) {
      MachineRt& mr = machines_[k];
      bool ok = false;
      for (int id : mr.m.ues)
        for (std::size_t i = 0; i < ues_.size(); ++i)
          if (ues_[i].id == id && tick_link_ok_[i]) ok = true;
      if (ok != mr.m.link_ok && !pending_link_[k]) {
        handover::Event e;
        e.kind = ok ? EventKind::link_restored : EventKind::link_lost;
        push(t + 1, static_cast<int>(k), e);
        pending_link_[k] = true;
      } else if (ok == mr.m.link_ok) {
        pending_link_[k] = false;
      }
      if (!ws_) continue;
      // Surface configuration for the next tick.
      std::vector<std::optional<CodebookKey>> keys;
      if (t + 1 < dur_) {
        for (int id : mr.m.ues) {
          const auto links = ws_links(mr, id, t + 1);
          keys.push_back(links.empty() ? std::nullopt : links.front().key);
        }
      }
      if (!mr.prev_keys.empty() && !keys.empty() && keys != mr.prev_keys) {
        ++metrics_.reconfig_count;
        metrics_.reconfig_ms += s_.timing.reconfig_ms;
        reconfig_factor_ = 1.0 - s_.timing.reconfig_ms;
      }
      if (!keys.empty()) mr.prev_keys = std::move(keys);
    }
  }

  // --- results --------------------------------------------------------------------

  RunResult finish() {
    const double wms = static_cast<double>(s_.output.window_ms);
    for (auto& u : ues_) {
      u.m.duplicates = u.buf.duplicates();
      handover::DapsBuffer held = u.buf;
      for (long seq : held.flush_all()) u.m.inflight_bits += u.bits[static_cast<std::size_t>(seq)];
      for (std::size_t j = 0; j < u.win.size(); ++j) {
        const auto& a = u.win[j];
        UeWindow w;
        w.start_ms = static_cast<long>(j) * s_.output.window_ms;
        w.throughput_mbps = a.delivered_bits / wms / 1e3;
        w.rtt_ms = a.rtt_n ? a.rtt_sum / static_cast<double>(a.rtt_n) : std::nan("");
        w.per = a.sent ? static_cast<double>(a.lost) / static_cast<double>(a.sent) : std::nan("");
        w.per_link_a = a.a_sent ? static_cast<double>(a.a_lost) / static_cast<double>(a.a_sent)
                                : std::nan("");
        w.per_link_b = a.b_sent ? static_cast<double>(a.b_lost) / static_cast<double>(a.b_sent)
                                : std::nan("");
        w.outage_ms = a.outage;
        w.interruption_ms = a.interruption;
        u.m.windows.push_back(w);
      }
      metrics_.outage_ms += u.m.outage_ms;
      metrics_.measurement_interruption_ms += u.m.measurement_interruption_ms;
      metrics_.ues.push_back(u.m);
    }
    return {metrics_, std::move(trace_)};
  }

  const Scenario& s_;
  channel::Channel ch_;
  long dur_;
  std::uint64_t seed_;
  bool ws_;
  std::optional<codebook::Codebook> owned_;
  const codebook::Codebook* cb_ = nullptr;
  std::map<CodebookKey, std::vector<surface::AtomCoeffs>> coeff_cache_;
  std::optional<ReplaySource> replay_;
  channel::VehiclePose pose_;
  std::vector<UeRt> ues_;
  std::vector<MachineRt> machines_;
  std::map<std::pair<long, long>, Queued> queue_;
  long qseq_ = 0;
  std::vector<TraceRecord> trace_;
  Metrics metrics_;
  double reconfig_factor_ = 1.0;
  std::vector<bool> tick_link_ok_ = std::vector<bool>(s_.ues.size(), false);
  std::map<std::size_t, bool> pending_link_;
};

}  // namespace

RunResult run(const Scenario& s, const codebook::Codebook* cb) {
  s.validate();
  Engine e(s, cb);
  return e.run();
}

// --- reporting ------------------------------------------------------------------

std::string format_metrics(const Metrics& m) {
  using io::format_double;
  std::string out =
      "ue_id,window_start_ms,throughput_mbps,rtt_ms,per,per_link_a,per_link_b,outage_ms,"
      "interruption_ms\n";
  for (const auto& u : m.ues)
    for (const auto& w : u.windows)
      out += std::to_string(u.ue_id) + ',' + std::to_string(w.start_ms) + ',' +
             format_double(w.throughput_mbps) + ',' + format_double(w.rtt_ms) + ',' +
             format_double(w.per) + ',' + format_double(w.per_link_a) + ',' +
             format_double(w.per_link_b) + ',' + std::to_string(w.outage_ms) + ',' +
             std::to_string(w.interruption_ms) + '\n';
  out += "\n# summary\n";
  auto kv = [&](const std::string& k, const std::string& v) { out += k + ',' + v + '\n'; };
  kv("protocol", m.protocol);
  kv("seed", std::to_string(m.seed));
  kv("duration_ms", std::to_string(m.duration_ms));
  kv("window_ms", std::to_string(m.window_ms));
  kv("ho_count", std::to_string(m.ho_count));
  kv("ping_pong_count", std::to_string(m.ping_pong_count));
  kv("handover_actions", std::to_string(m.handover_actions));
  kv("ue_context_transfers", std::to_string(m.ue_context_transfers));
  kv("decisions", std::to_string(m.decisions));
  kv("handover_decisions", std::to_string(m.handover_decisions));
  kv("reverts", std::to_string(m.reverts));
  kv("mr_events", std::to_string(m.mr_events));
  kv("reconfig_count", std::to_string(m.reconfig_count));
  kv("reconfig_ms", format_double(m.reconfig_ms));
  kv("measurement_interruption_ms", std::to_string(m.measurement_interruption_ms));
  kv("outage_ms", std::to_string(m.outage_ms));
  for (const auto& u : m.ues) {
    const std::string p = "ue" + std::to_string(u.ue_id) + ".";
    kv(p + "outage_ms", std::to_string(u.outage_ms));
    kv(p + "interruption_ms", std::to_string(u.interruption_ms));
    kv(p + "measurement_interruption_ms", std::to_string(u.measurement_interruption_ms));
    kv(p + "rach_interruption_ms", std::to_string(u.rach_interruption_ms));
    kv(p + "degraded_ms", std::to_string(u.degraded_ms));
    kv(p + "attach_ms", std::to_string(u.attach_ms));
    kv(p + "sent_bits", format_double(u.sent_bits));
    kv(p + "delivered_bits", format_double(u.delivered_bits));
    kv(p + "lost_bits", format_double(u.lost_bits));
    kv(p + "inflight_bits", format_double(u.inflight_bits));
    kv(p + "duplicates", std::to_string(u.duplicates));
  }
  return out;
}

namespace {

PercentileSet percentiles(const std::vector<double>& v) {
  return {percentile(v, 10), percentile(v, 50), percentile(v, 90)};
}

PercentileSet minus(const PercentileSet& a, const PercentileSet& b) {
  return {a.p10 - b.p10, a.p50 - b.p50, a.p90 - b.p90};
}

}  // namespace

CompareReport compare(const Scenario& s, const std::vector<handover::Protocol>& protocols,
                      const codebook::Codebook* cb) {
  require(protocols.size() >= 2, ErrorCode::config, "compare needs at least two protocols");
  CompareReport r;
  for (auto p : protocols) {
    Scenario sc = s;
    sc.protocol.protocol = p;
    if (p != handover::Protocol::wall_street) sc.protocol.mbb_hold = false;
    auto res = run(sc, cb);
    ProtocolSummary ps;
    ps.protocol = handover::to_string(p);
    std::vector<double> thr, rtt;
    for (const auto& u : res.metrics.ues)
      for (const auto& w : u.windows) {
        thr.push_back(w.throughput_mbps);
        rtt.push_back(w.rtt_ms);
      }
    ps.throughput = percentiles(thr);
    ps.rtt = percentiles(rtt);
    ps.metrics = std::move(res.metrics);
    r.runs.push_back(std::move(ps));
  }
  for (const auto& ps : r.runs) {
    r.throughput_delta.push_back(minus(ps.throughput, r.runs.front().throughput));
    r.rtt_delta.push_back(minus(ps.rtt, r.runs.front().rtt));
  }
  return r;
}

std::string format_compare(const CompareReport& r) {
  using io::format_double;
  std::string out =
      "protocol,thr_p10,thr_p50,thr_p90,rtt_p10,rtt_p50,rtt_p90,d_thr_p10,d_thr_p50,d_thr_p90,"
      "d_rtt_p10,d_rtt_p50,d_rtt_p90,ho_count,ping_pong_count,handover_actions,outage_ms,"
      "measurement_interruption_ms\n";
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    const auto& p = r.runs[i];
    const auto& dt = r.throughput_delta[i];
    const auto& dr = r.rtt_delta[i];
    out += p.protocol + ',' + format_double(p.throughput.p10) + ',' +
           format_double(p.throughput.p50) + ',' + format_double(p.throughput.p90) + ',' +
           format_double(p.rtt.p10) + ',' + format_double(p.rtt.p50) + ',' +
           format_double(p.rtt.p90) + ',' + format_double(dt.p10) + ',' + format_double(dt.p50) +
           ',' + format_double(dt.p90) + ',' + format_double(dr.p10) + ',' +
           format_double(dr.p50) + ',' + format_double(dr.p90) + ',' +
           std::to_string(p.metrics.ho_count) + ',' + std::to_string(p.metrics.ping_pong_count) +
           ',' + std::to_string(p.metrics.handover_actions) + ',' +
           std::to_string(p.metrics.outage_ms) + ',' +
           std::to_string(p.metrics.measurement_interruption_ms) + '\n';
  }
  out += "\n# per-window throughput (Mb/s)\nprotocol,ue_id,window_start_ms,throughput_mbps,rtt_ms\n";
  for (const auto& p : r.runs)
    for (const auto& u : p.metrics.ues)
      for (const auto& w : u.windows)
        out += p.protocol + ',' + std::to_string(u.ue_id) + ',' + std::to_string(w.start_ms) + ',' +
               format_double(w.throughput_mbps) + ',' + format_double(w.rtt_ms) + '\n';
  return out;
}

}  // namespace ws::sim
