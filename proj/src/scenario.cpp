#include "scenario.hpp"

#include <cmath>
#include <set>

#include "errors.hpp"

namespace ws::sim {

const char* to_string(RunMode m) { return m == RunMode::synthetic ? "synthetic" : "trace-replay"; }

RunMode run_mode_from_string(const std::string& s) {
  if (s == "synthetic") return RunMode::synthetic;
  if (s == "trace-replay") return RunMode::trace_replay;
  fail(ErrorCode::parse, "unknown run mode '" + s + "' (expected synthetic or trace-replay)");
}

namespace {
void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) fail(ErrorCode::config, key + ": " + what);
}
}  // namespace

long Scenario::duration_ms() const { return std::lround(duration_s * 1000.0); }

channel::ChannelParams Scenario::channel_params() const {
  channel::ChannelParams p;
  p.l_window_db = l_window_db;
  p.surface_gain_db = surface.surface_gain_db;
  p.noise_floor_dbm = noise.noise_floor_dbm;
  p.outage_sinr_db = noise.outage_sinr_db;
  p.shadow_sigma_db = noise.shadow_sigma_db;
  p.shadow_block_ms = noise.shadow_block_ms;
  p.carrier_ghz = surface.geometry.carrier_ghz;
  p.d_min_m = d_min_m;
  p.d_max_m = d_max_m;
  return p;
}

void Scenario::validate() const {
  check(duration_s > 0.0, "geometry.duration_s", "must be > 0");
  check(std::abs(duration_s * 1000.0 - static_cast<double>(duration_ms())) < 1e-6,
        "geometry.duration_s", "must be a whole number of milliseconds");
  check(output.window_ms > 0 && duration_ms() % output.window_ms == 0, "output.window_ms",
        "must be positive and divide the duration exactly");
  check(trajectory.speed_kmh > 0.0, "geometry.speed_kmh", "must be > 0");
  check(!trajectory.waypoints.empty(), "geometry.waypoint", "trajectory needs at least one waypoint");
  check(l_window_db >= 0.0, "geometry.l_window_db", "must be >= 0");
  check(d_min_m > 0.0 && d_min_m <= d_max_m, "geometry.d_min_m", "need 0 < d_min_m <= d_max_m");
  check(body.length_m > 0 && body.width_m > 0, "geometry.vehicle_length_m", "vehicle size must be > 0");

  check(!gnbs.empty(), "gnbs.gnb", "at least one gNB is required");
  std::set<int> ids, freqs;
  for (const auto& g : gnbs) {
    const std::string key = "gnbs.gnb[id=" + std::to_string(g.id) + "]";
    check(g.id >= 0, key, "id must be >= 0");
    check(ids.insert(g.id).second, key, "duplicate gNB id");
    check(freqs.insert(g.freq).second, key + ".freq", "nearby gNBs need distinct frequencies");
  }
  check(!ues.empty(), "ues.ue", "at least one UE is required");
  std::set<int> ue_ids;
  for (const auto& u : ues) {
    const std::string key = "ues.ue[id=" + std::to_string(u.id) + "]";
    check(u.id >= 0, key, "id must be >= 0");
    check(ue_ids.insert(u.id).second, key, "duplicate UE id");
    check(std::abs(u.offset.x) <= body.length_m / 2 && std::abs(u.offset.y) <= body.width_m / 2,
          key + ".x", "UE offset lies outside the vehicle body");
    check(u.body_loss_db >= 0.0, key + ".body_loss_db", "must be >= 0");
    const double d = channel::exit_distance(surface.mount, u.offset);
    check(d > 0.0, key, "UE sits on the surface");
  }

  surface.geometry.validate();
  check(surface.split_penalty >= 0.0, "surface.split_penalty", "must be >= 0");
  check(surface.key_step_deg > 0.0, "surface.key_step_deg", "must be > 0");
  check(surface.scan_angles_deg.size() == channel::kSurfaceScanAngles, "surface.scan_angles",
        "exactly 8 scan angles are required");
  check(surface.attach_angles_deg.size() == channel::kSurfaceScanAngles, "surface.attach_angles",
        "exactly 8 attachment angles are required");
  for (double a : surface.scan_angles_deg)
    check(std::abs(a) <= 70.0, "surface.scan_angles", "angles must lie within +-70 deg");
  for (double a : surface.attach_angles_deg)
    check(std::abs(a) <= 90.0, "surface.attach_angles", "angles must lie within +-90 deg");

  check(timing.ssb_period_ms > 0 && timing.burst_ms > 0 && timing.burst_ms <= timing.ssb_period_ms,
        "timing.burst_ms", "need 0 < burst_ms <= ssb_period_ms");
  check(timing.mr_period_ms > 2 * timing.burst_ms + 1, "timing.mr_period_ms",
        "must exceed the two measurement slots");
  check(timing.xn_delay_ms >= 1 && timing.rach_gap_ms >= 1, "timing.xn_delay_ms",
        "Xn delay and RACH gap must be >= 1 ms");
  check(timing.scan_blackout_ms >= 0 && timing.scan_aftermath_ms >= 0, "timing.scan_blackout_ms",
        "must be >= 0");
  check(timing.reconfig_ms >= 0.0 && timing.reconfig_ms < 1.0, "timing.reconfig_ms",
        "must lie in [0, 1) ms");

  check(protocol.h_db >= 0.0, "protocol.h_db", "must be >= 0");
  check(protocol.ttt_ms >= 0, "protocol.ttt_ms", "must be >= 0");
  for (double a : {protocol.alpha_slot1, protocol.alpha_slot2, protocol.alpha_mbb})
    check(a > 0.0 && a < 1.0, "protocol.alpha_slot1", "slot and MBB power ratios must lie in (0,1)");
  check(protocol.ping_pong_window_ms >= 0, "protocol.ping_pong_window_ms", "must be >= 0");
  check(protocol.reorder_window_ms >= 0, "protocol.reorder_window_ms", "must be >= 0");
  if (protocol.mbb_hold) {
    check(protocol.protocol == handover::Protocol::wall_street, "protocol.mbb_hold",
          "make-before-break hold needs the wall-street protocol");
    check(ids.contains(protocol.mbb_target), "protocol.mbb_target", "must name a configured gNB");
  }
  check(protocol.bandwidth_mhz > 0 && protocol.efficiency > 0 && protocol.efficiency <= 1,
        "protocol.bandwidth_mhz", "bandwidth must be > 0 and efficiency in (0,1]");
  check(protocol.per_slope > 0, "protocol.per_slope", "must be > 0");
  check(protocol.packet_bits > 0 && protocol.base_rtt_ms >= 0 && protocol.retx_penalty_ms >= 0,
        "protocol.packet_bits", "data-plane sizes and delays must be non-negative");

  check(noise.shadow_sigma_db >= 0.0, "noise.shadow_sigma_db", "must be >= 0");
  check(noise.shadow_block_ms >= 1, "noise.shadow_block_ms", "must be >= 1");
  if (output.mode == RunMode::trace_replay)
    check(!output.replay_trace.empty(), "output.replay_trace", "trace-replay mode needs a trace file");
  check(!output.trace_file.empty() && !output.metrics_file.empty(), "output.trace_file",
        "output file names must not be empty");
}

}  // namespace ws::sim
