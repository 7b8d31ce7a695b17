#pragma once

// Simulation input: geometry, nodes, trajectory, protocol, timing, noise and
// output settings. Parsed and emitted by config.hpp.

#include <cstdint>
#include <string>
#include <vector>

#include "channel.hpp"
#include "handover.hpp"
#include "surface.hpp"

namespace ws::sim {

enum class RunMode { synthetic, trace_replay };
const char* to_string(RunMode m);
RunMode run_mode_from_string(const std::string& s);

struct Trajectory {
  std::vector<channel::Vec2> waypoints;
  double speed_kmh = 10.0;
  bool operator==(const Trajectory&) const = default;
};

struct VehicleBody {
  double length_m = 4.5;
  double width_m = 1.8;
  bool operator==(const VehicleBody&) const = default;
};

struct TimingParams {
  long ssb_period_ms = 20;
  long burst_ms = 5;
  long mr_period_ms = 160;
  long xn_delay_ms = 5;
  long rach_gap_ms = 40;
  long scan_blackout_ms = 20;
  long scan_aftermath_ms = 50;
  double reconfig_ms = 0.2;
  bool operator==(const TimingParams&) const = default;
};

struct ProtocolParams {
  handover::Protocol protocol = handover::Protocol::wall_street;
  double h_db = 10.0;
  long ttt_ms = 150;
  double alpha_slot1 = 0.75;
  double alpha_slot2 = 0.25;
  double alpha_mbb = 0.5;
  long ping_pong_window_ms = 1000;
  long reorder_window_ms = 100;
  bool mbb_hold = false;  // enter make-before-break right after attachment and stay
  int mbb_target = -1;
  // Abstract data plane.
  double bandwidth_mhz = 100.0;
  double efficiency = 0.6;
  double per_midpoint_db = 5.0;
  double per_slope = 1.0;
  double base_rtt_ms = 10.0;
  double retx_penalty_ms = 20.0;
  double packet_bits = 12000.0;
  bool operator==(const ProtocolParams&) const = default;
};

struct SurfaceParams {
  surface::SurfaceGeometry geometry{10, 0.5, 26.0};
  channel::SurfaceMount mount;
  double surface_gain_db = 48.0;
  double key_step_deg = 5.0;
  double codebook_incident_deg = 0.0;
  std::vector<double> scan_angles_deg{-35, -25, -15, -5, 5, 15, 25, 35};
  std::vector<double> attach_angles_deg{-70, -50, -30, -10, 10, 30, 50, 70};
  std::string codebook_path;
  /// GA weight on the realized beam power ratio for codebooks synthesized
  /// for this scenario. Small apertures otherwise trade one beam away.
  double split_penalty = 1.0;
  bool operator==(const SurfaceParams&) const = default;
};

struct NoiseParams {
  std::uint64_t seed = 1;
  double shadow_sigma_db = 2.0;
  int shadow_block_ms = 20;
  double noise_floor_dbm = -89.0;
  double outage_sinr_db = -5.0;
  bool operator==(const NoiseParams&) const = default;
};

struct OutputParams {
  std::string trace_file = "trace.csv";
  std::string metrics_file = "metrics.csv";
  long window_ms = 100;
  RunMode mode = RunMode::synthetic;
  std::string replay_trace;
  bool replay_calibration = false;
  double calibration_db = 10.0;
  bool operator==(const OutputParams&) const = default;
};

struct Scenario {
  std::string name = "scenario";
  double duration_s = 10.0;
  double l_window_db = 3.0;
  double d_min_m = 0.3;
  double d_max_m = 1.0;
  Trajectory trajectory;
  VehicleBody body;
  std::vector<channel::GnbSite> gnbs;
  std::vector<channel::UeSite> ues;
  SurfaceParams surface;
  TimingParams timing;
  ProtocolParams protocol;
  NoiseParams noise;
  OutputParams output;

  /// Throws ErrorCode::config with the offending key path.
  void validate() const;
  long duration_ms() const;
  channel::ChannelParams channel_params() const;
  bool operator==(const Scenario&) const = default;
};

}  // namespace ws::sim
