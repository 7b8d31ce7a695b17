#pragma once

// Deterministic 1 ms discrete-event engine: mobility, SSB/MR timing, both
// protocols, the abstract data plane, traces, metrics and replay.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "codebook.hpp"
#include "scenario.hpp"

namespace ws::sim {

/// Piecewise-linear pose at constant speed; heading follows the current
/// segment. After the last waypoint the vehicle holds position. Throws
/// ErrorCode::domain for t outside [0, duration].
channel::VehiclePose mobility_step(const Trajectory& traj, double t_s, double duration_s);
double path_length_m(const Trajectory& traj);

/// eff * B * log2(1 + SNR) scaled by `factor`; zero in outage or interruption.
double goodput_mbps(double sinr_db, double bandwidth_hz, double efficiency, bool outage,
                    bool interrupted, double factor = 1.0);
double per_from_sinr(double sinr_db, double midpoint_db, double slope);

/// Nearest-rank percentile of unsorted values; NaNs are skipped. Empty -> NaN.
double percentile(std::vector<double> values, double p);

struct TraceRecord {
  long t_ms = 0;
  int ue_id = -1;
  int gnb_id = -1;
  std::string path;   // channel path name or "-" for pure protocol events
  int gnb_beam = -1;
  double surf_t_deg = 0.0;
  double surf_r_deg = 0.0;
  double alpha = 0.0;
  double rsrp_dbm = 0.0;
  double sinr_db = 0.0;
  double per = 0.0;
  std::string event;
  bool operator==(const TraceRecord&) const = default;
};

inline constexpr const char* kTraceHeader =
    "t_ms,ue_id,gnb_id,path,gnb_beam,surf_t_deg,surf_r_deg,alpha,rsrp_dbm,sinr_db,per,event";

std::string format_trace(const std::vector<TraceRecord>& records);
std::vector<TraceRecord> parse_trace(const std::string& text, const std::string& origin);

struct UeWindow {
  long start_ms = 0;
  double throughput_mbps = 0.0;
  double rtt_ms = 0.0;      // NaN when no packet was sent in the window
  double per = 0.0;         // combined PER, NaN when nothing was sent
  double per_link_a = 0.0;  // serving-link PER, NaN when unused
  double per_link_b = 0.0;  // second-link PER, NaN outside make-before-break
  long outage_ms = 0;
  long interruption_ms = 0;
};

struct UeMetrics {
  int ue_id = 0;
  std::vector<UeWindow> windows;
  long outage_ms = 0;
  long interruption_ms = 0;              // all causes
  long measurement_interruption_ms = 0;  // scan blackouts only
  long rach_interruption_ms = 0;
  long degraded_ms = 0;
  long attach_ms = 0;
  double sent_bits = 0.0;
  double delivered_bits = 0.0;
  double lost_bits = 0.0;
  double inflight_bits = 0.0;
  long duplicates = 0;
};

struct Metrics {
  std::string protocol;
  std::uint64_t seed = 0;
  long duration_ms = 0;
  long window_ms = 100;
  std::vector<UeMetrics> ues;
  long ho_count = 0;           // completed cell changes
  long ping_pong_count = 0;
  long handover_actions = 0;   // batched execution commands
  long ue_context_transfers = 0;
  long decisions = 0;
  long handover_decisions = 0;
  long reverts = 0;
  long mr_events = 0;
  long reconfig_count = 0;
  double reconfig_ms = 0.0;
  long measurement_interruption_ms = 0;
  long outage_ms = 0;
  bool operator==(const Metrics&) const = default;
};

bool operator==(const UeWindow& a, const UeWindow& b);
bool operator==(const UeMetrics& a, const UeMetrics& b);

struct RunResult {
  Metrics metrics;
  std::vector<TraceRecord> trace;
};

/// Codebook keys a scenario can touch over its trajectory.
std::vector<codebook::CodebookKey> required_keys(const Scenario& s);

/// Synthesizes every key `required_keys` lists, with the scenario's surface
/// geometry, codebook incidence and split penalty (overriding `ga`'s).
codebook::Codebook synth_codebook(const Scenario& s, std::uint64_t seed,
                                  const codebook::GaParams& ga = {}, int threads = 1);

/// Runs a scenario. A wall-street run needs `cb` (or surface.codebook_path);
/// every required key must be present before the first tick.
RunResult run(const Scenario& s, const codebook::Codebook* cb = nullptr);

std::string format_metrics(const Metrics& m);

struct PercentileSet {
  double p10 = 0.0, p50 = 0.0, p90 = 0.0;
};

struct ProtocolSummary {
  std::string protocol;
  Metrics metrics;
  PercentileSet throughput;
  PercentileSet rtt;
};

struct CompareReport {
  std::vector<ProtocolSummary> runs;
  /// Percentile deltas of each run against the first.
  std::vector<PercentileSet> throughput_delta;
  std::vector<PercentileSet> rtt_delta;
};

CompareReport compare(const Scenario& s, const std::vector<handover::Protocol>& protocols,
                      const codebook::Codebook* cb = nullptr);
std::string format_compare(const CompareReport& r);

}  // namespace ws::sim
