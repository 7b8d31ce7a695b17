#pragma once

// Handover decision primitives and the two protocol state machines:
// the standalone baseline (per-UE A3/TTT with scan pauses and RACH) and the
// surface-assisted protocol (two-slot bounding decision, batched
// make-before-break execution, revert on failed re-check).

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "codebook.hpp"

namespace ws::handover {

class A3Tracker {
 public:
  A3Tracker(double h_db = 10.0, long ttt_ms = 150);

  /// Condition m_n > m_s + h. Triggered once it has held continuously for
  /// at least ttt. Throws ErrorCode::domain when t goes backwards.
  bool update(double m_n, double m_s, long t_ms);
  /// Same timing rule for an arbitrary boolean condition.
  bool update_condition(bool condition, long t_ms);
  void reset();

  std::optional<long> condition_since() const { return since_; }
  double h_db() const { return h_; }
  long ttt_ms() const { return ttt_; }

 private:
  double h_;
  long ttt_;
  std::optional<long> since_;
  std::optional<long> last_t_;
};

struct SlotAggregates {
  double s1 = 0.0;
  std::vector<double> s2;
};

/// s1 = m_r - g_w_ref; s2_i = m_s,i - g_w_tra,i - g_ue,i.
SlotAggregates slot_aggregates(double m_r_slot1, std::span<const double> m_s_slot2,
                               double g_w_ref, std::span<const double> g_w_tra,
                               std::span<const double> g_ue);
SlotAggregates slot_aggregates(double m_r_slot1, std::span<const double> m_s_slot2,
                               double g_w_ref, double g_w_tra, std::span<const double> g_ue);

struct XsBounds {
  double lb_s = 0.0;
  double ub_s = 0.0;
  bool consistent = true;  // false when lb_s > ub_s
};

/// X_s in [max_i(s2_i - l_max), min_i(s2_i - l_min)] with signed losses.
XsBounds bound_xs(std::span<const double> s2, double l_min, double l_max);

enum class Decision { stay, handover };
const char* to_string(Decision d);

/// handover iff s1 - 2 ub_s >= h.
Decision decide(double s1, double ub_s, double h_db);

struct BoundEstimate {
  int neighbor = 0;
  double s1 = 0.0;
  std::vector<double> s2;
  double lb_s = 0.0;
  double ub_s = 0.0;
  double delta_min = 0.0;
  bool consistent = true;
};

// --- initial attachment -------------------------------------------------

inline constexpr long kSsbPeriodMs = 20;
inline constexpr long kBurstMs = 5;
inline constexpr int kAttachBursts = 4;

/// RSRP for one (gnb_beam, surface_angle, ue_beam) triple; empty = outage.
using AttachOracle = std::function<std::optional<double>(int, int, int)>;

struct AttachResult {
  bool found = false;
  int gnb_beam = 0;
  int surface_angle = 0;
  int ue_beam = 0;
  double rsrp_dbm = 0.0;
  long elapsed_ms = 0;
};

/// Argmax over 8 x 8 x 4 triples; ties go to the lowest index triple.
/// Elapsed time is always four SSB periods (80 ms).
AttachResult initial_attachment(const AttachOracle& oracle);

// --- neighbor scan ------------------------------------------------------

struct ScanSample {
  double theta_r_deg = 0.0;
  double m_r_dbm = 0.0;
};

struct ScanResult {
  std::vector<ScanSample> samples;
  long duration_ms = kBurstMs;
  long interruption_ms = 0;
  std::size_t best = 0;  // index of the strongest sample, lowest on ties
};

/// Cycles the alpha=0.75 transflective entries (theta_t, theta_r) within
/// one burst. Throws ErrorCode::config naming the missing key.
ScanResult neighbor_scan(double theta_t_deg, const codebook::Codebook& cb,
                         std::span<const double> scan_angles_deg,
                         const std::function<double(const codebook::CodebookEntry&)>& reflect_oracle,
                         double alpha = 0.75);

// --- duplicate combining --------------------------------------------------

class DapsBuffer {
 public:
  explicit DapsBuffer(long reorder_window_ms = 100);

  /// Accepts a copy of `seq` from `link`; returns sequence numbers released
  /// in order. Duplicates are counted and dropped.
  std::vector<long> deliver(int link, long seq, long t_ms);
  /// Releases everything held longer than the reorder window, skipping gaps.
  std::vector<long> flush(long t_ms);
  std::vector<long> flush_all();

  long next_expected() const { return next_; }
  long duplicates() const { return duplicates_; }
  std::size_t pending() const { return pending_.size(); }

 private:
  std::vector<long> release_in_order();

  long window_;
  long next_ = 0;
  long duplicates_ = 0;
  std::map<long, long> pending_;  // seq -> arrival time
};

// --- protocol state machines ----------------------------------------------

enum class Protocol { sa_baseline, wall_street };
const char* to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

enum class HoState {
  attached,
  scanning,
  preparing,
  deciding,
  executing_mbb,
  executing_rach,
  completing,
  reverting,
  outage
};
const char* to_string(HoState s);

enum class EventKind {
  mr_timer,       // measurement report period elapsed
  scan_report,    // SA: UE measurement report; WS: slot-1 scan finished
  slot2_report,   // WS: per-UE serving RSRP under the slot-2 entry
  xn_ack,         // target accepted the handover request
  mbb_check,      // WS: per-UE serving/target RSRP during make-before-break
  done,           // current transient phase (RACH, completion, revert) ended
  link_lost,
  link_restored,
  force_mbb       // WS: enter make-before-break toward `target` and hold
};
const char* to_string(EventKind k);

struct NeighborReport {
  int gnb = 0;
  double m_dbm = 0.0;        // SA: direct RSRP; WS: best reflected M_r
  double theta_r_deg = 0.0;  // WS: scan angle that produced m_dbm
  double g_w_ref_db = 0.0;   // WS: codebook gain of that scan entry
};

struct UeReport {
  int ue = 0;
  double m_s_dbm = 0.0;
  double g_w_tra_db = 0.0;
  double g_ue_db = 0.0;
  double m_n_dbm = 0.0;      // mbb_check only
};

struct Event {
  EventKind kind = EventKind::mr_timer;
  long t_ms = 0;
  double m_s_dbm = 0.0;                  // SA scan_report: serving RSRP
  std::vector<NeighborReport> neighbors; // scan_report
  std::vector<UeReport> ues;             // slot2_report, mbb_check
  int target = -1;                       // force_mbb
};

enum class ActionKind {
  interrupt,        // data blackout for `ues` over [t, t + duration)
  degrade,          // goodput scaled by `factor` over [t, t + duration)
  measure,          // SA: UE scans neighbors
  scan,             // WS: slot-1 reflective scan, no interruption
  slot2,            // WS: slot-2 serving measurement
  xn_request,
  handover,         // one batched cell change covering `ues`
  mbb_start,
  mbb_check_request,
  complete,
  revert,
  decision          // decision record (WS carries the bound estimate)
};
const char* to_string(ActionKind k);

enum class Cause { none, measurement, rach };
const char* to_string(Cause c);

struct Action {
  ActionKind kind = ActionKind::measure;
  long t_ms = 0;
  long duration_ms = 0;
  double factor = 1.0;
  Cause cause = Cause::none;
  int target = -1;
  std::vector<int> ues;
  std::optional<BoundEstimate> estimate;
  Decision decision = Decision::stay;
};

struct MachineConfig {
  Protocol protocol = Protocol::sa_baseline;
  double h_db = 10.0;
  long ttt_ms = 150;
  long scan_blackout_ms = 20;
  long scan_aftermath_ms = 50;
  double aftermath_factor = 0.5;
  long rach_gap_ms = 40;
  long burst_ms = kBurstMs;
  double l_min_db = 0.0;
  double l_max_db = 0.0;
  bool hold_mbb = false;
};

struct HoStateMachine {
  MachineConfig config;
  HoState state = HoState::attached;
  int serving = -1;
  int target = -1;
  std::vector<int> ues;  // SA: exactly one UE; WS: every UE on the vehicle
  bool link_ok = true;
  std::map<int, A3Tracker> trackers;           // per neighbor
  std::vector<NeighborReport> slot1;           // WS scan results awaiting slot 2
};

HoStateMachine make_machine(const MachineConfig& config, int serving, std::vector<int> ues);

struct StepResult {
  HoStateMachine machine;
  std::vector<Action> actions;
};

/// Pure transition functions. Illegal (state, event) pairs throw
/// ErrorCode::protocol naming both; mr_timer is ignored while busy.
StepResult step_sa(const HoStateMachine& m, const Event& e);
StepResult step_ws(const HoStateMachine& m, const Event& e);
StepResult step(const HoStateMachine& m, const Event& e);

/// Checks the machine invariants; throws ErrorCode::internal on violation.
void check_invariants(const HoStateMachine& m);

/// Counts cell changes and returns to the previous cell within a window.
class PingPongCounter {
 public:
  explicit PingPongCounter(long window_ms = 1000) : window_(window_ms) {}
  /// Records a change from `from` to `to`; returns true for a ping-pong.
  bool record(int from, int to, long t_ms);
  long handovers() const { return count_; }
  long ping_pongs() const { return ping_pongs_; }

 private:
  long window_;
  long count_ = 0;
  long ping_pongs_ = 0;
  std::optional<int> previous_;
  long last_t_ = 0;
};

}  // namespace ws::handover
