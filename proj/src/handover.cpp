#include "handover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "channel.hpp"
#include "errors.hpp"

namespace ws::handover {

A3Tracker::A3Tracker(double h_db, long ttt_ms) : h_(h_db), ttt_(ttt_ms) {
  require(ttt_ms >= 0, ErrorCode::domain, "TTT must be >= 0");
}

bool A3Tracker::update(double m_n, double m_s, long t_ms) {
  return update_condition(m_n > m_s + h_, t_ms);
}

bool A3Tracker::update_condition(bool condition, long t_ms) {
  if (last_t_ && t_ms < *last_t_)
    fail(ErrorCode::domain, "A3 tracker: time went backwards (" + std::to_string(t_ms) + " < " +
                                std::to_string(*last_t_) + ")");
  last_t_ = t_ms;
  if (!condition) {
    since_.reset();
    return false;
  }
  if (!since_) since_ = t_ms;
  return t_ms - *since_ >= ttt_;
}

void A3Tracker::reset() {
  since_.reset();
  last_t_.reset();
}

SlotAggregates slot_aggregates(double m_r_slot1, std::span<const double> m_s_slot2,
                               double g_w_ref, std::span<const double> g_w_tra,
                               std::span<const double> g_ue) {
  require(!m_s_slot2.empty(), ErrorCode::domain, "slot aggregates need at least one UE");
  require(m_s_slot2.size() == g_ue.size() && m_s_slot2.size() == g_w_tra.size(),
          ErrorCode::domain, "slot aggregates: per-UE list lengths differ");
  SlotAggregates out;
  out.s1 = m_r_slot1 - g_w_ref;
  out.s2.reserve(m_s_slot2.size());
  for (std::size_t i = 0; i < m_s_slot2.size(); ++i)
    out.s2.push_back(m_s_slot2[i] - g_w_tra[i] - g_ue[i]);
  return out;
}

SlotAggregates slot_aggregates(double m_r_slot1, std::span<const double> m_s_slot2,
                               double g_w_ref, double g_w_tra, std::span<const double> g_ue) {
  const std::vector<double> tra(m_s_slot2.size(), g_w_tra);
  return slot_aggregates(m_r_slot1, m_s_slot2, g_w_ref, tra, g_ue);
}

XsBounds bound_xs(std::span<const double> s2, double l_min, double l_max) {
  require(!s2.empty(), ErrorCode::domain, "bound_xs needs at least one UE");
  require(l_min <= l_max, ErrorCode::domain, "bound_xs needs l_min <= l_max");
  XsBounds b;
  b.lb_s = -INFINITY;
  b.ub_s = INFINITY;
  for (double v : s2) {
    b.lb_s = std::max(b.lb_s, v - l_max);
    b.ub_s = std::min(b.ub_s, v - l_min);
  }
  b.consistent = b.lb_s <= b.ub_s;
  return b;
}

const char* to_string(Decision d) { return d == Decision::handover ? "handover" : "stay"; }

Decision decide(double s1, double ub_s, double h_db) {
  return s1 - 2.0 * ub_s >= h_db ? Decision::handover : Decision::stay;
}

AttachResult initial_attachment(const AttachOracle& oracle) {
  AttachResult r;
  r.elapsed_ms = kAttachBursts * kSsbPeriodMs;
  for (int g = 0; g < channel::kGnbBeams; ++g)
    for (int s = 0; s < channel::kSurfaceScanAngles; ++s)
      for (int u = 0; u < channel::kUeBeams; ++u) {
        const auto v = oracle(g, s, u);
        if (!v || !std::isfinite(*v)) continue;
        if (!r.found || *v > r.rsrp_dbm) {
          r.found = true;
          r.gnb_beam = g;
          r.surface_angle = s;
          r.ue_beam = u;
          r.rsrp_dbm = *v;
        }
      }
  return r;
}

ScanResult neighbor_scan(double theta_t_deg, const codebook::Codebook& cb,
                         std::span<const double> scan_angles_deg,
                         const std::function<double(const codebook::CodebookEntry&)>& reflect_oracle,
                         double alpha) {
  require(!scan_angles_deg.empty(), ErrorCode::domain, "neighbor scan needs scan angles");
  ScanResult r;
  for (double a : scan_angles_deg) {
    const codebook::CodebookKey key{theta_t_deg, a, alpha, codebook::KeyMode::dual_transflective};
    const auto& entry = cb.at(key);
    r.samples.push_back({a, reflect_oracle(entry)});
  }
  for (std::size_t i = 1; i < r.samples.size(); ++i)
    if (r.samples[i].m_r_dbm > r.samples[r.best].m_r_dbm) r.best = i;
  return r;
}

DapsBuffer::DapsBuffer(long reorder_window_ms) : window_(reorder_window_ms) {
  require(reorder_window_ms >= 0, ErrorCode::domain, "reorder window must be >= 0");
}

std::vector<long> DapsBuffer::release_in_order() {
  std::vector<long> out;
  while (!pending_.empty() && pending_.begin()->first == next_) {
    out.push_back(next_++);
    pending_.erase(pending_.begin());
  }
  return out;
}

std::vector<long> DapsBuffer::deliver(int /*link*/, long seq, long t_ms) {
  require(seq >= 0, ErrorCode::domain, "sequence numbers must be >= 0");
  if (seq < next_ || pending_.contains(seq)) {
    ++duplicates_;
    return flush(t_ms);
  }
  pending_.emplace(seq, t_ms);
  auto out = release_in_order();
  auto late = flush(t_ms);
  out.insert(out.end(), late.begin(), late.end());
  return out;
}

std::vector<long> DapsBuffer::flush(long t_ms) {
  std::vector<long> out;
  while (!pending_.empty()) {
    long oldest = std::numeric_limits<long>::max();
    for (const auto& [s, arrival] : pending_) oldest = std::min(oldest, arrival);
    if (t_ms - oldest < window_) break;
    next_ = pending_.begin()->first;
    auto more = release_in_order();
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

std::vector<long> DapsBuffer::flush_all() {
  std::vector<long> out;
  while (!pending_.empty()) {
    next_ = pending_.begin()->first;
    auto more = release_in_order();
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

const char* to_string(Protocol p) {
  return p == Protocol::sa_baseline ? "sa-baseline" : "wall-street";
}

Protocol protocol_from_string(const std::string& s) {
  if (s == "sa-baseline") return Protocol::sa_baseline;
  if (s == "wall-street") return Protocol::wall_street;
  fail(ErrorCode::parse, "unknown protocol '" + s + "' (expected sa-baseline or wall-street)");
}

const char* to_string(HoState s) {
  switch (s) {
    case HoState::attached: return "attached";
    case HoState::scanning: return "scanning";
    case HoState::preparing: return "preparing";
    case HoState::deciding: return "deciding";
    case HoState::executing_mbb: return "executing-mbb";
    case HoState::executing_rach: return "executing-rach";
    case HoState::completing: return "completing";
    case HoState::reverting: return "reverting";
    case HoState::outage: return "outage";
  }
  return "?";
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::mr_timer: return "mr_timer";
    case EventKind::scan_report: return "scan_report";
    case EventKind::slot2_report: return "slot2_report";
    case EventKind::xn_ack: return "xn_ack";
    case EventKind::mbb_check: return "mbb_check";
    case EventKind::done: return "done";
    case EventKind::link_lost: return "link_lost";
    case EventKind::link_restored: return "link_restored";
    case EventKind::force_mbb: return "force_mbb";
  }
  return "?";
}

const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::interrupt: return "interrupt";
    case ActionKind::degrade: return "degrade";
    case ActionKind::measure: return "measure";
    case ActionKind::scan: return "scan";
    case ActionKind::slot2: return "slot2";
    case ActionKind::xn_request: return "xn_request";
    case ActionKind::handover: return "handover";
    case ActionKind::mbb_start: return "mbb_start";
    case ActionKind::mbb_check_request: return "mbb_check_request";
    case ActionKind::complete: return "complete";
    case ActionKind::revert: return "revert";
    case ActionKind::decision: return "decision";
  }
  return "?";
}

const char* to_string(Cause c) {
  switch (c) {
    case Cause::none: return "none";
    case Cause::measurement: return "measurement";
    case Cause::rach: return "rach";
  }
  return "?";
}

HoStateMachine make_machine(const MachineConfig& config, int serving, std::vector<int> ues) {
  require(!ues.empty(), ErrorCode::domain, "state machine needs at least one UE");
  require(config.protocol == Protocol::wall_street || ues.size() == 1, ErrorCode::domain,
          "baseline machines track exactly one UE");
  require(config.l_min_db <= config.l_max_db, ErrorCode::domain, "l_min must be <= l_max");
  HoStateMachine m;
  m.config = config;
  m.serving = serving;
  m.ues = std::move(ues);
  check_invariants(m);
  return m;
}

namespace {

[[noreturn]] void illegal(const HoStateMachine& m, const Event& e) {
  fail(ErrorCode::protocol, std::string(to_string(m.config.protocol)) + ": event '" +
                                to_string(e.kind) + "' is illegal in state '" + to_string(m.state) +
                                "'");
}

Action make(ActionKind k, long t) {
  Action a;
  a.kind = k;
  a.t_ms = t;
  return a;
}

HoState resting(const HoStateMachine& m) { return m.link_ok ? HoState::attached : HoState::outage; }

bool is_idle(HoState s) { return s == HoState::attached || s == HoState::outage; }

// Link flags are tracked in every state; only the idle states change.
bool handle_link(HoStateMachine& m, const Event& e) {
  if (e.kind == EventKind::link_lost) {
    m.link_ok = false;
    if (m.state == HoState::attached) m.state = HoState::outage;
    return true;
  }
  if (e.kind == EventKind::link_restored) {
    m.link_ok = true;
    if (m.state == HoState::outage) m.state = HoState::attached;
    return true;
  }
  return false;
}

void finish_cell_change(HoStateMachine& m) {
  m.serving = m.target;
  m.target = -1;
  m.trackers.clear();
  m.slot1.clear();
  m.link_ok = true;
  m.state = HoState::attached;
}

A3Tracker& tracker(HoStateMachine& m, int gnb) {
  auto it = m.trackers.find(gnb);
  if (it == m.trackers.end())
    it = m.trackers.emplace(gnb, A3Tracker(m.config.h_db, m.config.ttt_ms)).first;
  return it->second;
}

}  // namespace

StepResult step_sa(const HoStateMachine& in, const Event& e) {
  if (in.config.protocol != Protocol::sa_baseline)
    fail(ErrorCode::protocol, "step_sa called on a wall-street machine");
  StepResult r{in, {}};
  HoStateMachine& m = r.machine;
  if (handle_link(m, e)) return r;

  switch (e.kind) {
    case EventKind::mr_timer: {
      if (!is_idle(m.state)) return r;
      m.state = HoState::scanning;
      r.actions.push_back(make(ActionKind::measure, e.t_ms));
      Action blackout = make(ActionKind::interrupt, e.t_ms);
      blackout.duration_ms = m.config.scan_blackout_ms;
      blackout.cause = Cause::measurement;
      blackout.ues = m.ues;
      r.actions.push_back(blackout);
      Action after = make(ActionKind::degrade, e.t_ms + m.config.scan_blackout_ms);
      after.duration_ms = m.config.scan_aftermath_ms;
      after.factor = m.config.aftermath_factor;
      after.cause = Cause::measurement;
      after.ues = m.ues;
      r.actions.push_back(after);
      return r;
    }
    case EventKind::scan_report: {
      if (m.state != HoState::scanning) illegal(in, e);
      int best = -1;
      double best_m = -INFINITY;
      std::set<int> seen;
      for (const auto& n : e.neighbors) {
        if (n.gnb == m.serving) continue;
        seen.insert(n.gnb);
        const bool fired = tracker(m, n.gnb).update(n.m_dbm, e.m_s_dbm, e.t_ms);
        if (fired && (n.m_dbm > best_m || (n.m_dbm == best_m && n.gnb < best))) {
          best = n.gnb;
          best_m = n.m_dbm;
        }
      }
      for (auto& [g, tr] : m.trackers)
        if (!seen.contains(g)) tr.update_condition(false, e.t_ms);
      Action d = make(ActionKind::decision, e.t_ms);
      d.ues = m.ues;
      d.decision = best >= 0 ? Decision::handover : Decision::stay;
      d.target = best;
      r.actions.push_back(d);
      if (best < 0) {
        m.state = resting(m);
        return r;
      }
      m.target = best;
      m.state = HoState::preparing;
      Action x = make(ActionKind::xn_request, e.t_ms);
      x.target = best;
      x.ues = m.ues;
      r.actions.push_back(x);
      return r;
    }
    case EventKind::xn_ack: {
      if (m.state != HoState::preparing) illegal(in, e);
      m.state = HoState::executing_rach;
      Action h = make(ActionKind::handover, e.t_ms);
      h.target = m.target;
      h.ues = m.ues;
      r.actions.push_back(h);
      Action gap = make(ActionKind::interrupt, e.t_ms);
      gap.duration_ms = m.config.rach_gap_ms;
      gap.cause = Cause::rach;
      gap.ues = m.ues;
      r.actions.push_back(gap);
      return r;
    }
    case EventKind::done: {
      if (m.state == HoState::executing_rach) {
        m.state = HoState::completing;
        Action c = make(ActionKind::complete, e.t_ms);
        c.target = m.target;
        c.ues = m.ues;
        r.actions.push_back(c);
        return r;
      }
      if (m.state == HoState::completing) {
        finish_cell_change(m);
        return r;
      }
      illegal(in, e);
    }
    default:
      illegal(in, e);
  }
}

StepResult step_ws(const HoStateMachine& in, const Event& e) {
  if (in.config.protocol != Protocol::wall_street)
    fail(ErrorCode::protocol, "step_ws called on a baseline machine");
  StepResult r{in, {}};
  HoStateMachine& m = r.machine;
  if (handle_link(m, e)) return r;

  switch (e.kind) {
    case EventKind::mr_timer: {
      if (is_idle(m.state)) {
        m.state = HoState::scanning;
        Action s = make(ActionKind::scan, e.t_ms);
        s.duration_ms = m.config.burst_ms;
        s.ues = m.ues;
        r.actions.push_back(s);
      } else if (m.state == HoState::executing_mbb && !m.config.hold_mbb) {
        Action c = make(ActionKind::mbb_check_request, e.t_ms);
        c.target = m.target;
        c.ues = m.ues;
        r.actions.push_back(c);
      }
      return r;
    }
    case EventKind::scan_report: {
      if (m.state != HoState::scanning) illegal(in, e);
      m.slot1.clear();
      for (const auto& n : e.neighbors)
        if (n.gnb != m.serving) m.slot1.push_back(n);
      m.state = HoState::preparing;
      Action s = make(ActionKind::slot2, e.t_ms);
      s.ues = m.ues;
      r.actions.push_back(s);
      return r;
    }
    case EventKind::slot2_report: {
      if (m.state != HoState::preparing) illegal(in, e);
      require(!e.ues.empty(), ErrorCode::protocol, "slot-2 report carries no UE measurements");
      std::vector<double> ms, tra, gue;
      for (const auto& u : e.ues) {
        ms.push_back(u.m_s_dbm);
        tra.push_back(u.g_w_tra_db);
        gue.push_back(u.g_ue_db);
      }
      std::optional<BoundEstimate> best;
      bool best_fired = false;
      std::set<int> seen;
      for (const auto& n : m.slot1) {
        seen.insert(n.gnb);
        const auto agg = slot_aggregates(n.m_dbm, ms, n.g_w_ref_db, tra, gue);
        const auto b = bound_xs(agg.s2, m.config.l_min_db, m.config.l_max_db);
        BoundEstimate est{n.gnb, agg.s1, agg.s2, b.lb_s, b.ub_s, agg.s1 - 2.0 * b.ub_s, b.consistent};
        const bool ok = b.consistent && std::isfinite(est.delta_min) &&
                        decide(agg.s1, b.ub_s, m.config.h_db) == Decision::handover;
        const bool fired = tracker(m, n.gnb).update_condition(ok, e.t_ms);
        const bool better = !best || (fired && !best_fired) ||
                            (fired == best_fired && est.delta_min > best->delta_min);
        if (better) {
          best = est;
          best_fired = fired;
        }
      }
      for (auto& [g, tr] : m.trackers)
        if (!seen.contains(g)) tr.update_condition(false, e.t_ms);
      m.slot1.clear();
      Action d = make(ActionKind::decision, e.t_ms);
      d.ues = m.ues;
      d.estimate = best;
      d.decision = best_fired ? Decision::handover : Decision::stay;
      d.target = best ? best->neighbor : -1;
      r.actions.push_back(d);
      if (!best_fired) {
        m.state = resting(m);
        return r;
      }
      m.target = best->neighbor;
      m.state = HoState::deciding;
      Action x = make(ActionKind::xn_request, e.t_ms);
      x.target = m.target;
      x.ues = m.ues;
      r.actions.push_back(x);
      return r;
    }
    case EventKind::xn_ack:
    case EventKind::force_mbb: {
      if (e.kind == EventKind::xn_ack && m.state != HoState::deciding) illegal(in, e);
      if (e.kind == EventKind::force_mbb) {
        if (!is_idle(m.state) || e.target < 0 || e.target == m.serving) illegal(in, e);
        m.target = e.target;
      }
      m.state = HoState::executing_mbb;
      Action h = make(ActionKind::handover, e.t_ms);
      h.target = m.target;
      h.ues = m.ues;
      r.actions.push_back(h);
      Action s = make(ActionKind::mbb_start, e.t_ms);
      s.target = m.target;
      s.ues = m.ues;
      r.actions.push_back(s);
      return r;
    }
    case EventKind::mbb_check: {
      if (m.state != HoState::executing_mbb) illegal(in, e);
      require(!e.ues.empty(), ErrorCode::protocol, "MBB check carries no UE measurements");
      double sum = 0.0;
      for (const auto& u : e.ues) {
        double d;
        if (u.m_n_dbm == -INFINITY) d = -INFINITY;
        else if (u.m_s_dbm == -INFINITY) d = INFINITY;
        else d = u.m_n_dbm - u.m_s_dbm;
        sum += d;
      }
      const double mean = sum / static_cast<double>(e.ues.size());
      const bool pass = !std::isnan(mean) && mean > m.config.h_db;
      m.state = pass ? HoState::completing : HoState::reverting;
      Action a = make(pass ? ActionKind::complete : ActionKind::revert, e.t_ms);
      a.target = pass ? m.target : m.serving;
      a.ues = m.ues;
      r.actions.push_back(a);
      return r;
    }
    case EventKind::done: {
      if (m.state == HoState::completing) {
        finish_cell_change(m);
        return r;
      }
      if (m.state == HoState::reverting) {
        m.target = -1;
        m.trackers.clear();
        m.state = resting(m);
        return r;
      }
      illegal(in, e);
    }
    default:
      illegal(in, e);
  }
}

StepResult step(const HoStateMachine& m, const Event& e) {
  StepResult r = m.config.protocol == Protocol::sa_baseline ? step_sa(m, e) : step_ws(m, e);
  check_invariants(r.machine);
  return r;
}

void check_invariants(const HoStateMachine& m) {
  auto bad = [&](const std::string& what) {
    fail(ErrorCode::internal, std::string("state machine invariant violated in '") +
                                  to_string(m.state) + "': " + what);
  };
  const bool ws = m.config.protocol == Protocol::wall_street;
  if (m.state == HoState::executing_mbb && !ws) bad("make-before-break under the baseline");
  if (m.state == HoState::executing_rach && ws) bad("RACH execution under wall-street");
  if (!ws && m.ues.size() != 1) bad("baseline machine must track one UE");
  if (m.ues.empty()) bad("no UEs");
  if (m.serving < 0) bad("no serving cell");
  const bool needs_target = m.state == HoState::executing_mbb || m.state == HoState::executing_rach ||
                            m.state == HoState::completing ||
                            (m.state == HoState::preparing && !ws) ||
                            (m.state == HoState::deciding && ws);
  if (needs_target && (m.target < 0 || m.target == m.serving)) bad("missing or invalid target");
  if (is_idle(m.state) && m.target >= 0) bad("idle state with a pending target");
  if (m.state == HoState::outage && m.link_ok) bad("outage with a healthy link");
  if (m.state == HoState::attached && !m.link_ok) bad("attached with a lost link");
}

bool PingPongCounter::record(int from, int to, long t_ms) {
  ++count_;
  const bool pp = previous_ && *previous_ == to && t_ms - last_t_ <= window_;
  if (pp) ++ping_pongs_;
  previous_ = from;
  last_t_ = t_ms;
  return pp;
}

}  // namespace ws::handover
