#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "errors.hpp"
#include "io.hpp"

namespace ws::config {

using sim::Scenario;

namespace {

struct Loc {
  std::string origin;
  long line = 0;
  long col = 0;
  std::string str() const {
    return origin + ":" + std::to_string(line) + ":" + std::to_string(col);
  }
};

[[noreturn]] void syntax(const Loc& at, const std::string& what) {
  fail(ErrorCode::parse, at.str() + ": " + what);
}

bool parse_bool(std::string_view v, const std::string& where) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  fail(ErrorCode::parse, where + ": expected true or false, got '" + std::string(v) + "'");
}

std::string fmt(double v) { return io::format_double(v); }
std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::vector<double> parse_list(std::string_view v, const std::string& where) {
  std::vector<double> out;
  if (io::trim(v).empty()) return out;
  for (auto part : io::split(v, ',')) out.push_back(io::parse_double(part, where));
  return out;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

using Setter = std::function<void(Scenario&, std::string_view, const std::string&)>;
using Getter = std::function<std::string(const Scenario&)>;

struct Field {
  std::string section;
  std::string key;
  Setter set;
  Getter get;
};

template <class Acc>
Field dbl(const char* sec, const char* key, Acc acc) {
  return {sec, key,
          [acc](Scenario& s, std::string_view v, const std::string& w) { acc(s) = io::parse_double(v, w); },
          [acc](const Scenario& s) { return fmt(acc(s)); }};
}

template <class Acc>
Field integer(const char* sec, const char* key, Acc acc) {
  return {sec, key,
          [acc](Scenario& s, std::string_view v, const std::string& w) {
            using T = std::remove_reference_t<decltype(acc(s))>;
            acc(s) = static_cast<T>(io::parse_int(v, w));
          },
          [acc](const Scenario& s) { return std::to_string(acc(s)); }};
}

template <class Acc>
Field boolean(const char* sec, const char* key, Acc acc) {
  return {sec, key,
          [acc](Scenario& s, std::string_view v, const std::string& w) { acc(s) = parse_bool(v, w); },
          [acc](const Scenario& s) { return fmt_bool(acc(s)); }};
}

template <class Acc>
Field text(const char* sec, const char* key, Acc acc) {
  return {sec, key,
          [acc](Scenario& s, std::string_view v, const std::string&) { acc(s) = std::string(v); },
          [acc](const Scenario& s) { return acc(s); }};
}

template <class Acc>
Field list(const char* sec, const char* key, Acc acc) {
  return {sec, key,
          [acc](Scenario& s, std::string_view v, const std::string& w) { acc(s) = parse_list(v, w); },
          [acc](const Scenario& s) { return fmt_list(acc(s)); }};
}

#define ACC(expr) [](auto& s) -> auto& { return expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      text("geometry", "name", ACC(s.name)),
      dbl("geometry", "duration_s", ACC(s.duration_s)),
      dbl("geometry", "speed_kmh", ACC(s.trajectory.speed_kmh)),
      dbl("geometry", "l_window_db", ACC(s.l_window_db)),
      dbl("geometry", "d_min_m", ACC(s.d_min_m)),
      dbl("geometry", "d_max_m", ACC(s.d_max_m)),
      dbl("geometry", "vehicle_length_m", ACC(s.body.length_m)),
      dbl("geometry", "vehicle_width_m", ACC(s.body.width_m)),

      integer("surface", "n_elements", ACC(s.surface.geometry.n_elements)),
      dbl("surface", "element_spacing", ACC(s.surface.geometry.element_spacing)),
      dbl("surface", "carrier_ghz", ACC(s.surface.geometry.carrier_ghz)),
      dbl("surface", "mount_x", ACC(s.surface.mount.offset.x)),
      dbl("surface", "mount_y", ACC(s.surface.mount.offset.y)),
      dbl("surface", "normal_deg", ACC(s.surface.mount.normal_deg)),
      dbl("surface", "surface_gain_db", ACC(s.surface.surface_gain_db)),
      dbl("surface", "key_step_deg", ACC(s.surface.key_step_deg)),
      dbl("surface", "codebook_incident_deg", ACC(s.surface.codebook_incident_deg)),
      list("surface", "scan_angles", ACC(s.surface.scan_angles_deg)),
      list("surface", "attach_angles", ACC(s.surface.attach_angles_deg)),
      text("surface", "codebook", ACC(s.surface.codebook_path)),
      dbl("surface", "split_penalty", ACC(s.surface.split_penalty)),

      integer("timing", "ssb_period_ms", ACC(s.timing.ssb_period_ms)),
      integer("timing", "burst_ms", ACC(s.timing.burst_ms)),
      integer("timing", "mr_period_ms", ACC(s.timing.mr_period_ms)),
      integer("timing", "xn_delay_ms", ACC(s.timing.xn_delay_ms)),
      integer("timing", "rach_gap_ms", ACC(s.timing.rach_gap_ms)),
      integer("timing", "scan_blackout_ms", ACC(s.timing.scan_blackout_ms)),
      integer("timing", "scan_aftermath_ms", ACC(s.timing.scan_aftermath_ms)),
      dbl("timing", "reconfig_ms", ACC(s.timing.reconfig_ms)),

      Field{"protocol", "protocol",
            [](Scenario& s, std::string_view v, const std::string& w) {
              try {
                s.protocol.protocol = handover::protocol_from_string(std::string(v));
              } catch (const Error& e) {
                fail(ErrorCode::parse, w + ": " + e.what());
              }
            },
            [](const Scenario& s) { return std::string(handover::to_string(s.protocol.protocol)); }},
      dbl("protocol", "h_db", ACC(s.protocol.h_db)),
      integer("protocol", "ttt_ms", ACC(s.protocol.ttt_ms)),
      dbl("protocol", "alpha_slot1", ACC(s.protocol.alpha_slot1)),
      dbl("protocol", "alpha_slot2", ACC(s.protocol.alpha_slot2)),
      dbl("protocol", "alpha_mbb", ACC(s.protocol.alpha_mbb)),
      integer("protocol", "ping_pong_window_ms", ACC(s.protocol.ping_pong_window_ms)),
      integer("protocol", "reorder_window_ms", ACC(s.protocol.reorder_window_ms)),
      boolean("protocol", "mbb_hold", ACC(s.protocol.mbb_hold)),
      integer("protocol", "mbb_target", ACC(s.protocol.mbb_target)),
      dbl("protocol", "bandwidth_mhz", ACC(s.protocol.bandwidth_mhz)),
      dbl("protocol", "efficiency", ACC(s.protocol.efficiency)),
      dbl("protocol", "per_midpoint_db", ACC(s.protocol.per_midpoint_db)),
      dbl("protocol", "per_slope", ACC(s.protocol.per_slope)),
      dbl("protocol", "base_rtt_ms", ACC(s.protocol.base_rtt_ms)),
      dbl("protocol", "retx_penalty_ms", ACC(s.protocol.retx_penalty_ms)),
      dbl("protocol", "packet_bits", ACC(s.protocol.packet_bits)),

      Field{"noise", "seed",
            [](Scenario& s, std::string_view v, const std::string& w) {
              v = io::trim(v);
              std::uint64_t x = 0;
              auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
              if (v.empty() || ec != std::errc() || p != v.data() + v.size())
                fail(ErrorCode::parse, w + ": expected an unsigned integer, got '" + std::string(v) + "'");
              s.noise.seed = x;
            },
            [](const Scenario& s) { return std::to_string(s.noise.seed); }},
      dbl("noise", "shadow_sigma_db", ACC(s.noise.shadow_sigma_db)),
      integer("noise", "shadow_block_ms", ACC(s.noise.shadow_block_ms)),
      dbl("noise", "noise_floor_dbm", ACC(s.noise.noise_floor_dbm)),
      dbl("noise", "outage_sinr_db", ACC(s.noise.outage_sinr_db)),

      text("output", "trace_file", ACC(s.output.trace_file)),
      text("output", "metrics_file", ACC(s.output.metrics_file)),
      integer("output", "window_ms", ACC(s.output.window_ms)),
      Field{"output", "mode",
            [](Scenario& s, std::string_view v, const std::string& w) {
              try {
                s.output.mode = sim::run_mode_from_string(std::string(v));
              } catch (const Error& e) {
                fail(ErrorCode::parse, w + ": " + e.what());
              }
            },
            [](const Scenario& s) { return std::string(sim::to_string(s.output.mode)); }},
      text("output", "replay_trace", ACC(s.output.replay_trace)),
      boolean("output", "replay_calibration", ACC(s.output.replay_calibration)),
      dbl("output", "calibration_db", ACC(s.output.calibration_db)),
  };
  return f;
}

#undef ACC

const std::vector<std::string> kSections = {"geometry", "gnbs",     "ues",   "surface",
                                            "timing",   "protocol", "noise", "output"};

// Inline entry: whitespace-separated `name=value` tokens.
struct Token {
  std::string name;
  std::string value;
  long col = 0;
};

std::vector<Token> tokens(std::string_view v, const Loc& at) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < v.size()) {
    while (i < v.size() && (v[i] == ' ' || v[i] == '\t')) ++i;
    if (i >= v.size()) break;
    const std::size_t start = i;
    while (i < v.size() && v[i] != ' ' && v[i] != '\t') ++i;
    const std::string_view tok = v.substr(start, i - start);
    const Loc tl{at.origin, at.line, at.col + static_cast<long>(start)};
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == tok.size())
      syntax(tl, "expected name=value, got '" + std::string(tok) + "'");
    out.push_back({std::string(tok.substr(0, eq)), std::string(tok.substr(eq + 1)), tl.col});
  }
  return out;
}

struct EntrySpec {
  std::vector<std::string> required;
  std::vector<std::string> optional;
};

// Reads one inline entry into a name -> (value, location) map, rejecting
// unknown and repeated names.
std::map<std::string, std::pair<std::string, Loc>> entry_fields(std::string_view v, const Loc& at,
                                                                 const std::string& what,
                                                                 const EntrySpec& spec) {
  std::map<std::string, std::pair<std::string, Loc>> out;
  for (const auto& t : tokens(v, at)) {
    const Loc tl{at.origin, at.line, t.col};
    const bool known =
        std::find(spec.required.begin(), spec.required.end(), t.name) != spec.required.end() ||
        std::find(spec.optional.begin(), spec.optional.end(), t.name) != spec.optional.end();
    if (!known) syntax(tl, "unknown " + what + " field '" + t.name + "'");
    if (!out.emplace(t.name, std::make_pair(t.value, tl)).second)
      syntax(tl, "repeated " + what + " field '" + t.name + "'");
  }
  for (const auto& r : spec.required)
    if (!out.contains(r)) syntax(at, what + " entry lacks required field '" + r + "'");
  return out;
}

std::string emit_gnb(const channel::GnbSite& g) {
  return "id=" + std::to_string(g.id) + " x=" + fmt(g.pos.x) + " y=" + fmt(g.pos.y) +
         " gain_db=" + fmt(g.gain_db) + " freq=" + std::to_string(g.freq) +
         " facing_deg=" + fmt(g.facing_deg);
}

std::string emit_ue(const channel::UeSite& u) {
  return "id=" + std::to_string(u.id) + " x=" + fmt(u.offset.x) + " y=" + fmt(u.offset.y) +
         " gain_dbi=" + fmt(u.gain_dbi) + " body_loss_db=" + fmt(u.body_loss_db) +
         " blocked_from_deg=" + fmt(u.blocked_from_deg) + " blocked_to_deg=" + fmt(u.blocked_to_deg);
}

}  // namespace

ParseResult parse_config_text(const std::string& text, const std::string& origin) {
  ParseResult res;
  Scenario& s = res.scenario;
  std::set<std::string> seen;
  std::string section;
  bool any_waypoint = false, any_gnb = false, any_ue = false;

  std::istringstream in(text);
  std::string raw;
  long lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string_view line = raw;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;
    const Loc at{origin, lineno, static_cast<long>(first) + 1};
    if (line[first] == '#' || line[first] == ';') continue;

    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string_view::npos) syntax(at, "unterminated section header");
      if (!io::trim(line.substr(close + 1)).empty())
        syntax({origin, lineno, static_cast<long>(close) + 2}, "text after section header");
      section = std::string(io::trim(line.substr(first + 1, close - first - 1)));
      if (std::find(kSections.begin(), kSections.end(), section) == kSections.end())
        syntax({origin, lineno, static_cast<long>(first) + 2}, "unknown section '" + section + "'");
      continue;
    }

    const auto eq = line.find('=', first);
    if (eq == std::string_view::npos) syntax(at, "expected key = value");
    const std::string key(io::trim(line.substr(first, eq - first)));
    if (key.empty()) syntax(at, "missing key before '='");
    if (section.empty()) syntax(at, "key '" + key + "' appears before any section");
    const auto vstart = line.find_first_not_of(" \t", eq + 1);
    const long vcol = vstart == std::string_view::npos ? static_cast<long>(eq) + 2
                                                       : static_cast<long>(vstart) + 1;
    const std::string_view value =
        vstart == std::string_view::npos ? std::string_view{} : io::trim(line.substr(vstart));
    const Loc vat{origin, lineno, vcol};
    const std::string where = vat.str() + " " + section + "." + key;

    if (section == "geometry" && key == "waypoint") {
      auto f = entry_fields(value, vat, "waypoint", {{"x", "y"}, {}});
      if (!any_waypoint) s.trajectory.waypoints.clear();
      any_waypoint = true;
      s.trajectory.waypoints.push_back(
          {io::parse_double(f["x"].first, f["x"].second.str() + " waypoint.x"),
           io::parse_double(f["y"].first, f["y"].second.str() + " waypoint.y")});
      continue;
    }
    if (section == "gnbs" && key == "gnb") {
      auto f = entry_fields(value, vat, "gnb", {{"id", "x", "y"}, {"gain_db", "freq", "facing_deg"}});
      channel::GnbSite g;
      auto num = [&](const char* n) { return io::parse_double(f[n].first, f[n].second.str() + " gnb." + n); };
      g.id = static_cast<int>(io::parse_int(f["id"].first, f["id"].second.str() + " gnb.id"));
      g.pos = {num("x"), num("y")};
      const std::string p = "gnbs.gnb[id=" + std::to_string(g.id) + "].";
      if (f.contains("gain_db")) g.gain_db = num("gain_db");
      else res.defaults_applied.push_back(p + "gain_db = " + fmt(g.gain_db));
      if (f.contains("freq"))
        g.freq = static_cast<int>(io::parse_int(f["freq"].first, f["freq"].second.str() + " gnb.freq"));
      else res.defaults_applied.push_back(p + "freq = " + std::to_string(g.freq));
      if (f.contains("facing_deg")) g.facing_deg = num("facing_deg");
      else res.defaults_applied.push_back(p + "facing_deg = " + fmt(g.facing_deg));
      any_gnb = true;
      s.gnbs.push_back(g);
      continue;
    }
    if (section == "ues" && key == "ue") {
      auto f = entry_fields(value, vat, "ue",
                            {{"id", "x", "y"},
                             {"gain_dbi", "body_loss_db", "blocked_from_deg", "blocked_to_deg"}});
      channel::UeSite u;
      auto num = [&](const char* n) { return io::parse_double(f[n].first, f[n].second.str() + " ue." + n); };
      u.id = static_cast<int>(io::parse_int(f["id"].first, f["id"].second.str() + " ue.id"));
      u.offset = {num("x"), num("y")};
      const std::string p = "ues.ue[id=" + std::to_string(u.id) + "].";
      auto opt = [&](const char* n, double& dst) {
        if (f.contains(n)) dst = num(n);
        else res.defaults_applied.push_back(p + n + " = " + fmt(dst));
      };
      opt("gain_dbi", u.gain_dbi);
      opt("body_loss_db", u.body_loss_db);
      opt("blocked_from_deg", u.blocked_from_deg);
      opt("blocked_to_deg", u.blocked_to_deg);
      any_ue = true;
      s.ues.push_back(u);
      continue;
    }

    const auto& fs = fields();
    auto it = std::find_if(fs.begin(), fs.end(),
                           [&](const Field& f) { return f.section == section && f.key == key; });
    if (it == fs.end()) syntax(at, "unknown key '" + key + "' in section [" + section + "]");
    if (!seen.insert(section + "." + key).second) syntax(at, "duplicate key '" + section + "." + key + "'");
    it->set(s, value, where);
  }

  if (!any_waypoint) fail(ErrorCode::config, "geometry.waypoint: required (at least one waypoint)");
  if (!any_gnb) fail(ErrorCode::config, "gnbs.gnb: required (at least one gNB)");
  if (!any_ue) fail(ErrorCode::config, "ues.ue: required (at least one UE)");
  for (const auto& f : fields())
    if (!seen.contains(f.section + "." + f.key))
      res.defaults_applied.push_back(f.section + "." + f.key + " = " + f.get(s));
  s.validate();
  return res;
}

ParseResult parse_config(const std::string& path) {
  auto res = parse_config_text(io::read_file(path), path);
  const auto dir = std::filesystem::path(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (dir / p).lexically_normal().string();
  };
  resolve(res.scenario.surface.codebook_path);
  resolve(res.scenario.output.replay_trace);
  return res;
}

std::string emit_canonical(const Scenario& s) {
  std::string out;
  for (const auto& sec : kSections) {
    out += "[" + sec + "]\n";
    for (const auto& f : fields())
      if (f.section == sec) {
        const std::string v = f.get(s);
        out += f.key + " =" + (v.empty() ? "" : " " + v) + "\n";
      }
    if (sec == "geometry")
      for (const auto& w : s.trajectory.waypoints)
        out += "waypoint = x=" + fmt(w.x) + " y=" + fmt(w.y) + "\n";
    if (sec == "gnbs")
      for (const auto& g : s.gnbs) out += "gnb = " + emit_gnb(g) + "\n";
    if (sec == "ues")
      for (const auto& u : s.ues) out += "ue = " + emit_ue(u) + "\n";
    out += "\n";
  }
  return out;
}

}  // namespace ws::config
