#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <string>

#include "config.hpp"
#include "errors.hpp"
#include "io.hpp"

using namespace ws;
using namespace ws::config;

namespace {

const std::string kMinimal = R"([geometry]
waypoint = x=0 y=0
waypoint = x=30 y=0

[gnbs]
gnb = id=1 x=-6 y=12
gnb = id=2 x=14 y=12 freq=1

[ues]
ue = id=1 x=0.15 y=0
)";

// Error raised while parsing `text`, with its code and message.
std::pair<ErrorCode, std::string> error_of(const std::string& text) {
  try {
    parse_config_text(text, "cfg.ini");
  } catch (const Error& e) {
    return {e.code(), e.what()};
  }
  FAIL("config accepted: " << text);
  return {ErrorCode::internal, ""};
}

bool has(const std::vector<std::string>& v, const std::string& prefix) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.rfind(prefix, 0) == 0; });
}

}  // namespace

TEST_CASE("minimal config takes the documented protocol defaults") {
  const auto r = parse_config_text(kMinimal);
  const auto& s = r.scenario;
  CHECK(s.protocol.h_db == 10.0);
  CHECK(s.protocol.ttt_ms == 150);
  CHECK(s.timing.mr_period_ms == 160);
  CHECK(s.timing.ssb_period_ms == 20);
  CHECK(s.timing.burst_ms == 5);
  CHECK(s.noise.shadow_sigma_db == 2.0);
  CHECK(s.timing.reconfig_ms == doctest::Approx(0.2));
  CHECK(s.protocol.reorder_window_ms == 100);
  CHECK(s.protocol.ping_pong_window_ms == 1000);
  CHECK(s.d_min_m == 0.3);
  CHECK(s.d_max_m == 1.0);
  REQUIRE(s.gnbs.size() == 2);
  CHECK(s.gnbs[1].freq == 1);
  CHECK(s.trajectory.waypoints.size() == 2);
}

TEST_CASE("every applied default is reported") {
  const auto r = parse_config_text(kMinimal);
  CHECK(has(r.defaults_applied, "protocol.h_db = 10"));
  CHECK(has(r.defaults_applied, "protocol.ttt_ms = 150"));
  CHECK(has(r.defaults_applied, "timing.mr_period_ms = 160"));
  CHECK(has(r.defaults_applied, "noise.seed = 1"));
  CHECK_FALSE(has(r.defaults_applied, "geometry.waypoint"));
  const auto full = parse_config_text(emit_canonical(r.scenario));
  CHECK(full.defaults_applied.empty());
}

TEST_CASE("canonical text re-parses to an equal scenario") {
  for (const char* name : {"outdoor_crossover_5kmh.ini", "outdoor_crossover_10kmh.ini",
                           "outdoor_crossover_15kmh.ini", "outdoor_blocked_cargo.ini",
                           "outdoor_mbb_hold.ini", "indoor_4gnb.ini"}) {
    CAPTURE(name);
    const auto s = parse_config(std::string(WS_SCENARIO_DIR) + "/" + name).scenario;
    const auto text = emit_canonical(s);
    const auto back = parse_config_text(text).scenario;
    CHECK(back == s);
    CHECK(emit_canonical(back) == text);
  }
}

TEST_CASE("shipped scenarios encode the drive speeds") {
  const std::string dir = WS_SCENARIO_DIR;
  CHECK(parse_config(dir + "/outdoor_crossover_5kmh.ini").scenario.trajectory.speed_kmh == 5.0);
  CHECK(parse_config(dir + "/outdoor_crossover_15kmh.ini").scenario.trajectory.speed_kmh == 15.0);
  const auto in = parse_config(dir + "/indoor_4gnb.ini").scenario;
  CHECK(in.gnbs.size() == 4);
  CHECK(in.ues.size() == 1);
}

TEST_CASE("duplicate gNB id is a semantic error naming the node") {
  const auto [code, msg] = error_of(kMinimal + "[gnbs]\ngnb = id=2 x=40 y=12 freq=2\n");
  CHECK(code == ErrorCode::config);
  CHECK(msg.find("gnbs.gnb[id=2]") != std::string::npos);
  CHECK(msg.find("duplicate") != std::string::npos);
}

TEST_CASE("nearby gNBs on one frequency are rejected") {
  const auto [code, msg] = error_of(kMinimal + "[gnbs]\ngnb = id=3 x=40 y=12 freq=1\n");
  CHECK(code == ErrorCode::config);
  CHECK(msg.find("freq") != std::string::npos);
}

TEST_CASE("syntax errors carry line and column") {
  {
    const auto [code, msg] = error_of("[geometry]\nwaypoint = x=0 y=0\nspeed_kmh 5\n");
    CHECK(code == ErrorCode::parse);
    CHECK(msg.find("cfg.ini:3:") != std::string::npos);
  }
  {
    const auto [code, msg] = error_of("[geometry\n");
    CHECK(code == ErrorCode::parse);
    CHECK(msg.find("cfg.ini:1:") != std::string::npos);
  }
  {
    const auto [code, msg] = error_of(kMinimal + "[protocol]\nh_db = ten\n");
    CHECK(code == ErrorCode::parse);
    CHECK(msg.find("cfg.ini:12:8") != std::string::npos);
  }
  {
    const auto [code, msg] = error_of(kMinimal + "[protocol]\nmbb_hold = maybe\n");
    CHECK(code == ErrorCode::parse);
  }
}

TEST_CASE("unknown keys and sections are rejected with their location") {
  {
    const auto [code, msg] = error_of(kMinimal + "[protocol]\nhysteresis = 3\n");
    CHECK(code == ErrorCode::parse);
    CHECK(msg.find("cfg.ini:12:1") != std::string::npos);
    CHECK(msg.find("hysteresis") != std::string::npos);
  }
  {
    const auto [code, msg] = error_of(kMinimal + "[radio]\n");
    CHECK(msg.find("cfg.ini:11:") != std::string::npos);
  }
  {
    const auto [code, msg] = error_of(kMinimal + "[gnbs]\ngnb = id=5 x=1 y=2 freq=4 tilt=3\n");
    CHECK(code == ErrorCode::parse);
    CHECK(msg.find("tilt") != std::string::npos);
  }
}

TEST_CASE("missing required nodes and out-of-range values are semantic errors") {
  CHECK(error_of("[geometry]\nwaypoint = x=0 y=0\n[ues]\nue = id=1 x=0 y=0\n").first ==
        ErrorCode::config);
  const auto [code, msg] = error_of(kMinimal + "[protocol]\nttt_ms = -5\n");
  CHECK(code == ErrorCode::config);
  CHECK(msg.find("protocol.ttt_ms") != std::string::npos);
  const auto [c2, m2] = error_of(kMinimal + "[ues]\nue = id=2 x=9 y=0\n");
  CHECK(c2 == ErrorCode::config);
  CHECK(m2.find("ues.ue[id=2]") != std::string::npos);
  const auto [c3, m3] = error_of(kMinimal + "[protocol]\nprotocol = sa-baseline\nmbb_hold = true\nmbb_target = 2\n");
  CHECK(c3 == ErrorCode::config);
  CHECK(m3.find("protocol.mbb_hold") != std::string::npos);
}

TEST_CASE("file loading resolves relative paths and reports unreadable files") {
  const auto dir = std::filesystem::temp_directory_path() / "ws_test_config";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "s.ini").string();
  io::write_file_atomic(path, kMinimal + "[surface]\ncodebook = books/c.wscb\n[output]\nmode = trace-replay\nreplay_trace = t.csv\n");
  const auto s = parse_config(path).scenario;
  CHECK(std::filesystem::path(s.surface.codebook_path) == dir / "books/c.wscb");
  CHECK(std::filesystem::path(s.output.replay_trace) == dir / "t.csv");
  try {
    parse_config((dir / "absent.ini").string());
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
  std::filesystem::remove_all(dir);
}
