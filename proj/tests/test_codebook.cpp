#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "codebook.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "oracles.hpp"

using namespace ws;
using namespace ws::codebook;
using ws::surface::SurfaceGeometry;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("ws_test_codebook_" + name)).string();
}

GaParams quick_ga() {
  GaParams p;
  p.population = 64;
  p.generations = 120;
  return p;
}

}  // namespace

TEST_CASE("key validation") {
  CHECK_NOTHROW((CodebookKey{-40, 40, 0.5, KeyMode::dual_transflective}.validate()));
  CHECK_THROWS_AS((CodebookKey{75, 0, 0, KeyMode::single}.validate()), Error);
  CHECK_THROWS_AS((CodebookKey{0, -71, 0.5, KeyMode::dual_transmissive}.validate()), Error);
  CHECK_THROWS_AS((CodebookKey{0, 0, 0.5, KeyMode::single}.validate()), Error);
  CHECK_THROWS_AS((CodebookKey{0, 0, 1.5, KeyMode::dual_transflective}.validate()), Error);
  CHECK(key_mode_from_string(to_string(KeyMode::dual_transmissive)) == KeyMode::dual_transmissive);
  CHECK_THROWS_AS(key_mode_from_string("triple"), Error);
}

TEST_CASE("objective agrees with an independent evaluation of the combined sum") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(0.0, 16.0);
  const SurfaceGeometry g{16, 0.5, 26.0};
  for (const auto& k : {CodebookKey{-40, 40, 0.5, KeyMode::dual_transflective},
                        CodebookKey{-20, 30, 0.25, KeyMode::dual_transmissive},
                        CodebookKey{10, 0, 0.0, KeyMode::single},
                        CodebookKey{10, 0, 1.0, KeyMode::single}}) {
    const Objective obj(k, g, 15.0);
    for (int t = 0; t < 20; ++t) {
      surface::SurfaceConfig cfg;
      for (int n = 0; n < 16; ++n) cfg.voltages.push_back({v(rng), v(rng)});
      const double mine = obj.evaluate_db(surface::coefficients(cfg, g));
      CHECK(mine == doctest::Approx(oracle::objective_db(k, g, 15.0, cfg)).epsilon(1e-9));
    }
  }
}

TEST_CASE("exact quantized oracle agrees with plain enumeration on a tiny aperture") {
  const SurfaceGeometry g{3, 0.5, 26.0};
  for (const auto& k : {CodebookKey{-30, 45, 0.5, KeyMode::dual_transflective},
                        CodebookKey{20, 0, 0.0, KeyMode::single}}) {
    const auto opts = oracle::options(k, g, 0.0, 5);
    CHECK(oracle::exact_max_db(opts) == doctest::Approx(oracle::brute_max_db(opts)).epsilon(1e-12));
  }
}

TEST_CASE("quantized GA comes within 1 dB of the exact optimum and hard partition never beats it") {
  const SurfaceGeometry g{8, 0.5, 26.0};
  GaParams ga;
  ga.quantization_levels = 5;
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> ang(-14, 14);
  std::uniform_int_distribution<int> al(1, 3);
  for (int t = 0; t < 3; ++t) {
    const CodebookKey k{5.0 * ang(rng), 5.0 * ang(rng), 0.25 * al(rng),
                        KeyMode::dual_transflective};
    const double opt = oracle::exact_max_db(oracle::options(k, g, 0.0, 5));
    const auto ga_entry = synth_entry(k, g, 0.0, 100 + t, ga).entry;
    const auto hp = synth_hard_partition(k, g, 0.0, 5);
    INFO(to_string(k));
    CHECK(ga_entry.objective_db <= opt + 1e-9);
    CHECK(ga_entry.objective_db >= opt - 1.0);
    CHECK(hp.objective_db <= opt + 1e-9);
    for (const auto& v : ga_entry.config.voltages) {
      CHECK(std::fmod(v.u_m, 4.0) == 0.0);
      CHECK(std::fmod(v.u_e, 4.0) == 0.0);
    }
  }
}

TEST_CASE("GA trace is non-decreasing and the result is seed-deterministic") {
  const SurfaceGeometry g{16, 0.5, 26.0};
  const CodebookKey k{-20, 35, 0.5, KeyMode::dual_transflective};
  const auto a = synth_entry(k, g, 0.0, 9, quick_ga());
  const auto b = synth_entry(k, g, 0.0, 9, quick_ga());
  CHECK(a.entry == b.entry);
  REQUIRE(a.best_per_generation_db.size() >= 2);
  for (std::size_t i = 1; i < a.best_per_generation_db.size(); ++i)
    CHECK(a.best_per_generation_db[i] >= a.best_per_generation_db[i - 1]);
  CHECK(a.entry.objective_db == doctest::Approx(oracle::objective_db(k, g, 0.0, a.entry.config)));
}

TEST_CASE("transflective entry steers both beams") {
  const SurfaceGeometry g{32, 0.5, 26.0};
  const CodebookKey k{-40, 55, 0.5, KeyMode::dual_transflective};
  const auto e = synth_entry(k, g, 0.0, 1).entry;
  CHECK(std::abs(oracle::local_peak(e.config, g, 0.0, -40, false) + 40) <= 1.0);
  CHECK(std::abs(oracle::local_peak(e.config, g, 0.0, 55, true) - 55) <= 1.0);
}

TEST_CASE("alpha = 0 dual key matches single-beam synthesis") {
  const SurfaceGeometry g{32, 0.5, 26.0};
  const auto single = synth_entry({25, 0, 0.0, KeyMode::single}, g, 0.0, 4).entry;
  const auto dual = synth_entry({25, -30, 0.0, KeyMode::dual_transflective}, g, 0.0, 4).entry;
  CHECK(std::abs(single.objective_db - dual.objective_db) <= 0.2);
}

TEST_CASE("half-power dual beams sit about 3 dB below a single beam") {
  const SurfaceGeometry g{32, 0.5, 26.0};
  const auto s_t = synth_entry({-40, 0, 0.0, KeyMode::single}, g, 0.0, 2).entry;
  const auto s_r = synth_entry({0, 40, 1.0, KeyMode::single}, g, 0.0, 2).entry;
  const auto d = synth_entry({-40, 40, 0.5, KeyMode::dual_transflective}, g, 0.0, 2).entry;
  CHECK(std::abs(d.g_w_tra_db - (s_t.g_w_tra_db - 3.0)) <= 1.5);
  CHECK(std::abs(d.g_w_ref_db - (s_r.g_w_ref_db - 3.0)) <= 1.5);
}

TEST_CASE("power split moves gains but not beam directions") {
  const SurfaceGeometry g{32, 0.5, 26.0};
  std::vector<CodebookEntry> es;
  for (double a : {0.25, 0.5, 0.75})
    es.push_back(synth_entry({-30, 45, a, KeyMode::dual_transflective}, g, 0.0, 6).entry);
  for (const auto& e : es) {
    CHECK(std::abs(oracle::local_peak(e.config, g, 0.0, -30, false) + 30) <= 1.0);
    CHECK(std::abs(oracle::local_peak(e.config, g, 0.0, 45, true) - 45) <= 1.0);
  }
  CHECK(es[0].g_w_ref_db < es[1].g_w_ref_db);
  CHECK(es[1].g_w_ref_db < es[2].g_w_ref_db);
  CHECK(es[0].g_w_tra_db >= es[2].g_w_tra_db);
}

TEST_CASE("hard partition: both lobes present, GA dominates it") {
  const SurfaceGeometry g{32, 0.5, 26.0};
  const CodebookKey k{-40, 40, 0.5, KeyMode::dual_transflective};
  const auto hp = synth_hard_partition(k, g, 0.0);
  const auto ga = synth_entry(k, g, 0.0, 8).entry;
  CHECK(std::abs(oracle::local_peak(hp.config, g, 0.0, -40, false) + 40) <= 1.0);
  CHECK(std::abs(oracle::local_peak(hp.config, g, 0.0, 40, true) - 40) <= 1.0);
  CHECK(ga.objective_db >= hp.objective_db - 0.1);
  CHECK_THROWS_AS(synth_hard_partition({0, 0, 0.0, KeyMode::single}, g, 0.0), Error);
}

TEST_CASE("hard partition with alpha = 1 gives the whole aperture to the second beam") {
  const SurfaceGeometry g{16, 0.5, 26.0};
  const auto hp = synth_hard_partition({-20, 30, 1.0, KeyMode::dual_transflective}, g, 0.0);
  CHECK(hp.g_w_ref_db > hp.g_w_tra_db + 6.0);
  CHECK(std::abs(oracle::local_peak(hp.config, g, 0.0, 30, true) - 30) <= 1.0);
}

TEST_CASE("build_codebook: scan grid, errors, determinism across threads") {
  const SurfaceGeometry g{12, 0.5, 26.0};
  const double t[] = {10};
  const double r[] = {-35, -25, -15, -5, 5, 15, 25, 35};
  const double a[] = {0.75};
  const auto keys = grid_keys(t, r, a, KeyMode::dual_transflective);
  CHECK(keys.size() == 8);
  GaParams ga = quick_ga();
  ga.generations = 30;
  const auto one = build_codebook(keys, g, 0.0, 5, ga, 1);
  const auto two = build_codebook(keys, g, 0.0, 5, ga, 3);
  CHECK(one.size() == 8);
  CHECK(serialize(one) == serialize(two));
  CHECK(serialize(one) == serialize(build_codebook(keys, g, 0.0, 5, ga, 1)));
  CHECK(serialize(one) != serialize(build_codebook(keys, g, 0.0, 6, ga, 1)));
  CHECK_THROWS_AS(grid_keys(t, r, std::span<const double>{}, KeyMode::dual_transflective), Error);
}

TEST_CASE("codebook files round-trip and reject damage") {
  const SurfaceGeometry g{8, 0.5, 26.0};
  const double t[] = {-10, 10};
  const double r[] = {0};
  const double a[] = {0.0};
  GaParams ga = quick_ga();
  ga.generations = 10;
  const auto cb = build_codebook(grid_keys(t, r, a, KeyMode::single), g, 5.0, 1, ga);
  const auto path = temp_path("rt.wscb");
  save_codebook(cb, path);
  CHECK(load_codebook(path) == cb);
  CHECK(load_codebook(path, g) == cb);
  try {
    load_codebook(path, SurfaceGeometry{9, 0.5, 26.0});
    FAIL("fingerprint mismatch accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("fingerprint") != std::string::npos);
  }
  const auto bytes = serialize(cb);
  try {
    deserialize(std::string_view(bytes).substr(0, bytes.size() - 7), "cut");
    FAIL("truncated codebook accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
    CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
  }
  CHECK_THROWS_AS(deserialize("not a codebook", "junk"), Error);
  CHECK(export_text(cb).find("single -10 0 0 -> g_w_tra=") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("nearest lookup breaks ties toward smaller |theta_r| then smaller alpha") {
  Codebook cb(SurfaceGeometry{2, 0.5, 26.0}, 0.0);
  auto add = [&](CodebookKey k) {
    CodebookEntry e;
    e.key = k;
    e.config = surface::SurfaceConfig::uniform(2, {0, 0}, surface::Mode::dual_transflective);
    cb.insert(e);
  };
  add({0, 10, 0.5, KeyMode::dual_transflective});
  add({0, -10, 0.5, KeyMode::dual_transflective});
  add({0, 20, 0.5, KeyMode::dual_transflective});
  const auto n = cb.nearest({0, 15, 0.5, KeyMode::dual_transflective});
  REQUIRE(n.entry);
  CHECK_FALSE(n.exact);
  CHECK(n.entry->key.theta_r_deg == 10);
  CHECK(cb.nearest({0, 0, 0.5, KeyMode::dual_transflective}).entry->key.theta_r_deg == -10);
  CHECK(cb.nearest({0, 20, 0.5, KeyMode::dual_transflective}).exact);
  CHECK(cb.nearest({0, 0, 0.0, KeyMode::single}).entry == nullptr);
  CHECK_THROWS_AS(cb.at({5, 0, 0.0, KeyMode::single}), Error);
}
