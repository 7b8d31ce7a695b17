#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "errors.hpp"
#include "surface.hpp"

using namespace ws;
using namespace ws::surface;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

// Lattice of (u_m, u_e) at 0.25 V with |c_t| >= 0.5, used to pick the
// voltage pair whose transmission phase is closest to a requested phase.
struct PhaseTable {
  std::vector<BiasPair> v;
  std::vector<double> phase;
  PhaseTable() {
    for (int i = 0; i <= 64; ++i)
      for (int j = 0; j <= 64; ++j) {
        const auto r = atom_response(i * 0.25, j * 0.25, 26.0);
        if (std::abs(r.c_t) < 0.5) continue;
        v.push_back({i * 0.25, j * 0.25});
        phase.push_back(std::arg(r.c_t));
      }
  }
  BiasPair nearest(double phi) const {
    std::size_t best = 0;
    double err = 1e9;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double e = std::abs(std::remainder(phase[k] - phi, 2 * kPi));
      if (e < err) {
        err = e;
        best = k;
      }
    }
    return v[best];
  }
};

const PhaseTable& table() {
  static const PhaseTable t;
  return t;
}

// Progressive-phase config steering the transmissive beam to `theta` for a
// wave arriving from `incident`.
SurfaceConfig steered(const SurfaceGeometry& g, double theta, double incident) {
  SurfaceConfig c;
  c.mode = Mode::single_transmissive;
  const double u = std::sin(theta * kDeg) + std::sin(incident * kDeg);
  for (int n = 0; n < g.n_elements; ++n)
    c.voltages.push_back(table().nearest(-2 * kPi * g.element_spacing * u * n));
  return c;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Independent evaluation of the two-resonator response formula.
std::pair<cplx, cplx> reference_response(double um, double ue, double f) {
  const LorentzianModel::Params p;
  const cplx se = -p.gamma_rad_ghz /
                  cplx(p.gamma_rad_ghz + p.gamma_loss_ghz, f - (p.f_e0_ghz + p.f_e_slope * ue));
  const cplx sm = -p.gamma_rad_ghz /
                  cplx(p.gamma_rad_ghz + p.gamma_loss_ghz, f - (p.f_m0_ghz + p.f_m_slope * um));
  return {1.0 + se + sm, se - sm};
}

}  // namespace

TEST_CASE("meta-atom response is passive everywhere") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 16.0), f(25.0, 27.0);
  for (int i = 0; i < 20000; ++i) {
    const auto r = atom_response(u(rng), u(rng), f(rng));
    CHECK(std::norm(r.c_t) + std::norm(r.c_r) <= 1.0 + 1e-12);
  }
}

TEST_CASE("meta-atom response is deterministic and rejects out-of-range inputs") {
  const auto a = atom_response(3.5, 9.25, 26.0);
  const auto b = atom_response(3.5, 9.25, 26.0);
  CHECK(a.c_t == b.c_t);
  CHECK(a.c_r == b.c_r);
  CHECK_THROWS_AS(atom_response(-0.1, 1.0, 26.0), Error);
  CHECK_THROWS_AS(atom_response(1.0, 16.5, 26.0), Error);
  CHECK_THROWS_AS(atom_response(1.0, 1.0, 30.0), Error);
}

TEST_CASE("transmission phase covers the full circle on a connected high-magnitude region") {
  constexpr int n = 321;  // 0.05 V lattice
  std::vector<char> good(n * n);
  std::vector<double> phase(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto r = atom_response(i * 0.05, j * 0.05, 26.0);
      good[i * n + j] = std::abs(r.c_t) >= 0.5;
      phase[i * n + j] = std::arg(r.c_t);
    }
  // Largest 8-connected component of the |c_t| >= 0.5 cells; the high
  // magnitude ridge runs diagonally across the voltage lattice.
  std::vector<int> comp(n * n, -1);
  int best = -1;
  std::size_t best_size = 0;
  for (int s = 0; s < n * n; ++s) {
    if (!good[s] || comp[s] >= 0) continue;
    std::vector<int> stack{s};
    comp[s] = s;
    std::size_t size = 0;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      ++size;
      const int i = c / n, j = c % n;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
        const int qi = i + di, qj = j + dj;
        if (qi < 0 || qi >= n || qj < 0 || qj >= n) continue;
        const int k = qi * n + qj;
        if (good[k] && comp[k] < 0) {
          comp[k] = s;
          stack.push_back(k);
        }
        }
    }
    if (size > best_size) {
      best_size = size;
      best = s;
    }
  }
  REQUIRE(best >= 0);
  constexpr int bins = 36;
  std::vector<char> hit(bins);
  for (int k = 0; k < n * n; ++k) {
    if (comp[k] != best) continue;
    const double p = phase[k] < 0 ? phase[k] + 2 * kPi : phase[k];
    hit[std::min(bins - 1, static_cast<int>(p / (2 * kPi) * bins))] = 1;
  }
  CHECK(std::count(hit.begin(), hit.end(), 1) == bins);
}

TEST_CASE("analytic model matches a direct evaluation of the resonator formula") {
  double worst = 0.0;
  for (int i = 0; i <= 64; ++i)
    for (int j = 0; j <= 64; ++j) {
      const auto r = atom_response(i * 0.25, j * 0.25, 26.0);
      const auto [ct, cr] = reference_response(i * 0.25, j * 0.25, 26.0);
      worst = std::max({worst, std::abs(r.c_t - ct), std::abs(r.c_r - cr)});
    }
  CHECK(worst < 1e-9);
}

TEST_CASE("grid model reproduces a dense tabulation of the analytic model at its nodes") {
  std::ostringstream t;
  t.precision(17);
  t << "u_m,u_e,f_ghz,re_ct,im_ct,re_cr,im_cr\n";
  for (double f : {25.5, 26.0})
    for (int i = 0; i <= 32; ++i)
      for (int j = 0; j <= 32; ++j) {
        const auto [ct, cr] = reference_response(i * 0.5, j * 0.5, f);
        t << i * 0.5 << "," << j * 0.5 << "," << f << "," << ct.real() << "," << ct.imag() << ","
          << cr.real() << "," << cr.imag() << "\n";
      }
  const auto grid = GridModel::parse(t.str(), "table");
  double worst = 0.0;
  for (int i = 0; i <= 32; ++i)
    for (int j = 0; j <= 32; ++j) {
      const auto g = grid.response(i * 0.5, j * 0.5, 26.0);
      const auto [ct, cr] = reference_response(i * 0.5, j * 0.5, 26.0);
      worst = std::max({worst, std::abs(g.c_t - ct), std::abs(g.c_r - cr)});
    }
  CHECK(worst < 1e-9);
  CHECK_THROWS_AS(GridModel::parse("u_m,u_e\n1,2\n", "bad"), Error);
  CHECK_THROWS_AS(GridModel::parse("u_m,u_e,f_ghz,re_ct,im_ct,re_cr,im_cr\n0,0,26,1,0,0.5,0\n",
                                   "active"),
                  Error);
}

TEST_CASE("uniform unit coefficients add coherently toward the unprogrammed direction") {
  const SurfaceGeometry g{16, 0.5, 26.0};
  std::vector<AtomCoeffs> c(16, AtomCoeffs{1.0, 0.0});
  CHECK(std::abs(array_factor(c, g, 0.0, Side::transmissive, 0.0)) == doctest::Approx(16.0));
  CHECK(std::abs(array_factor(c, g, -30.0, Side::transmissive, 30.0)) ==
        doctest::Approx(16.0));
  CHECK(std::abs(array_factor(c, g, 20.0, Side::transmissive, 0.0)) < 16.0);
}

TEST_CASE("ideal progressive phases reach the coherent-sum bound at the target") {
  const SurfaceGeometry g{64, 0.5, 26.0};
  const auto cfg = steered(g, 40.0, 0.0);
  const auto c = coefficients(cfg, g);
  double bound = 0.0;
  for (const auto& a : c) bound += std::abs(a.c_t);
  const double af = std::abs(array_factor(c, g, 40.0, Side::transmissive, 0.0));
  CHECK(af <= bound + 1e-9);
  CHECK(20 * std::log10(bound / af) < 0.5);
}

TEST_CASE("unprogrammed surface reflects specularly") {
  const SurfaceGeometry g{32, 0.5, 26.0};
  const auto off = SurfaceConfig::uniform(32, {8.0, 8.0}, Mode::off);
  const auto grid = angle_grid(-70, 70, 1);
  for (double inc : {-30.0, 0.0, 25.0}) {
    const auto p = beam_pattern(off, g, inc, grid);
    CHECK(p.angles_deg[argmax(p.gain_r_db)] == doctest::Approx(-inc));
    CHECK(p.angles_deg[argmax(p.gain_t_db)] == doctest::Approx(-inc));
  }
}

TEST_CASE("single steered beam peaks at its target") {
  const SurfaceGeometry g{64, 0.5, 26.0};
  const auto grid = angle_grid(-70, 70, 1);
  for (double target : {-40.0, -10.0, 25.0, 60.0}) {
    const auto p = beam_pattern(steered(g, target, 0.0), g, 0.0, grid);
    REQUIRE(p.angles_deg.size() == p.gain_t_db.size());
    REQUIRE(p.angles_deg.size() == p.gain_r_db.size());
    CHECK(std::abs(p.angles_deg[argmax(p.gain_t_db)] - target) <= 1.0);
  }
}

TEST_CASE("dual-beam coefficients show maxima at both targets") {
  // Superpose two ideal beams; each element keeps half the amplitude.
  const SurfaceGeometry g{64, 0.5, 26.0};
  std::vector<AtomCoeffs> c(64);
  for (int n = 0; n < 64; ++n) {
    const cplx a = std::polar(0.5, -kPi * std::sin(-40 * kDeg) * n);
    const cplx b = std::polar(0.5, -kPi * std::sin(40 * kDeg) * n);
    c[n] = {a + b, 0.0};
  }
  const auto grid = angle_grid(-70, 70, 1);
  const auto p = beam_pattern(c, g, 0.0, grid);
  auto local_peak_near = [&](double target) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (std::abs(grid[i] - target) <= 5 &&
          (best == 0 || p.gain_t_db[i] > p.gain_t_db[best]))
        best = i;
    return grid[best];
  };
  CHECK(std::abs(local_peak_near(-40) + 40) <= 1.0);
  CHECK(std::abs(local_peak_near(40) - 40) <= 1.0);
}

TEST_CASE("array factor is reciprocal in angle and incidence") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(0.0, 16.0), ang(-80.0, 80.0);
  const SurfaceGeometry g{48, 0.5, 26.0};
  for (int trial = 0; trial < 200; ++trial) {
    SurfaceConfig cfg;
    for (int n = 0; n < 48; ++n) cfg.voltages.push_back({v(rng), v(rng)});
    const auto c = coefficients(cfg, g);
    const double a = ang(rng), b = ang(rng);
    for (Side s : {Side::transmissive, Side::reflective}) {
      const cplx x = array_factor(c, g, b, s, a);
      const cplx y = array_factor(c, g, a, s, b);
      CHECK(std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(x)));
    }
  }
}

TEST_CASE("radiated power over both half-spaces never exceeds the incident power") {
  // At half-wavelength spacing, (1/2) * integral over u = sin(angle) in
  // [-1, 1] of |AF|^2 equals sum |c|^2, which passivity caps at N.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> v(0.0, 16.0);
  const SurfaceGeometry g{24, 0.5, 26.0};
  for (int trial = 0; trial < 20; ++trial) {
    SurfaceConfig cfg;
    for (int n = 0; n < 24; ++n) cfg.voltages.push_back({v(rng), v(rng)});
    const auto c = coefficients(cfg, g);
    constexpr int steps = 4000;
    double total = 0.0;
    for (int k = 0; k < steps; ++k) {
      const double u = -1.0 + (k + 0.5) * 2.0 / steps;
      const double ang = std::asin(u) / kDeg;
      for (Side s : {Side::transmissive, Side::reflective})
        total += std::norm(array_factor(c, g, ang, s, 0.0)) * (2.0 / steps) / 2.0;
    }
    CHECK(total <= 24.0 * (1.0 + 1e-6));
  }
}

TEST_CASE("realized gains read the pattern at both targets") {
  const SurfaceGeometry g{64, 0.5, 26.0};
  const auto cfg = steered(g, 20.0, 0.0);
  const auto r = realized_gains(cfg, g, 20.0, -40.0, 0.0);
  const auto grid = std::vector<double>{-40.0, 20.0};
  const auto p = beam_pattern(cfg, g, 0.0, grid);
  CHECK(r.g_w_tra_db == doctest::Approx(p.gain_t_db[1]));
  CHECK(r.g_w_ref_db == doctest::Approx(p.gain_r_db[0]));
  CHECK(r.g_w_tra_db - r.g_w_ref_db >= 10.0);
  CHECK_THROWS_AS(realized_gains(cfg, g, 75.0, 0.0, 0.0), Error);
}

TEST_CASE("unprogrammed surface gains equal the unprogrammed baseline pattern") {
  const SurfaceGeometry g{32, 0.5, 26.0};
  const auto off = SurfaceConfig::uniform(32, {4.0, 12.0}, Mode::off);
  const auto r = realized_gains(off, g, 30.0, -30.0, 10.0);
  const auto c = coefficients(off, g);
  CHECK(r.g_w_tra_db == gain_db(array_factor(c, g, 30.0, Side::transmissive, 10.0), 32));
  CHECK(r.g_w_ref_db == gain_db(array_factor(c, g, -30.0, Side::reflective, 10.0), 32));
}

TEST_CASE("geometry and config validation") {
  CHECK_THROWS_AS((SurfaceGeometry{0, 0.5, 26.0}.validate()), Error);
  CHECK_THROWS_AS((SurfaceGeometry{8, 0.0, 26.0}.validate()), Error);
  const SurfaceGeometry g{8, 0.5, 26.0};
  CHECK_THROWS_AS(coefficients(SurfaceConfig::uniform(7, {1, 1}, Mode::off), g), Error);
  CHECK(g.fingerprint() == SurfaceGeometry{8, 0.5, 26.0}.fingerprint());
  CHECK(g.fingerprint() != SurfaceGeometry{9, 0.5, 26.0}.fingerprint());
  CHECK(angle_grid(-70, 70, 5).size() == 29);
}
