#include "surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numbers>
#include <sstream>

#include "errors.hpp"
#include "io.hpp"

namespace ws::surface {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void check_voltage(double u, const char* name) {
  if (!(u >= kMinVoltage && u <= kMaxVoltage))
    fail(ErrorCode::domain, std::string(name) + " = " + io::format_double(u) +
                                " V outside [0, 16] V");
}

void check_frequency(double f) {
  if (!(f >= kModelBandLowGhz && f <= kModelBandHighGhz))
    fail(ErrorCode::domain,
         "frequency " + io::format_double(f) + " GHz outside model band [25, 27] GHz");
}

}  // namespace

const char* to_string(Mode m) {
  switch (m) {
    case Mode::single_transmissive: return "single-transmissive";
    case Mode::dual_transflective: return "dual-transflective";
    case Mode::dual_transmissive: return "dual-transmissive";
    case Mode::off: return "off";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  for (Mode m : {Mode::single_transmissive, Mode::dual_transflective, Mode::dual_transmissive,
                 Mode::off})
    if (s == to_string(m)) return m;
  fail(ErrorCode::parse, "unknown surface mode '" + s + "'");
}

void SurfaceGeometry::validate() const {
  require(n_elements >= 1, ErrorCode::domain, "surface needs at least one element");
  require(element_spacing > 0.0 && std::isfinite(element_spacing), ErrorCode::domain,
          "element spacing must be positive");
  require(carrier_ghz > 0.0 && std::isfinite(carrier_ghz), ErrorCode::domain,
          "carrier must be positive");
}

std::uint64_t SurfaceGeometry::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  const std::int64_t n = n_elements;
  mix(&n, sizeof n);
  mix(&element_spacing, sizeof element_spacing);
  mix(&carrier_ghz, sizeof carrier_ghz);
  return h;
}

SurfaceConfig SurfaceConfig::uniform(int n, BiasPair v, Mode mode) {
  return SurfaceConfig{std::vector<BiasPair>(static_cast<std::size_t>(n), v), mode};
}

MetaAtomResponse LorentzianModel::response(double u_m, double u_e, double f_ghz) const {
  check_voltage(u_m, "u_m");
  check_voltage(u_e, "u_e");
  check_frequency(f_ghz);
  const double g = p_.gamma_rad_ghz;
  const double gt = p_.gamma_rad_ghz + p_.gamma_loss_ghz;
  const double fe = p_.f_e0_ghz + p_.f_e_slope * u_e;
  const double fm = p_.f_m0_ghz + p_.f_m_slope * u_m;
  const cplx se = -g / cplx(gt, f_ghz - fe);
  const cplx sm = -g / cplx(gt, f_ghz - fm);
  return {u_m, u_e, f_ghz, 1.0 + se + sm, se - sm};
}

GridModel GridModel::load(const std::string& path) { return parse(io::read_file(path), path); }

GridModel GridModel::parse(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header = false;
  struct Row {
    double um, ue, f;
    AtomCoeffs c;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!header) {
      if (t != "u_m,u_e,f_ghz,re_ct,im_ct,re_cr,im_cr")
        fail(ErrorCode::parse, origin + ":" + std::to_string(lineno) + ": bad header");
      header = true;
      continue;
    }
    const auto f = io::split(t, ',');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (f.size() != 7) fail(ErrorCode::parse, where + ": expected 7 fields");
    double v[7];
    for (int i = 0; i < 7; ++i) v[i] = io::parse_double(f[i], where);
    rows.push_back({v[0], v[1], v[2], {cplx(v[3], v[4]), cplx(v[5], v[6])}});
  }
  require(header, ErrorCode::parse, origin + ": missing header");
  require(!rows.empty(), ErrorCode::parse, origin + ": no data rows");

  GridModel g;
  std::map<double, std::vector<const Row*>> by_f;
  for (const auto& r : rows) by_f[r.f].push_back(&r);
  for (auto& [f, rs] : by_f) {
    std::vector<double> um, ue;
    for (const Row* r : rs) {
      um.push_back(r->um);
      ue.push_back(r->ue);
    }
    std::sort(um.begin(), um.end());
    um.erase(std::unique(um.begin(), um.end()), um.end());
    std::sort(ue.begin(), ue.end());
    ue.erase(std::unique(ue.begin(), ue.end()), ue.end());
    if (g.um_.empty()) {
      g.um_ = um;
      g.ue_ = ue;
    } else if (g.um_ != um || g.ue_ != ue) {
      fail(ErrorCode::parse, origin + ": voltage grid differs between frequencies");
    }
    require(um.size() * ue.size() == rs.size(), ErrorCode::parse,
            origin + ": voltage grid is not rectangular");
    Plane p{f, std::vector<AtomCoeffs>(rs.size())};
    for (const Row* r : rs) {
      const auto i = static_cast<std::size_t>(std::lower_bound(um.begin(), um.end(), r->um) - um.begin());
      const auto j = static_cast<std::size_t>(std::lower_bound(ue.begin(), ue.end(), r->ue) - ue.begin());
      if (std::norm(r->c.c_t) + std::norm(r->c.c_r) > 1.0 + 1e-9)
        fail(ErrorCode::parse, origin + ": active (non-passive) response in table");
      p.values[i * ue.size() + j] = r->c;
    }
    g.planes_.push_back(std::move(p));
  }
  return g;
}

MetaAtomResponse GridModel::response(double u_m, double u_e, double f_ghz) const {
  check_voltage(u_m, "u_m");
  check_voltage(u_e, "u_e");
  require(u_m >= um_.front() && u_m <= um_.back() && u_e >= ue_.front() && u_e <= ue_.back(),
          ErrorCode::domain, "voltage outside tabulated grid");
  const Plane* best = &planes_.front();
  for (const auto& p : planes_)
    if (std::abs(p.f_ghz - f_ghz) < std::abs(best->f_ghz - f_ghz)) best = &p;

  auto bracket = [](const std::vector<double>& axis, double x) {
    if (axis.size() == 1) return std::pair<std::size_t, double>{0, 0.0};
    auto it = std::upper_bound(axis.begin(), axis.end(), x);
    std::size_t i = it == axis.begin() ? 0 : static_cast<std::size_t>(it - axis.begin()) - 1;
    i = std::min(i, axis.size() - 2);
    return std::pair<std::size_t, double>{i, (x - axis[i]) / (axis[i + 1] - axis[i])};
  };
  const auto [i, a] = bracket(um_, u_m);
  const auto [j, b] = bracket(ue_, u_e);
  const std::size_t i1 = std::min(i + 1, um_.size() - 1);
  const std::size_t j1 = std::min(j + 1, ue_.size() - 1);
  const std::size_t w = ue_.size();
  const auto& v = best->values;
  auto lerp = [&](auto get) {
    return (1 - a) * (1 - b) * get(v[i * w + j]) + (1 - a) * b * get(v[i * w + j1]) +
           a * (1 - b) * get(v[i1 * w + j]) + a * b * get(v[i1 * w + j1]);
  };
  const cplx ct = lerp([](const AtomCoeffs& c) { return c.c_t; });
  const cplx cr = lerp([](const AtomCoeffs& c) { return c.c_r; });
  return {u_m, u_e, f_ghz, ct, cr};
}

const ResponseModel& default_model() {
  static const LorentzianModel model;
  return model;
}

MetaAtomResponse atom_response(double u_m, double u_e, double f_ghz) {
  return default_model().response(u_m, u_e, f_ghz);
}

std::vector<AtomCoeffs> coefficients(const SurfaceConfig& config, const SurfaceGeometry& geometry,
                                     const ResponseModel& model) {
  geometry.validate();
  if (config.voltages.size() != static_cast<std::size_t>(geometry.n_elements))
    fail(ErrorCode::domain, "config has " + std::to_string(config.voltages.size()) +
                                " elements, geometry expects " +
                                std::to_string(geometry.n_elements));
  std::vector<AtomCoeffs> out;
  out.reserve(config.voltages.size());
  for (const auto& v : config.voltages) {
    const auto r = model.response(v.u_m, v.u_e, geometry.carrier_ghz);
    out.push_back({r.c_t, r.c_r});
  }
  return out;
}

cplx array_factor(std::span<const AtomCoeffs> coeffs, const SurfaceGeometry& geometry,
                  double angle_deg, Side side, double incident_deg) {
  if (coeffs.size() != static_cast<std::size_t>(geometry.n_elements))
    fail(ErrorCode::domain, "coefficient count does not match geometry");
  if (!(std::abs(angle_deg) <= 90.0) || !(std::abs(incident_deg) <= 90.0))
    fail(ErrorCode::domain, "angles must lie within +-90 deg");
  const double u = std::sin(angle_deg * kDeg) + std::sin(incident_deg * kDeg);
  const double k = 2.0 * std::numbers::pi * geometry.element_spacing * u;
  cplx sum = 0.0;
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    const cplx c = side == Side::transmissive ? coeffs[n].c_t : coeffs[n].c_r;
    sum += c * std::polar(1.0, k * static_cast<double>(n));
  }
  return sum;
}

cplx array_factor(const SurfaceConfig& config, const SurfaceGeometry& geometry, double angle_deg,
                  Side side, double incident_deg, const ResponseModel& model) {
  const auto c = coefficients(config, geometry, model);
  return array_factor(c, geometry, angle_deg, side, incident_deg);
}

double gain_db(cplx af, int n_elements) {
  const double a = std::abs(af) / n_elements;
  return a > 0.0 ? std::max(20.0 * std::log10(a), kFloorDb) : kFloorDb;
}

BeamPattern beam_pattern(std::span<const AtomCoeffs> coeffs, const SurfaceGeometry& geometry,
                         double incident_deg, std::span<const double> grid_deg) {
  require(!grid_deg.empty(), ErrorCode::domain, "empty angle grid");
  BeamPattern p;
  p.angles_deg.assign(grid_deg.begin(), grid_deg.end());
  p.gain_t_db.reserve(grid_deg.size());
  p.gain_r_db.reserve(grid_deg.size());
  for (double a : grid_deg) {
    p.gain_t_db.push_back(
        gain_db(array_factor(coeffs, geometry, a, Side::transmissive, incident_deg),
                geometry.n_elements));
    p.gain_r_db.push_back(
        gain_db(array_factor(coeffs, geometry, a, Side::reflective, incident_deg),
                geometry.n_elements));
  }
  return p;
}

BeamPattern beam_pattern(const SurfaceConfig& config, const SurfaceGeometry& geometry,
                         double incident_deg, std::span<const double> grid_deg,
                         const ResponseModel& model) {
  const auto c = coefficients(config, geometry, model);
  return beam_pattern(c, geometry, incident_deg, grid_deg);
}

RealizedGains realized_gains(std::span<const AtomCoeffs> coeffs, Mode mode,
                             const SurfaceGeometry& geometry, double theta_t_deg,
                             double theta_r_deg, double incident_deg) {
  if (!(std::abs(theta_t_deg) <= 70.0) || !(std::abs(theta_r_deg) <= 70.0))
    fail(ErrorCode::domain, "steering angles must lie within +-70 deg");
  const Side second = mode == Mode::dual_transmissive ? Side::transmissive : Side::reflective;
  return {gain_db(array_factor(coeffs, geometry, theta_t_deg, Side::transmissive, incident_deg),
                  geometry.n_elements),
          gain_db(array_factor(coeffs, geometry, theta_r_deg, second, incident_deg),
                  geometry.n_elements)};
}

RealizedGains realized_gains(const SurfaceConfig& config, const SurfaceGeometry& geometry,
                             double theta_t_deg, double theta_r_deg, double incident_deg,
                             const ResponseModel& model) {
  const auto c = coefficients(config, geometry, model);
  return realized_gains(c, config.mode, geometry, theta_t_deg, theta_r_deg, incident_deg);
}

std::vector<double> angle_grid(double lo_deg, double hi_deg, double step_deg) {
  require(step_deg > 0.0 && hi_deg >= lo_deg, ErrorCode::domain, "invalid angle grid");
  std::vector<double> g;
  const auto n = static_cast<long>(std::floor((hi_deg - lo_deg) / step_deg + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(lo_deg + static_cast<double>(i) * step_deg);
  return g;
}

}  // namespace ws::surface
