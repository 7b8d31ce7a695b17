#include "channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace ws::channel {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double wrap180(double a) {
  a = std::fmod(a, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

Vec2 rotate(Vec2 v, double deg) {
  const double c = std::cos(deg * kDeg), s = std::sin(deg * kDeg);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

Vec2 to_world(const VehiclePose& pose, Vec2 offset) {
  const Vec2 r = rotate(offset, pose.heading_deg);
  return {pose.pos.x + r.x, pose.pos.y + r.y};
}

double bearing_deg(Vec2 from, Vec2 to) {
  return std::atan2(to.y - from.y, to.x - from.x) / kDeg;
}

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

double fspl_db(double d_m, double f_ghz) {
  if (!(d_m > 0.0)) fail(ErrorCode::domain, "fspl: distance must be positive");
  if (!(f_ghz > 0.0)) fail(ErrorCode::domain, "fspl: frequency must be positive");
  return 20.0 * std::log10(4.0 * std::numbers::pi * d_m * f_ghz * 1e9 / kSpeedOfLight);
}

void LinkBudgetParams::validate() const {
  const std::pair<const char*, double> losses[] = {
      {"l_gnb", l_gnb_db}, {"l_window", l_window_db}, {"l_ue", l_ue_db}, {"l_gnb_s", l_gnb_s_db}};
  for (const auto& [name, v] : losses)
    if (!(v >= 0.0)) fail(ErrorCode::domain, std::string("link budget: ") + name + " must be >= 0 dB");
  const double all[] = {p_gnb_dbm, g_ris_rx_dbi, g_ris_tx_dbi, g_ue_dbi, p_nf_dbm, g_gnb_s_dbi};
  for (double v : all)
    if (!std::isfinite(v)) fail(ErrorCode::domain, "link budget: non-finite parameter");
}

namespace {
BudgetReport finish(std::vector<BudgetTerm> terms) {
  BudgetReport r;
  r.terms = std::move(terms);
  for (const auto& t : r.terms) r.total_db += t.value_db;
  return r;
}
}  // namespace

BudgetReport snr_ue(const LinkBudgetParams& p) {
  p.validate();
  return finish({{"P_gNB", p.p_gnb_dbm},
                 {"L_gNB", -p.l_gnb_db},
                 {"L_window", -p.l_window_db},
                 {"G_RIS,Rx", p.g_ris_rx_dbi},
                 {"G_RIS,Tx", p.g_ris_tx_dbi},
                 {"L_UE", -p.l_ue_db},
                 {"G_UE", p.g_ue_dbi},
                 {"P_nf", -p.p_nf_dbm}});
}

BudgetReport snr_gnb(const LinkBudgetParams& p) {
  p.validate();
  return finish({{"P_gNB_n", p.p_gnb_dbm},
                 {"L_gNB_n", -p.l_gnb_db},
                 {"L_window", -p.l_window_db},
                 {"G_RIS,Rx", p.g_ris_rx_dbi},
                 {"G_RIS,Tx", p.g_ris_tx_dbi},
                 {"L_window", -p.l_window_db},
                 {"L_gNB_s", -p.l_gnb_s_db},
                 {"G_gNB_s", p.g_gnb_s_dbi},
                 {"P_nf", -p.p_nf_dbm}});
}

const char* to_string(Path p) {
  switch (p) {
    case Path::direct: return "direct";
    case Path::surface_transmissive: return "via-surface-transmissive";
    case Path::surface_reflective: return "via-surface-reflective";
  }
  return "?";
}

Path path_from_string(const std::string& s) {
  for (Path p : {Path::direct, Path::surface_transmissive, Path::surface_reflective})
    if (s == to_string(p)) return p;
  fail(ErrorCode::parse, "unknown path '" + s + "'");
}

double gnb_beam_gain_db(int beam, double off_boresight_deg) {
  require(beam >= 0 && beam < kGnbBeams, ErrorCode::domain, "gNB beam index out of range");
  const double d = wrap180(off_boresight_deg - (-52.5 + 15.0 * beam));
  return -std::min(12.0 * (d / 15.0) * (d / 15.0), 30.0);
}

int best_gnb_beam(double off_boresight_deg) {
  int best = 0;
  for (int b = 1; b < kGnbBeams; ++b)
    if (gnb_beam_gain_db(b, off_boresight_deg) > gnb_beam_gain_db(best, off_boresight_deg)) best = b;
  return best;
}

double ue_beam_gain_db(int beam, double bearing_deg) {
  require(beam >= 0 && beam < kUeBeams, ErrorCode::domain, "UE beam index out of range");
  const double d = wrap180(bearing_deg - 90.0 * beam);
  return -std::min(12.0 * (d / 90.0) * (d / 90.0), 20.0);
}

int best_ue_beam(double bearing_deg) {
  int best = 0;
  for (int b = 1; b < kUeBeams; ++b)
    if (ue_beam_gain_db(b, bearing_deg) > ue_beam_gain_db(best, bearing_deg)) best = b;
  return best;
}

IncidentAngle incident_angle(const VehiclePose& pose, const SurfaceMount& mount, Vec2 gnb) {
  const Vec2 p = to_world(pose, mount.offset);
  const double normal = pose.heading_deg + mount.normal_deg;
  const double a = wrap180(bearing_deg(p, gnb) - normal);
  if (std::abs(a) >= 90.0) return {a, true};
  return {a, false};
}

double exit_angle(const SurfaceMount& mount, Vec2 ue_offset) {
  const double back_normal = mount.normal_deg + 180.0;
  return -wrap180(bearing_deg(mount.offset, ue_offset) - back_normal);
}

double exit_distance(const SurfaceMount& mount, Vec2 ue_offset) {
  return dist(mount.offset, ue_offset);
}

std::optional<double> key_angle(double a_deg, double b_deg, double codebook_incident_deg,
                                double step_deg) {
  require(step_deg > 0.0, ErrorCode::domain, "key angle step must be positive");
  const double v = std::sin(a_deg * kDeg) + std::sin(b_deg * kDeg) -
                   std::sin(codebook_incident_deg * kDeg);
  if (std::abs(v) > 1.0) return std::nullopt;
  const double q = std::round(std::asin(v) / kDeg / step_deg) * step_deg + 0.0;
  if (std::abs(q) > 70.0) return std::nullopt;
  return q;
}

double shadowing_db(std::uint64_t seed, int ue, int gnb, Path path, long t_ms, double sigma_db,
                    int block_ms) {
  if (sigma_db == 0.0) return 0.0;
  const long block = block_ms > 0 ? t_ms / block_ms : t_ms;
  std::uint64_t h = mix(seed);
  h = mix(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(ue) + 0x100));
  h = mix(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(gnb) + 0x10000));
  h = mix(h ^ static_cast<std::uint64_t>(path));
  h = mix(h ^ static_cast<std::uint64_t>(block));
  const std::uint64_t h2 = mix(h ^ 0x5bd1e995ull);
  const double u1 = (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;
  return sigma_db * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double LinkTerms::value_dbm() const {
  return direct + x_a + x_b + g_w + g_ue + l_ue;
}

Channel::Channel(std::vector<GnbSite> gnbs, std::vector<UeSite> ues, SurfaceMount mount,
                 ChannelParams params, surface::SurfaceGeometry geometry)
    : gnbs_(std::move(gnbs)), ues_(std::move(ues)), mount_(mount), params_(params),
      geometry_(geometry) {
  require(!gnbs_.empty(), ErrorCode::config, "channel needs at least one gNB");
  require(params_.d_min_m > 0 && params_.d_min_m <= params_.d_max_m, ErrorCode::config,
          "in-vehicle distance bounds need 0 < d_min <= d_max");
  geometry_.validate();
}

std::size_t Channel::gnb_index(int gnb_id) const {
  for (std::size_t i = 0; i < gnbs_.size(); ++i)
    if (gnbs_[i].id == gnb_id) return i;
  fail(ErrorCode::domain, "unknown gNB id " + std::to_string(gnb_id));
}

std::size_t Channel::ue_index(int ue_id) const {
  for (std::size_t i = 0; i < ues_.size(); ++i)
    if (ues_[i].id == ue_id) return i;
  fail(ErrorCode::domain, "unknown UE id " + std::to_string(ue_id));
}

IncidentAngle Channel::incident(const VehiclePose& pose, int gnb_id) const {
  return incident_angle(pose, mount_, gnbs_[gnb_index(gnb_id)].pos);
}

double Channel::ue_exit_angle(int ue_id) const {
  return exit_angle(mount_, ues_[ue_index(ue_id)].offset);
}

double Channel::x_gnb(const VehiclePose& pose, int gnb_id, int beam, int* used_beam) const {
  const auto& g = gnbs_[gnb_index(gnb_id)];
  const Vec2 p = to_world(pose, mount_.offset);
  const double off = wrap180(bearing_deg(g.pos, p) - g.facing_deg);
  if (beam < 0) beam = best_gnb_beam(off);
  if (used_beam) *used_beam = beam;
  return g.gain_db + gnb_beam_gain_db(beam, off) - fspl_db(dist(g.pos, p), params_.carrier_ghz) -
         params_.l_window_db;
}

double Channel::l_ue(int ue_id) const {
  return -fspl_db(exit_distance(mount_, ues_[ue_index(ue_id)].offset), params_.carrier_ghz);
}

double Channel::g_ue(int ue_id, int beam, int* used_beam) const {
  const auto& u = ues_[ue_index(ue_id)];
  const double b = bearing_deg(u.offset, mount_.offset);
  if (beam < 0) beam = best_ue_beam(b);
  if (used_beam) *used_beam = beam;
  return u.gain_dbi + ue_beam_gain_db(beam, b);
}

double Channel::l_min() const { return -fspl_db(params_.d_max_m, params_.carrier_ghz); }
double Channel::l_max() const { return -fspl_db(params_.d_min_m, params_.carrier_ghz); }

LinkTerms Channel::transmissive_terms(const VehiclePose& pose, int gnb_id, int ue_id,
                                      const SurfaceState& s, int gnb_beam, int ue_beam) const {
  LinkTerms t;
  const auto in = incident(pose, gnb_id);
  if (in.back_side) {
    t.outage = true;
    return t;
  }
  t.x_a = x_gnb(pose, gnb_id, gnb_beam, &t.gnb_beam);
  t.g_ue = g_ue(ue_id, ue_beam, &t.ue_beam);
  t.l_ue = l_ue(ue_id);
  const auto af = surface::array_factor(s.coeffs, geometry_, ue_exit_angle(ue_id),
                                        surface::Side::transmissive, in.deg);
  t.g_w = surface::gain_db(af, geometry_.n_elements) + params_.surface_gain_db;
  return t;
}

LinkTerms Channel::reflective_terms(const VehiclePose& pose, int neighbor_id, int serving_id,
                                    const SurfaceState& s) const {
  if (s.mode == surface::Mode::single_transmissive)
    fail(ErrorCode::domain, "reflective path needs a dual-beam or off surface state");
  LinkTerms t;
  const auto in_n = incident(pose, neighbor_id);
  const auto in_s = incident(pose, serving_id);
  if (in_n.back_side || in_s.back_side) {
    t.outage = true;
    return t;
  }
  t.x_a = x_gnb(pose, serving_id, -1, &t.gnb_beam);
  t.x_b = x_gnb(pose, neighbor_id, -1);
  const auto af = surface::array_factor(s.coeffs, geometry_, in_s.deg, surface::Side::reflective,
                                        in_n.deg);
  t.g_w = surface::gain_db(af, geometry_.n_elements) + params_.surface_gain_db;
  return t;
}

LinkTerms Channel::direct_terms(const VehiclePose& pose, int gnb_id, int ue_id, int gnb_beam,
                                int ue_beam) const {
  LinkTerms t;
  const auto& g = gnbs_[gnb_index(gnb_id)];
  const auto& u = ues_[ue_index(ue_id)];
  const Vec2 q = to_world(pose, u.offset);
  const double rel = wrap180(bearing_deg(q, g.pos) - pose.heading_deg);
  if (u.blocked_from_deg <= u.blocked_to_deg && rel >= u.blocked_from_deg &&
      rel <= u.blocked_to_deg) {
    t.outage = true;
    return t;
  }
  const double off = wrap180(bearing_deg(g.pos, q) - g.facing_deg);
  if (gnb_beam < 0) gnb_beam = best_gnb_beam(off);
  if (ue_beam < 0) ue_beam = best_ue_beam(rel);
  t.gnb_beam = gnb_beam;
  t.ue_beam = ue_beam;
  t.direct = g.gain_db + gnb_beam_gain_db(gnb_beam, off) -
             fspl_db(dist(g.pos, q), params_.carrier_ghz) - u.body_loss_db;
  t.g_ue = u.gain_dbi + ue_beam_gain_db(ue_beam, rel);
  return t;
}

RsrpSample Channel::rsrp(const LinkTerms& terms, Path path, int gnb_id, int ue_id, long t_ms,
                         std::uint64_t seed) const {
  RsrpSample s;
  s.t_ms = t_ms;
  s.gnb = gnb_id;
  s.ue = ue_id;
  s.path = path;
  s.gnb_beam = terms.gnb_beam;
  s.ue_beam = terms.ue_beam;
  if (terms.outage) {
    s.outage = true;
    s.value_dbm = -INFINITY;
    return s;
  }
  s.value_dbm = terms.value_dbm() + shadowing_db(seed, ue_id, gnb_id, path, t_ms,
                                                 params_.shadow_sigma_db, params_.shadow_block_ms);
  return s;
}

bool Channel::in_outage(const RsrpSample& s) const {
  return s.outage || !(sinr_db(s.value_dbm) >= params_.outage_sinr_db);
}

}  // namespace ws::channel
