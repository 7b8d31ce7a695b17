#pragma once

// Geometry, path loss, link budget and the three RSRP quantities (serving
// via surface, neighbor via surface, reflected neighbor) plus direct paths.
// Every L symbol is a signed dB contribution: losses enter as negative
// values, so M = X + G_w + G_ue + L_ue is a plain sum.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "surface.hpp"

namespace ws::channel {

inline constexpr double kSpeedOfLight = 299'792'458.0;

/// 20 log10(4 pi d f / c). Throws ErrorCode::domain for d <= 0 or f <= 0.
double fspl_db(double d_m, double f_ghz);

struct LinkBudgetParams {
  double p_gnb_dbm = 60.0;     // neighbor/serving gNB EIRP
  double l_gnb_db = 103.0;     // gNB to surface path loss
  double l_window_db = 3.0;
  double g_ris_rx_dbi = 24.0;
  double g_ris_tx_dbi = 24.0;
  double l_ue_db = 72.0;       // surface to UE path loss
  double g_ue_dbi = 8.0;
  double p_nf_dbm = -89.0;
  double l_gnb_s_db = 103.0;   // surface to serving gNB path loss (uplink leg)
  double g_gnb_s_dbi = 29.5;   // serving gNB receive gain

  /// Throws ErrorCode::domain if any loss is negative.
  void validate() const;
};

struct BudgetTerm {
  std::string name;
  double value_db;  // signed contribution to the total
};

struct BudgetReport {
  std::vector<BudgetTerm> terms;
  double total_db = 0.0;
};

/// P_gNB - L_gNB - L_window + G_RIS,Rx + G_RIS,Tx - L_UE + G_UE - P_nf.
BudgetReport snr_ue(const LinkBudgetParams& p);
/// P_gNB - L_gNB - L_window + G_RIS,Rx + G_RIS,Tx - L_window - L_gNB,s
/// + G_gNB,s - P_nf.
BudgetReport snr_gnb(const LinkBudgetParams& p);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

struct GnbSite {
  int id = 0;
  Vec2 pos;
  double gain_db = 65.0;     // transmit power plus antenna gain
  int freq = 0;              // frequency resource index
  double facing_deg = -90.0; // array boresight, world frame
  bool operator==(const GnbSite&) const = default;
};

struct UeSite {
  int id = 0;
  Vec2 offset;               // vehicle frame: x forward, y left (m)
  double gain_dbi = 8.0;
  double body_loss_db = 30.0;  // direct-path penetration when not blocked
  /// Direct path blocked while the gNB bearing (vehicle frame, deg) lies in
  /// [blocked_from_deg, blocked_to_deg]. Empty when from > to.
  double blocked_from_deg = 1.0;
  double blocked_to_deg = 0.0;
  bool operator==(const UeSite&) const = default;
};

struct SurfaceMount {
  Vec2 offset;               // vehicle frame
  double normal_deg = 90.0;  // outward normal relative to heading
  bool operator==(const SurfaceMount&) const = default;
};

struct VehiclePose {
  Vec2 pos;
  double heading_deg = 0.0;
};

struct ChannelParams {
  double l_window_db = 3.0;
  double surface_gain_db = 48.0;  // absolute aperture gain added to pattern values
  double noise_floor_dbm = -89.0;
  double outage_sinr_db = -5.0;
  double shadow_sigma_db = 2.0;
  int shadow_block_ms = 20;
  double carrier_ghz = 26.0;
  double d_min_m = 0.3;           // in-vehicle distance bounds
  double d_max_m = 1.0;
  bool operator==(const ChannelParams&) const = default;
};

enum class Path { direct, surface_transmissive, surface_reflective };
const char* to_string(Path p);
Path path_from_string(const std::string& s);

inline constexpr int kGnbBeams = 8;
inline constexpr int kUeBeams = 4;
inline constexpr int kSurfaceScanAngles = 8;

/// Beam loss (dB, <= 0) of gNB beam b for a departure angle measured from
/// the array boresight. Beams sit at -52.5 + 15 b deg.
double gnb_beam_gain_db(int beam, double off_boresight_deg);
int best_gnb_beam(double off_boresight_deg);
/// UE beam loss; beams at 0, 90, 180, 270 deg in the vehicle frame.
double ue_beam_gain_db(int beam, double bearing_deg);
int best_ue_beam(double bearing_deg);

struct IncidentAngle {
  double deg = 0.0;
  bool back_side = false;  // gNB behind the surface plane
};

/// Signed angle from the surface normal to the gNB, in (-90, 90).
IncidentAngle incident_angle(const VehiclePose& pose, const SurfaceMount& mount, Vec2 gnb);

/// Position angle of a UE behind the surface, in array-factor convention
/// (a straight-through ray from incident angle a exits at -a).
double exit_angle(const SurfaceMount& mount, Vec2 ue_offset);
double exit_distance(const SurfaceMount& mount, Vec2 ue_offset);

/// Codebook angle that steers a wave from `a` to `b` on a codebook built
/// for incident angle `codebook_incident`: asin(sin a + sin b - sin psi),
/// quantized to `step_deg`. Empty when out of the steerable +-70 deg range.
std::optional<double> key_angle(double a_deg, double b_deg, double codebook_incident_deg,
                                double step_deg);

/// Zero-mean Gaussian shadowing, a pure function of its arguments; held
/// constant within blocks of `block_ms`.
double shadowing_db(std::uint64_t seed, int ue, int gnb, Path path, long t_ms, double sigma_db,
                    int block_ms);

/// Surface state used to evaluate a surface path.
struct SurfaceState {
  std::span<const surface::AtomCoeffs> coeffs;
  surface::Mode mode = surface::Mode::off;
};

/// Signed dB terms of one path; value = sum of the applicable terms.
struct LinkTerms {
  double x_a = 0.0;      // X of the transmitting (or serving) gNB leg
  double x_b = 0.0;      // X of the second gNB leg (reflective path only)
  double g_w = 0.0;      // surface realized gain incl. aperture gain
  double g_ue = 0.0;
  double l_ue = 0.0;     // signed in-vehicle loss
  double direct = 0.0;   // direct path sum (direct path only)
  int gnb_beam = 0;
  int ue_beam = 0;
  bool outage = false;
  double value_dbm() const;
};

struct RsrpSample {
  long t_ms = 0;
  int gnb = 0;
  int ue = -1;  // -1 for the vehicle-level reflective measurement
  Path path = Path::direct;
  double value_dbm = 0.0;
  bool outage = false;
  int gnb_beam = 0;
  int ue_beam = 0;
};

class Channel {
 public:
  Channel(std::vector<GnbSite> gnbs, std::vector<UeSite> ues, SurfaceMount mount,
          ChannelParams params, surface::SurfaceGeometry geometry);

  const std::vector<GnbSite>& gnbs() const { return gnbs_; }
  const std::vector<UeSite>& ues() const { return ues_; }
  const SurfaceMount& mount() const { return mount_; }
  const ChannelParams& params() const { return params_; }
  const surface::SurfaceGeometry& geometry() const { return geometry_; }

  std::size_t gnb_index(int gnb_id) const;
  std::size_t ue_index(int ue_id) const;

  IncidentAngle incident(const VehiclePose& pose, int gnb_id) const;
  double ue_exit_angle(int ue_id) const;

  /// gNB leg aggregate X_g: gain + beam gain - fspl - l_window. Uses the
  /// given beam, or the best beam toward the surface when beam < 0.
  double x_gnb(const VehiclePose& pose, int gnb_id, int beam, int* used_beam = nullptr) const;
  /// Signed in-vehicle loss L_ue,i = -fspl(surface-to-UE distance).
  double l_ue(int ue_id) const;
  double g_ue(int ue_id, int beam, int* used_beam = nullptr) const;

  /// Signed loss bounds for the decision module: l_min = -fspl(d_max),
  /// l_max = -fspl(d_min).
  double l_min() const;
  double l_max() const;

  LinkTerms transmissive_terms(const VehiclePose& pose, int gnb_id, int ue_id,
                               const SurfaceState& s, int gnb_beam = -1, int ue_beam = -1) const;
  LinkTerms reflective_terms(const VehiclePose& pose, int neighbor_id, int serving_id,
                             const SurfaceState& s) const;
  LinkTerms direct_terms(const VehiclePose& pose, int gnb_id, int ue_id, int gnb_beam = -1,
                         int ue_beam = -1) const;

  /// Terms plus shadowing. Outage samples carry no finite value.
  RsrpSample rsrp(const LinkTerms& terms, Path path, int gnb_id, int ue_id, long t_ms,
                  std::uint64_t seed) const;

  double sinr_db(double rsrp_dbm) const { return rsrp_dbm - params_.noise_floor_dbm; }
  bool in_outage(const RsrpSample& s) const;

 private:
  std::vector<GnbSite> gnbs_;
  std::vector<UeSite> ues_;
  SurfaceMount mount_;
  ChannelParams params_;
  surface::SurfaceGeometry geometry_;
};

}  // namespace ws::channel
