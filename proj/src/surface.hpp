#pragma once

// Huygens metasurface model: meta-atom response, array factor and beam
// patterns for a 1-D linear aperture.

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ws::surface {

using cplx = std::complex<double>;

inline constexpr double kMinVoltage = 0.0;
inline constexpr double kMaxVoltage = 16.0;
inline constexpr double kModelBandLowGhz = 25.0;
inline constexpr double kModelBandHighGhz = 27.0;
inline constexpr double kFloorDb = -300.0;

struct BiasPair {
  double u_m = 0.0;
  double u_e = 0.0;
  bool operator==(const BiasPair&) const = default;
};

struct MetaAtomResponse {
  double u_m = 0.0;
  double u_e = 0.0;
  double f_ghz = 0.0;
  cplx c_t;
  cplx c_r;
};

/// Per-element coefficients, the only thing the array factor needs.
struct AtomCoeffs {
  cplx c_t;
  cplx c_r;
};

enum class Mode { single_transmissive, dual_transflective, dual_transmissive, off };
enum class Side { transmissive, reflective };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct SurfaceGeometry {
  int n_elements = 64;
  double element_spacing = 0.5;  // wavelengths
  double carrier_ghz = 26.0;

  void validate() const;
  /// FNV-1a over the raw field bytes.
  std::uint64_t fingerprint() const;
  bool operator==(const SurfaceGeometry&) const = default;
};

struct SurfaceConfig {
  std::vector<BiasPair> voltages;
  Mode mode = Mode::off;

  static SurfaceConfig uniform(int n, BiasPair v, Mode mode);
  bool operator==(const SurfaceConfig&) const = default;
};

struct BeamPattern {
  std::vector<double> angles_deg;
  std::vector<double> gain_t_db;
  std::vector<double> gain_r_db;
};

/// Maps bias voltages and frequency to transmission/reflection coefficients.
class ResponseModel {
 public:
  virtual ~ResponseModel() = default;
  virtual MetaAtomResponse response(double u_m, double u_e, double f_ghz) const = 0;
};

/// Two coupled Lorentzian resonators (electric and magnetic dipole sheets).
/// Each resonator scatters s = -g_rad / (g_rad + g_loss + j(f - f_res(u)))
/// with f_res affine in its bias voltage. Forward scattering adds the two
/// dipoles, backward scattering takes their difference:
///   c_t = 1 + s_e + s_m,  c_r = s_e - s_m.
/// Passive for any g_loss >= 0.
class LorentzianModel final : public ResponseModel {
 public:
  struct Params {
    double gamma_rad_ghz = 0.30;
    double gamma_loss_ghz = 0.015;
    // Resonances sweep about 22-30 GHz over 0-16 V, so the balanced
    // (Huygens) ridge through 26 GHz spans the full phase circle.
    double f_e0_ghz = 22.0;
    double f_e_slope = 0.5;    // GHz per volt
    double f_m0_ghz = 22.3;
    double f_m_slope = 0.46;
  };

  LorentzianModel() = default;
  explicit LorentzianModel(Params p) : p_(p) {}

  MetaAtomResponse response(double u_m, double u_e, double f_ghz) const override;
  const Params& params() const { return p_; }

 private:
  Params p_;
};

/// Measured response on a rectangular (u_m, u_e) grid, bilinear in voltage,
/// nearest tabulated frequency.
class GridModel final : public ResponseModel {
 public:
  /// Text table, header `u_m,u_e,f_ghz,re_ct,im_ct,re_cr,im_cr`.
  static GridModel load(const std::string& path);
  static GridModel parse(const std::string& text, const std::string& origin);

  MetaAtomResponse response(double u_m, double u_e, double f_ghz) const override;

  std::span<const double> u_m_axis() const { return um_; }
  std::span<const double> u_e_axis() const { return ue_; }

 private:
  struct Plane {
    double f_ghz;
    std::vector<AtomCoeffs> values;  // row-major over (u_m, u_e)
  };
  std::vector<double> um_, ue_;
  std::vector<Plane> planes_;
};

const ResponseModel& default_model();

MetaAtomResponse atom_response(double u_m, double u_e, double f_ghz);

std::vector<AtomCoeffs> coefficients(const SurfaceConfig& config,
                                     const SurfaceGeometry& geometry,
                                     const ResponseModel& model = default_model());

/// Sum_n c_{side,n} exp(j 2 pi d n (sin(angle) + sin(incident))).
/// Angles are position angles measured with the same orientation on both
/// sides of the aperture, which makes the sum symmetric under
/// angle <-> incident (uplink/downlink reciprocity). An unprogrammed
/// aperture therefore peaks at angle = -incident on both sides.
cplx array_factor(std::span<const AtomCoeffs> coeffs, const SurfaceGeometry& geometry,
                  double angle_deg, Side side, double incident_deg);

cplx array_factor(const SurfaceConfig& config, const SurfaceGeometry& geometry,
                  double angle_deg, Side side, double incident_deg,
                  const ResponseModel& model = default_model());

/// Gains in dB relative to the coherent full-aperture sum N.
BeamPattern beam_pattern(std::span<const AtomCoeffs> coeffs, const SurfaceGeometry& geometry,
                         double incident_deg, std::span<const double> grid_deg);

BeamPattern beam_pattern(const SurfaceConfig& config, const SurfaceGeometry& geometry,
                         double incident_deg, std::span<const double> grid_deg,
                         const ResponseModel& model = default_model());

struct RealizedGains {
  double g_w_tra_db;
  double g_w_ref_db;
};

/// Pattern values at the two targets. For dual-transmissive configs the
/// second beam is read from the transmissive side.
RealizedGains realized_gains(std::span<const AtomCoeffs> coeffs, Mode mode,
                             const SurfaceGeometry& geometry, double theta_t_deg,
                             double theta_r_deg, double incident_deg);

RealizedGains realized_gains(const SurfaceConfig& config, const SurfaceGeometry& geometry,
                             double theta_t_deg, double theta_r_deg, double incident_deg,
                             const ResponseModel& model = default_model());

double gain_db(cplx af, int n_elements);

std::vector<double> angle_grid(double lo_deg, double hi_deg, double step_deg);

}  // namespace ws::surface
