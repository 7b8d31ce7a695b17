#pragma once

// Angle-indexed voltage codebook: genetic-algorithm synthesis of the
// combined dual-beam array-factor objective, the hard-partition baseline,
// and the binary/text container formats.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "surface.hpp"

namespace ws::codebook {

enum class KeyMode { single, dual_transflective, dual_transmissive };

const char* to_string(KeyMode m);
KeyMode key_mode_from_string(const std::string& s);

inline constexpr double kMaxSteerDeg = 70.0;
inline constexpr double kStoredAlphas[] = {0.0, 0.25, 0.5, 0.75, 1.0};

struct CodebookKey {
  double theta_t_deg = 0.0;
  double theta_r_deg = 0.0;
  double alpha = 0.0;  // reflective (second-beam) power fraction
  KeyMode mode = KeyMode::single;

  /// Throws ErrorCode::domain for angles beyond +-70 deg, alpha outside
  /// [0,1], or a single-mode key with alpha not in {0,1}.
  void validate() const;
  auto operator<=>(const CodebookKey&) const = default;
};

std::string to_string(const CodebookKey& key);

/// Surface mode a key's configuration runs in.
surface::Mode surface_mode(const CodebookKey& key);

struct CodebookEntry {
  CodebookKey key;
  surface::SurfaceConfig config;
  double g_w_tra_db = 0.0;
  double g_w_ref_db = 0.0;
  double objective_db = 0.0;       // combined objective, 0 dB = coherent N
  double sidelobe_margin_db = 0.0; // strongest sidelobe below the weaker main lobe
  bool operator==(const CodebookEntry&) const = default;
};

struct GaParams {
  int population = 128;
  int tournament = 4;
  double crossover_p = 0.5;
  double mutation_sigma_v = 0.8;
  double mutation_p = 0.05;
  int generations = 300;
  int elitism = 2;
  /// 0 = continuous genes; otherwise genes snap to this many evenly spaced
  /// levels over [0, 16] V.
  int quantization_levels = 0;
  /// Weight on the sidelobe margin in the fitness (dB per dB). 0 = pure
  /// array-factor objective.
  double sidelobe_penalty = 0.0;
  /// Weight on the deviation of the realized beam power ratio from
  /// alpha / (1 - alpha), dB per dB. Dual keys with 0 < alpha < 1 only;
  /// 0 = pure objective.
  double split_penalty = 0.0;

  void validate() const;
};

/// Evaluates the combined objective for a key:
///   | sum_n sqrt(1-a) c_t,n e^{-j phi_t,n} + sqrt(a) c_x,n e^{-j phi_x,n} |^2 / N^2
/// in dB, where x is the reflective side (transflective) or the transmissive
/// side again (dual-transmissive). Single keys keep only the term selected
/// by alpha.
class Objective {
 public:
  Objective(const CodebookKey& key, const surface::SurfaceGeometry& geometry,
            double incident_deg);

  double evaluate_db(std::span<const surface::AtomCoeffs> coeffs) const;
  /// Per-element contribution to the inner sum.
  surface::cplx contribution(std::size_t n, const surface::AtomCoeffs& c) const;
  std::size_t size() const { return steer_t_.size(); }

 private:
  double w_t_, w_x_;
  bool x_reflective_;
  std::vector<surface::cplx> steer_t_, steer_x_;
};

struct SynthResult {
  CodebookEntry entry;
  std::vector<double> best_per_generation_db;
};

SynthResult synth_entry(const CodebookKey& key, const surface::SurfaceGeometry& geometry,
                        double incident_deg, std::uint64_t seed, const GaParams& ga = {},
                        const surface::ResponseModel& model = surface::default_model());

/// Splits the aperture into floor((1-a)N) transmissive elements followed by
/// the remainder for the second beam, each with its own ideal gradient.
/// Voltages come from a lattice (0.25 V, or the quantization levels when
/// `quantization_levels` > 0).
CodebookEntry synth_hard_partition(const CodebookKey& key,
                                   const surface::SurfaceGeometry& geometry,
                                   double incident_deg, int quantization_levels = 0,
                                   const surface::ResponseModel& model = surface::default_model());

/// Fills gains, objective and sidelobe margin for an already chosen config.
CodebookEntry finish_entry(const CodebookKey& key, surface::SurfaceConfig config,
                           const surface::SurfaceGeometry& geometry, double incident_deg,
                           const surface::ResponseModel& model = surface::default_model());

double sidelobe_margin_db(const CodebookKey& key, std::span<const surface::AtomCoeffs> coeffs,
                          const surface::SurfaceGeometry& geometry, double incident_deg);

class Codebook {
 public:
  Codebook() = default;
  Codebook(surface::SurfaceGeometry geometry, double incident_deg);

  const surface::SurfaceGeometry& geometry() const { return geometry_; }
  double incident_deg() const { return incident_deg_; }
  std::uint64_t fingerprint() const { return geometry_.fingerprint(); }

  void insert(CodebookEntry entry);
  const CodebookEntry* find(const CodebookKey& key) const;
  /// Throws ErrorCode::config naming the key when absent.
  const CodebookEntry& at(const CodebookKey& key) const;

  struct Nearest {
    const CodebookEntry* entry = nullptr;
    bool exact = false;
  };
  /// Closest stored key of the same mode by |d theta_t| + |d theta_r| +
  /// 100 |d alpha|; ties go to smaller |theta_r|, then smaller alpha.
  Nearest nearest(const CodebookKey& key) const;

  const std::map<CodebookKey, CodebookEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  bool operator==(const Codebook&) const = default;

 private:
  surface::SurfaceGeometry geometry_;
  double incident_deg_ = 0.0;
  std::map<CodebookKey, CodebookEntry> entries_;
};

/// Cartesian product of the grids; throws ErrorCode::domain on any empty grid.
std::vector<CodebookKey> grid_keys(std::span<const double> theta_t_grid,
                                   std::span<const double> theta_r_grid,
                                   std::span<const double> alpha_set, KeyMode mode);

/// One GA run per key, seeded per key so results do not depend on
/// scheduling. `threads` <= 1 runs serially.
Codebook build_codebook(std::span<const CodebookKey> keys,
                        const surface::SurfaceGeometry& geometry, double incident_deg,
                        std::uint64_t seed, const GaParams& ga = {}, int threads = 1,
                        const surface::ResponseModel& model = surface::default_model());

std::string serialize(const Codebook& cb);
Codebook deserialize(std::string_view bytes, const std::string& origin);
void save_codebook(const Codebook& cb, const std::string& path);
/// Rejects the file if `expected` is given and its fingerprint differs.
Codebook load_codebook(const std::string& path,
                       const std::optional<surface::SurfaceGeometry>& expected = std::nullopt);

/// Human-readable `key -> voltages, gains` listing.
std::string export_text(const Codebook& cb);

std::uint64_t entry_seed(std::uint64_t seed, const CodebookKey& key);

}  // namespace ws::codebook
