#include "codebook.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <future>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include "errors.hpp"
#include "io.hpp"

namespace ws::codebook {

using surface::AtomCoeffs;
using surface::BiasPair;
using surface::cplx;
using surface::SurfaceConfig;
using surface::SurfaceGeometry;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::vector<cplx> steering(const SurfaceGeometry& g, double theta_deg, double incident_deg) {
  const double u = std::sin(theta_deg * kDeg) + std::sin(incident_deg * kDeg);
  const double k = 2.0 * std::numbers::pi * g.element_spacing * u;
  std::vector<cplx> s(static_cast<std::size_t>(g.n_elements));
  for (std::size_t n = 0; n < s.size(); ++n) s[n] = std::polar(1.0, k * static_cast<double>(n));
  return s;
}

std::vector<double> levels(int count) {
  std::vector<double> v;
  if (count == 1) return {surface::kMinVoltage};
  for (int i = 0; i < count; ++i)
    v.push_back(surface::kMinVoltage +
                (surface::kMaxVoltage - surface::kMinVoltage) * i / (count - 1));
  return v;
}

}  // namespace

const char* to_string(KeyMode m) {
  switch (m) {
    case KeyMode::single: return "single";
    case KeyMode::dual_transflective: return "dual-transflective";
    case KeyMode::dual_transmissive: return "dual-transmissive";
  }
  return "?";
}

KeyMode key_mode_from_string(const std::string& s) {
  for (KeyMode m : {KeyMode::single, KeyMode::dual_transflective, KeyMode::dual_transmissive})
    if (s == to_string(m)) return m;
  fail(ErrorCode::parse, "unknown codebook mode '" + s + "'");
}

void CodebookKey::validate() const {
  if (!(std::abs(theta_t_deg) <= kMaxSteerDeg) || !(std::abs(theta_r_deg) <= kMaxSteerDeg))
    fail(ErrorCode::domain, "infeasible key " + to_string(*this) + ": angle beyond +-70 deg");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    fail(ErrorCode::domain, "infeasible key " + to_string(*this) + ": alpha outside [0,1]");
  if (mode == KeyMode::single && alpha != 0.0 && alpha != 1.0)
    fail(ErrorCode::domain, "single-beam key " + to_string(*this) + " needs alpha 0 or 1");
}

std::string to_string(const CodebookKey& key) {
  return std::string("(") + to_string(key.mode) + ", theta_t=" + io::format_double(key.theta_t_deg) +
         ", theta_r=" + io::format_double(key.theta_r_deg) +
         ", alpha=" + io::format_double(key.alpha) + ")";
}

surface::Mode surface_mode(const CodebookKey& key) {
  switch (key.mode) {
    case KeyMode::single:
      return key.alpha == 0.0 ? surface::Mode::single_transmissive
                              : surface::Mode::dual_transflective;
    case KeyMode::dual_transflective: return surface::Mode::dual_transflective;
    case KeyMode::dual_transmissive: return surface::Mode::dual_transmissive;
  }
  return surface::Mode::off;
}

void GaParams::validate() const {
  require(population >= 2, ErrorCode::domain, "GA population must be >= 2");
  require(tournament >= 1 && tournament <= population, ErrorCode::domain,
          "GA tournament size must lie in [1, population]");
  require(generations >= 0, ErrorCode::domain, "GA generations must be >= 0");
  require(elitism >= 0 && elitism < population, ErrorCode::domain,
          "GA elitism must lie in [0, population)");
  require(crossover_p >= 0 && crossover_p <= 1 && mutation_p >= 0 && mutation_p <= 1,
          ErrorCode::domain, "GA probabilities must lie in [0,1]");
  require(mutation_sigma_v >= 0, ErrorCode::domain, "GA mutation sigma must be >= 0");
  require(sidelobe_penalty >= 0 && split_penalty >= 0, ErrorCode::domain,
          "GA penalty weights must be >= 0");
  require(quantization_levels == 0 || quantization_levels >= 2, ErrorCode::domain,
          "quantization needs at least 2 levels");
}

Objective::Objective(const CodebookKey& key, const SurfaceGeometry& geometry,
                     double incident_deg) {
  key.validate();
  geometry.validate();
  if (key.mode == KeyMode::single) {
    w_t_ = key.alpha == 0.0 ? 1.0 : 0.0;
    w_x_ = 1.0 - w_t_;
  } else {
    w_t_ = std::sqrt(1.0 - key.alpha);
    w_x_ = std::sqrt(key.alpha);
  }
  x_reflective_ = key.mode != KeyMode::dual_transmissive;
  steer_t_ = steering(geometry, key.theta_t_deg, incident_deg);
  steer_x_ = steering(geometry, key.theta_r_deg, incident_deg);
}

cplx Objective::contribution(std::size_t n, const AtomCoeffs& c) const {
  return w_t_ * c.c_t * steer_t_[n] + w_x_ * (x_reflective_ ? c.c_r : c.c_t) * steer_x_[n];
}

double Objective::evaluate_db(std::span<const AtomCoeffs> coeffs) const {
  cplx sum = 0.0;
  for (std::size_t n = 0; n < coeffs.size(); ++n) sum += contribution(n, coeffs[n]);
  const double p = std::norm(sum) / (static_cast<double>(size()) * static_cast<double>(size()));
  return p > 0.0 ? 10.0 * std::log10(p) : surface::kFloorDb;
}

double sidelobe_margin_db(const CodebookKey& key, std::span<const AtomCoeffs> coeffs,
                          const SurfaceGeometry& geometry, double incident_deg) {
  // Main-lobe region: first null of a uniform aperture, |du| < 1/(N d).
  const double half_width = 1.0 / (geometry.n_elements * geometry.element_spacing);
  auto in_lobe = [&](double a, double target) {
    return std::abs(std::sin(a * kDeg) - std::sin(target * kDeg)) < half_width;
  };
  const auto grid = surface::angle_grid(-90.0, 90.0, 1.0);
  const auto pat = surface::beam_pattern(coeffs, geometry, incident_deg, grid);
  const auto gains = surface::realized_gains(coeffs, surface_mode(key), geometry,
                                             key.theta_t_deg, key.theta_r_deg, incident_deg);
  const bool t_beam = !(key.mode == KeyMode::single && key.alpha == 1.0);
  const bool x_beam = !(key.mode == KeyMode::single && key.alpha == 0.0);
  const bool x_on_t = key.mode == KeyMode::dual_transmissive;

  double weaker = INFINITY;
  if (t_beam) weaker = std::min(weaker, gains.g_w_tra_db);
  if (x_beam) weaker = std::min(weaker, gains.g_w_ref_db);

  double side = surface::kFloorDb;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double a = grid[i];
    const bool t_pattern_used = t_beam || x_on_t;
    if (t_pattern_used) {
      bool lobe = (t_beam && in_lobe(a, key.theta_t_deg)) ||
                  (x_beam && x_on_t && in_lobe(a, key.theta_r_deg));
      if (!lobe) side = std::max(side, pat.gain_t_db[i]);
    }
    if (x_beam && !x_on_t && !in_lobe(a, key.theta_r_deg)) side = std::max(side, pat.gain_r_db[i]);
  }
  return weaker - side;
}

CodebookEntry finish_entry(const CodebookKey& key, SurfaceConfig config,
                           const SurfaceGeometry& geometry, double incident_deg,
                           const surface::ResponseModel& model) {
  config.mode = surface_mode(key);
  const auto coeffs = surface::coefficients(config, geometry, model);
  const auto gains = surface::realized_gains(coeffs, config.mode, geometry, key.theta_t_deg,
                                             key.theta_r_deg, incident_deg);
  CodebookEntry e;
  e.key = key;
  e.config = std::move(config);
  e.g_w_tra_db = gains.g_w_tra_db;
  e.g_w_ref_db = gains.g_w_ref_db;
  e.objective_db = Objective(key, geometry, incident_deg).evaluate_db(coeffs);
  e.sidelobe_margin_db = sidelobe_margin_db(key, coeffs, geometry, incident_deg);
  return e;
}

namespace {

class GeneticSearch {
 public:
  GeneticSearch(const CodebookKey& key, const SurfaceGeometry& g, double incident,
                std::uint64_t seed, const GaParams& p, const surface::ResponseModel& model)
      : key_(key), geo_(g), incident_(incident), p_(p), model_(model),
        objective_(key, g, incident), rng_(seed), n_(static_cast<std::size_t>(g.n_elements)) {
    if (p_.quantization_levels > 0) {
      levels_ = levels(p_.quantization_levels);
      table_.resize(levels_.size() * levels_.size());
      for (std::size_t i = 0; i < levels_.size(); ++i)
        for (std::size_t j = 0; j < levels_.size(); ++j) {
          const auto r = model_.response(levels_[i], levels_[j], geo_.carrier_ghz);
          table_[i * levels_.size() + j] = {r.c_t, r.c_r};
        }
    }
  }

  SynthResult run() {
    std::uniform_real_distribution<double> uni(surface::kMinVoltage, surface::kMaxVoltage);
    std::vector<Individual> pop(static_cast<std::size_t>(p_.population));
    for (auto& ind : pop) {
      ind.genes.resize(2 * n_);
      for (auto& v : ind.genes) v = snap(uni(rng_));
      ind.fitness = fitness(ind.genes);
    }
    std::vector<double> trace;
    sort(pop);
    trace.push_back(pop.front().fitness);

    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, p_.mutation_sigma_v);
    for (int gen = 0; gen < p_.generations; ++gen) {
      std::vector<Individual> next(pop.begin(), pop.begin() + p_.elitism);
      while (next.size() < pop.size()) {
        const Individual& a = tournament(pop);
        const Individual& b = tournament(pop);
        Individual child;
        child.genes.resize(2 * n_);
        for (std::size_t i = 0; i < child.genes.size(); ++i) {
          double v = coin(rng_) < p_.crossover_p ? b.genes[i] : a.genes[i];
          if (coin(rng_) < p_.mutation_p)
            v = std::clamp(v + gauss(rng_), surface::kMinVoltage, surface::kMaxVoltage);
          child.genes[i] = snap(v);
        }
        child.fitness = fitness(child.genes);
        next.push_back(std::move(child));
      }
      pop = std::move(next);
      sort(pop);
      trace.push_back(pop.front().fitness);
    }

    SurfaceConfig cfg;
    cfg.voltages.resize(n_);
    for (std::size_t n = 0; n < n_; ++n)
      cfg.voltages[n] = {pop.front().genes[2 * n], pop.front().genes[2 * n + 1]};
    SynthResult out;
    out.entry = finish_entry(key_, std::move(cfg), geo_, incident_, model_);
    out.best_per_generation_db = std::move(trace);
    return out;
  }

 private:
  struct Individual {
    std::vector<double> genes;
    double fitness = 0.0;
  };

  double snap(double v) const {
    if (levels_.empty()) return v;
    return levels_[level_index(v)];
  }

  std::size_t level_index(double v) const {
    const double step = (surface::kMaxVoltage - surface::kMinVoltage) /
                        static_cast<double>(levels_.size() - 1);
    const auto i = static_cast<long>(std::lround((v - surface::kMinVoltage) / step));
    return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(levels_.size()) - 1));
  }

  double fitness(const std::vector<double>& genes) {
    coeffs_.resize(n_);
    for (std::size_t n = 0; n < n_; ++n) {
      if (levels_.empty()) {
        const auto r = model_.response(genes[2 * n], genes[2 * n + 1], geo_.carrier_ghz);
        coeffs_[n] = {r.c_t, r.c_r};
      } else {
        coeffs_[n] = table_[level_index(genes[2 * n]) * levels_.size() + level_index(genes[2 * n + 1])];
      }
    }
    double f = objective_.evaluate_db(coeffs_);
    if (p_.sidelobe_penalty != 0.0)
      f += p_.sidelobe_penalty * sidelobe_margin_db(key_, coeffs_, geo_, incident_);
    if (p_.split_penalty != 0.0 && key_.mode != KeyMode::single && key_.alpha > 0.0 &&
        key_.alpha < 1.0) {
      const auto g = surface::realized_gains(coeffs_, surface_mode(key_), geo_, key_.theta_t_deg,
                                             key_.theta_r_deg, incident_);
      const double want = 10.0 * std::log10(key_.alpha / (1.0 - key_.alpha));
      f -= p_.split_penalty * std::abs(g.g_w_ref_db - g.g_w_tra_db - want);
    }
    return f;
  }

  static void sort(std::vector<Individual>& pop) {
    std::stable_sort(pop.begin(), pop.end(),
                     [](const Individual& a, const Individual& b) { return a.fitness > b.fitness; });
  }

  const Individual& tournament(const std::vector<Individual>& pop) {
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    std::size_t best = pick(rng_);
    for (int i = 1; i < p_.tournament; ++i) {
      const std::size_t c = pick(rng_);
      if (pop[c].fitness > pop[best].fitness) best = c;
    }
    return pop[best];
  }

  CodebookKey key_;
  SurfaceGeometry geo_;
  double incident_;
  GaParams p_;
  const surface::ResponseModel& model_;
  Objective objective_;
  std::mt19937_64 rng_;
  std::size_t n_;
  std::vector<double> levels_;
  std::vector<AtomCoeffs> table_;
  std::vector<AtomCoeffs> coeffs_;
};

}  // namespace

SynthResult synth_entry(const CodebookKey& key, const SurfaceGeometry& geometry,
                        double incident_deg, std::uint64_t seed, const GaParams& ga,
                        const surface::ResponseModel& model) {
  key.validate();
  geometry.validate();
  ga.validate();
  return GeneticSearch(key, geometry, incident_deg, seed, ga, model).run();
}

CodebookEntry synth_hard_partition(const CodebookKey& key, const SurfaceGeometry& geometry,
                                   double incident_deg, int quantization_levels,
                                   const surface::ResponseModel& model) {
  key.validate();
  geometry.validate();
  if (key.mode == KeyMode::single)
    fail(ErrorCode::domain, "hard partitioning needs a dual-beam key, got " + to_string(key));

  const auto volts = quantization_levels > 0 ? levels(quantization_levels)
                                             : surface::angle_grid(0.0, 16.0, 0.25);
  struct Candidate {
    BiasPair v;
    AtomCoeffs c;
  };
  std::vector<Candidate> lattice;
  for (double um : volts)
    for (double ue : volts) {
      const auto r = model.response(um, ue, geometry.carrier_ghz);
      lattice.push_back({{um, ue}, {r.c_t, r.c_r}});
    }

  const auto n = static_cast<std::size_t>(geometry.n_elements);
  const auto n_first = static_cast<std::size_t>(std::floor((1.0 - key.alpha) * geometry.n_elements));
  const auto steer_t = steering(geometry, key.theta_t_deg, incident_deg);
  const auto steer_x = steering(geometry, key.theta_r_deg, incident_deg);
  const bool x_reflective = key.mode == KeyMode::dual_transflective;

  // Each element maximizes its own beam toward a common reference phase; the
  // second partition's reference is chosen from 16 offsets by the objective.
  auto pick = [&](std::size_t i, bool first, double ref) {
    const cplx rot = std::polar(1.0, -ref);
    double best = -INFINITY;
    BiasPair bv{};
    for (const auto& cand : lattice) {
      const cplx c = first ? cand.c.c_t : (x_reflective ? cand.c.c_r : cand.c.c_t);
      const double score = std::real(c * (first ? steer_t[i] : steer_x[i]) * rot);
      if (score > best) {
        best = score;
        bv = cand.v;
      }
    }
    return bv;
  };

  const Objective objective(key, geometry, incident_deg);
  SurfaceConfig best_cfg;
  double best_obj = -INFINITY;
  for (int k = 0; k < 16; ++k) {
    const double ref = 2.0 * std::numbers::pi * k / 16.0;
    SurfaceConfig cfg;
    cfg.mode = surface_mode(key);
    cfg.voltages.resize(n);
    for (std::size_t i = 0; i < n; ++i) cfg.voltages[i] = i < n_first ? pick(i, true, 0.0) : pick(i, false, ref);
    const double obj = objective.evaluate_db(surface::coefficients(cfg, geometry, model));
    if (obj > best_obj) {
      best_obj = obj;
      best_cfg = std::move(cfg);
    }
    if (n_first == n) break;  // no second partition to phase
  }
  return finish_entry(key, std::move(best_cfg), geometry, incident_deg, model);
}

Codebook::Codebook(SurfaceGeometry geometry, double incident_deg)
    : geometry_(geometry), incident_deg_(incident_deg) {
  geometry_.validate();
}

void Codebook::insert(CodebookEntry entry) {
  require(entry.config.voltages.size() == static_cast<std::size_t>(geometry_.n_elements),
          ErrorCode::domain, "entry size does not match codebook geometry");
  const auto key = entry.key;
  entries_.insert_or_assign(key, std::move(entry));
}

const CodebookEntry* Codebook::find(const CodebookKey& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

const CodebookEntry& Codebook::at(const CodebookKey& key) const {
  const auto* e = find(key);
  if (!e) fail(ErrorCode::config, "codebook has no entry for key " + to_string(key));
  return *e;
}

Codebook::Nearest Codebook::nearest(const CodebookKey& key) const {
  if (const auto* e = find(key)) return {e, true};
  const CodebookEntry* best = nullptr;
  double best_d = INFINITY;
  for (const auto& [k, e] : entries_) {
    if (k.mode != key.mode) continue;
    const double d = std::abs(k.theta_t_deg - key.theta_t_deg) +
                     std::abs(k.theta_r_deg - key.theta_r_deg) + 100.0 * std::abs(k.alpha - key.alpha);
    bool better = d < best_d;
    if (!better && d == best_d && best) {
      const auto& b = best->key;
      if (std::abs(k.theta_r_deg) != std::abs(b.theta_r_deg))
        better = std::abs(k.theta_r_deg) < std::abs(b.theta_r_deg);
      else
        better = k.alpha < b.alpha;
    }
    if (better) {
      best = &e;
      best_d = d;
    }
  }
  return {best, false};
}

std::vector<CodebookKey> grid_keys(std::span<const double> theta_t_grid,
                                   std::span<const double> theta_r_grid,
                                   std::span<const double> alpha_set, KeyMode mode) {
  require(!theta_t_grid.empty() && !theta_r_grid.empty(), ErrorCode::domain, "empty angle grid");
  require(!alpha_set.empty(), ErrorCode::domain, "empty alpha set");
  std::vector<CodebookKey> keys;
  for (double t : theta_t_grid)
    for (double r : theta_r_grid)
      for (double a : alpha_set) {
        CodebookKey k{t, r, a, mode};
        k.validate();
        keys.push_back(k);
      }
  return keys;
}

std::uint64_t entry_seed(std::uint64_t seed, const CodebookKey& key) {
  std::uint64_t h = splitmix64(seed);
  for (double v : {key.theta_t_deg, key.theta_r_deg, key.alpha}) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h = splitmix64(h ^ bits);
  }
  return splitmix64(h ^ static_cast<std::uint64_t>(key.mode));
}

Codebook build_codebook(std::span<const CodebookKey> keys, const SurfaceGeometry& geometry,
                        double incident_deg, std::uint64_t seed, const GaParams& ga, int threads,
                        const surface::ResponseModel& model) {
  require(!keys.empty(), ErrorCode::domain, "no codebook keys requested");
  ga.validate();
  Codebook cb(geometry, incident_deg);
  std::vector<std::optional<CodebookEntry>> results(keys.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= keys.size()) return;
      try {
        results[i] = synth_entry(keys[i], geometry, incident_deg, entry_seed(seed, keys[i]), ga, model).entry;
      } catch (const Error& e) {
        std::lock_guard lock(err_mu);
        if (!first_error)
          first_error = std::make_exception_ptr(
              Error(e.code(), "key " + to_string(keys[i]) + ": " + e.what()));
        next = keys.size();
      }
    }
  };
  const int n_threads = std::max(1, threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::future<void>> fs;
    for (int t = 0; t < n_threads; ++t) fs.push_back(std::async(std::launch::async, worker));
    for (auto& f : fs) f.get();
  }
  if (first_error) std::rethrow_exception(first_error);
  for (auto& r : results) cb.insert(std::move(*r));
  return cb;
}

// ---------------------------------------------------------------------------
// Binary container: "WSCB", u32 version, u64 fingerprint, i32 N, f64 spacing,
// f64 carrier, f64 incident, u64 count, then entries. Little-endian host
// layout.

namespace {

constexpr char kMagic[4] = {'W', 'S', 'C', 'B'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  template <class T>
  void put(T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out_.append(b, sizeof(T));
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(std::string_view b, std::string origin) : b_(b), origin_(std::move(origin)) {}
  template <class T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > b_.size())
      fail(ErrorCode::parse, origin_ + ": truncated codebook at byte offset " +
                                 std::to_string(pos_) + " while reading " + what);
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t pos() const { return pos_; }
  std::size_t size() const { return b_.size(); }

 private:
  std::string_view b_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize(const Codebook& cb) {
  Writer w;
  w.raw(kMagic, 4);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint64_t>(cb.fingerprint());
  w.put<std::int32_t>(cb.geometry().n_elements);
  w.put<double>(cb.geometry().element_spacing);
  w.put<double>(cb.geometry().carrier_ghz);
  w.put<double>(cb.incident_deg());
  w.put<std::uint64_t>(cb.size());
  for (const auto& [k, e] : cb.entries()) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(k.mode));
    w.put<double>(k.theta_t_deg);
    w.put<double>(k.theta_r_deg);
    w.put<double>(k.alpha);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(e.config.mode));
    w.put<double>(e.g_w_tra_db);
    w.put<double>(e.g_w_ref_db);
    w.put<double>(e.objective_db);
    w.put<double>(e.sidelobe_margin_db);
    for (const auto& v : e.config.voltages) {
      w.put<double>(v.u_m);
      w.put<double>(v.u_e);
    }
  }
  return w.take();
}

Codebook deserialize(std::string_view bytes, const std::string& origin) {
  Reader r(bytes, origin);
  char magic[4];
  for (char& c : magic) c = r.get<char>("magic");
  if (std::memcmp(magic, kMagic, 4) != 0) fail(ErrorCode::parse, origin + ": not a codebook file");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kVersion)
    fail(ErrorCode::parse, origin + ": unsupported codebook version " + std::to_string(version));
  const auto fp = r.get<std::uint64_t>("fingerprint");
  SurfaceGeometry g;
  g.n_elements = r.get<std::int32_t>("n_elements");
  g.element_spacing = r.get<double>("element_spacing");
  g.carrier_ghz = r.get<double>("carrier");
  const double incident = r.get<double>("incident angle");
  if (g.n_elements < 1 || g.n_elements > 1'000'000)
    fail(ErrorCode::parse, origin + ": implausible element count");
  if (g.fingerprint() != fp)
    fail(ErrorCode::parse, origin + ": header fingerprint does not match header geometry");
  Codebook cb(g, incident);
  const auto count = r.get<std::uint64_t>("entry count");
  for (std::uint64_t i = 0; i < count; ++i) {
    CodebookEntry e;
    const auto km = r.get<std::uint8_t>("key mode");
    if (km > 2) fail(ErrorCode::parse, origin + ": bad key mode at byte offset " + std::to_string(r.pos() - 1));
    e.key.mode = static_cast<KeyMode>(km);
    e.key.theta_t_deg = r.get<double>("theta_t");
    e.key.theta_r_deg = r.get<double>("theta_r");
    e.key.alpha = r.get<double>("alpha");
    const auto sm = r.get<std::uint8_t>("surface mode");
    if (sm > 3) fail(ErrorCode::parse, origin + ": bad surface mode at byte offset " + std::to_string(r.pos() - 1));
    e.config.mode = static_cast<surface::Mode>(sm);
    e.g_w_tra_db = r.get<double>("g_w_tra");
    e.g_w_ref_db = r.get<double>("g_w_ref");
    e.objective_db = r.get<double>("objective");
    e.sidelobe_margin_db = r.get<double>("sidelobe margin");
    e.config.voltages.resize(static_cast<std::size_t>(g.n_elements));
    for (auto& v : e.config.voltages) {
      v.u_m = r.get<double>("voltage");
      v.u_e = r.get<double>("voltage");
    }
    cb.insert(std::move(e));
  }
  if (r.pos() != r.size())
    fail(ErrorCode::parse, origin + ": trailing bytes after byte offset " + std::to_string(r.pos()));
  return cb;
}

void save_codebook(const Codebook& cb, const std::string& path) {
  io::write_file_atomic(path, serialize(cb));
}

Codebook load_codebook(const std::string& path, const std::optional<SurfaceGeometry>& expected) {
  Codebook cb = deserialize(io::read_file(path), path);
  if (expected && expected->fingerprint() != cb.fingerprint()) {
    std::ostringstream ss;
    ss << path << ": geometry fingerprint mismatch (file " << std::hex << cb.fingerprint()
       << ", expected " << expected->fingerprint() << ")";
    fail(ErrorCode::config, ss.str());
  }
  return cb;
}

std::string export_text(const Codebook& cb) {
  std::ostringstream ss;
  ss << "# codebook n_elements=" << cb.geometry().n_elements
     << " spacing=" << io::format_double(cb.geometry().element_spacing)
     << " carrier_ghz=" << io::format_double(cb.geometry().carrier_ghz)
     << " incident_deg=" << io::format_double(cb.incident_deg()) << " fingerprint=" << std::hex
     << cb.fingerprint() << std::dec << " entries=" << cb.size() << "\n";
  for (const auto& [k, e] : cb.entries()) {
    ss << to_string(k.mode) << " " << io::format_double(k.theta_t_deg) << " "
       << io::format_double(k.theta_r_deg) << " " << io::format_double(k.alpha) << " -> g_w_tra="
       << io::format_double(e.g_w_tra_db) << " g_w_ref=" << io::format_double(e.g_w_ref_db)
       << " objective=" << io::format_double(e.objective_db)
       << " sidelobe_margin=" << io::format_double(e.sidelobe_margin_db) << " voltages=";
    for (std::size_t i = 0; i < e.config.voltages.size(); ++i) {
      if (i) ss << ";";
      ss << io::format_double(e.config.voltages[i].u_m) << ":"
         << io::format_double(e.config.voltages[i].u_e);
    }
    ss << "\n";
  }
  return ss.str();
}

}  // namespace ws::codebook
