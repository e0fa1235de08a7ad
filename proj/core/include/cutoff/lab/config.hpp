#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cutoff/dynamics.hpp"
#include "cutoff/levy_model.hpp"
#include "cutoff/linalg.hpp"
#include "cutoff/simulate.hpp"

namespace cutoff::lab {

enum class SystemPreset { linear, fput, oscillator_profile, oscillator_noprofile, custom };
enum class EquilibriumMode { longrun, eps_zinf, both };
enum class NoiseKind { isotropic, axes };

const char* to_string(SystemPreset p);
const char* to_string(EquilibriumMode m);
const char* to_string(NoiseKind k);
SystemPreset parse_preset(const std::string& s);

struct SystemConfig {
  SystemPreset preset = SystemPreset::linear;
  int dim = 1;
  Mat Q;  // linear
  Mat A, B;  // fput
  GaussianBump bump;
  double delta1 = 0.5, delta2 = 0.5, eta = 1.0;  // oscillator
  OscillatorPotential potential;
  std::vector<std::string> drift;  // custom, in variables x1..xd
  double declared_delta = 0.0;
};

struct NoiseConfig {
  NoiseKind kind = NoiseKind::isotropic;
  double alpha = 1.7;
  // Exponent coefficient K of -K|u|^alpha (isotropic) or the per-axis weight.
  double scale = 1.0;
  ProfileKind profile = ProfileKind::pure_stable;
  double tempering = 0.0;
  TailSpec tail{TailKind::stable_extension, 0.0, Vec(), 2.0, 1.0, 1.0};
  double beta = 1.0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  SystemConfig system;
  NoiseConfig noise;
  std::vector<double> eps{1e-1, std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5), 1e-3};
  Vec x;
  std::vector<double> deltas;
  std::vector<double> rhos;
  int paths = 200000;
  int equilibrium_paths = 200000;
  int profile_paths = 200000;
  int mixing_paths = 50000;
  // dt = w_eps / dt_divisor unless a fixed dt is given.
  double dt_divisor = 50.0;
  std::optional<double> dt;
  Scheme scheme = Scheme::euler;
  std::uint64_t seed = 20240601;
  int threads = 0;
  EquilibriumMode equilibrium = EquilibriumMode::eps_zinf;
  double equilibrium_tol = 0.05;
  std::vector<double> etas{0.25};
  int mixing_points = 60;
  double mixing_span_lo = 0.1, mixing_span_hi = 2.5;
  double tail_lo = -4.0, tail_hi = -2.0;
  double collapse_tol = 0.05;
  double audit_radius = 2.0;
  int audit_triples = 200;
  double budget_seconds = 0.0;
  bool force_audits = false;
  std::vector<std::string> sections{"curve", "profile", "mixing", "tails"};

  bool has_section(const std::string& s) const;
  void validate() const;
  LevyMeasureSpec noise_spec() const;
  VectorFieldModel field() const;
  nlohmann::json to_json() const;
  // FNV-1a of the canonical JSON serialization.
  std::string hash() const;
};

// Default configuration for a preset.
ExperimentConfig preset_config(SystemPreset p);
// Parses a YAML document; keys not in the schema are errors.
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::string& path);

}  // namespace cutoff::lab
