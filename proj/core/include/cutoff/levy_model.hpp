#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cutoff/linalg.hpp"
#include "cutoff/quadrature.hpp"
#include "cutoff/rng.hpp"

namespace cutoff {

struct SpectralAtom {
  Vec direction;  // unit vector
  double weight = 1.0;
  double c0 = 1.0;
};

// Rotationally invariant spectral measure with total mass `mass` and constant c0.
struct IsotropicMarker {
  double mass = 1.0;
  double c0 = 1.0;
};

enum class ProfileKind { pure_stable, tempered, lamperti, custom };

struct RadialProfile {
  ProfileKind kind = ProfileKind::pure_stable;
  double rate = 0.0;  // tempering rate for ProfileKind::tempered
  // Density q(r, theta) on (0, 1] for ProfileKind::custom.
  std::function<double(double, const Vec&)> custom;
};

enum class TailKind { none, point_mass, uniform_shell, pareto, stable_extension };

// Finite tail measure on |z| > 1.
//  point_mass:       rate * delta_{point}
//  uniform_shell:    total `rate`, radius uniform on (1, r_max), direction ~ spectral weights
//  pareto:           intensity * r^{-1-index} dr Lambda(dtheta) on r > 1
//  stable_extension: c0(theta) r^{-1-alpha} dr Lambda(dtheta) on r > 1 (completes the stable law)
struct TailSpec {
  TailKind kind = TailKind::none;
  double rate = 0.0;
  Vec point;
  double r_max = 2.0;
  double index = 1.0;
  double intensity = 1.0;
};

struct LevyMeasureSpec {
  int dim = 1;
  double alpha = 1.5;
  std::vector<SpectralAtom> atoms;
  std::optional<IsotropicMarker> isotropic;
  RadialProfile profile;
  TailSpec tail;
  double beta = 1.0;
  bool symmetric_small_jumps = true;

  void validate() const;
  bool is_isotropic() const { return isotropic.has_value(); }
  // Inner-layer radial density q(r, theta) for r in (0, 1] with limit constant c0.
  double q(double r, const Vec& theta, double c0) const;
  // Is the whole measure exactly strictly alpha-stable?
  bool exactly_stable() const;
  // Symmetry of the full measure (spectral set, profile and tail).
  bool symmetric() const;
  double essinf_c0() const;
  // Total tail rate nu_inf(R^d).
  double tail_rate() const;
  double total_spectral_mass() const;
};

// One factor -gamma |<u, theta>|^alpha of a symmetric stable exponent.
struct StableFactor {
  Vec direction;
  double gamma = 0.0;
};

// Symmetric strictly alpha-stable law: psi(u) = -K|u|^alpha (isotropic) or -sum gamma_k |<u,theta_k>|^alpha.
struct StableLaw {
  int dim = 1;
  double alpha = 1.5;
  bool isotropic = true;
  double K = 1.0;
  std::vector<StableFactor> factors;

  double exponent(const Vec& u) const;
  // Largest c with -psi(u) >= c |u|^alpha (directional lower constant).
  double min_directional_scale() const;
};

struct CharExponentGrid {
  std::vector<Vec> points;
  std::vector<cd> values;
  std::vector<double> errors;
  std::string method;
  double truncation_radius = 0.0;
};

struct MomentCheck {
  double value = 0.0;
  bool pass = false;
  std::string note;
};

struct EquatorReport {
  double essinf_c0 = 0.0;
  int span_rank = 0;
  double min_directional_mass = 0.0;
  bool pass = false;
};

enum class BoundStatus { pass, fail, inconclusive };

struct OreyMasudaResult {
  double integral = 0.0;
  double lower_bound = 0.0;
  double c_angle = 0.0;
  double C_angle = 0.0;
  double r0 = 0.0;
  BoundStatus status = BoundStatus::inconclusive;
  bool pass = false;
};

struct HolderEstimate {
  double quotient = 0.0;
  double exponent = 1.0;
  bool clamped = false;
  std::string note;
};

// int_0^inf (1 - cos r) r^{-1-alpha} dr.
double stable_radial_constant(double alpha);
// E|theta_1|^alpha for theta uniform on the unit sphere of R^d.
double sphere_abs_moment(int d, double alpha);

LevyMeasureSpec make_isotropic_stable(int d, double alpha, double K, double beta);
// Symmetric atoms +-e_i along each coordinate axis with the given weight.
LevyMeasureSpec make_axis_atoms(int d, double alpha, double weight, double c0, double beta);
StableLaw make_isotropic_law(int d, double alpha, double K);
// S_alpha(Lambda_1) with Lambda_1 = c0 Lambda; requires a symmetric spec.
StableLaw stable_limit(const LevyMeasureSpec& spec);

cd char_exponent(const LevyMeasureSpec& spec, const Vec& u, const QuadParams& quad = {});
CharExponentGrid char_exponent_grid(const LevyMeasureSpec& spec, const std::vector<Vec>& points,
                                    const QuadParams& quad = {});

MomentCheck verify_moment_hypothesis(const LevyMeasureSpec& spec, double beta);
EquatorReport equator_report(const LevyMeasureSpec& spec);
OreyMasudaResult orey_masuda_bound(const LevyMeasureSpec& spec, const Vec& v, const QuadParams& quad = {});
HolderEstimate holder_exponent_estimate(const LevyMeasureSpec& spec, double pair_scale, int n_pairs,
                                        RngStream& rng, const QuadParams& quad = {});

// Second moment of the inner layer below radius delta: int_{|z|<=delta} z z^T nu_0(dz).
Mat inner_covariance(const LevyMeasureSpec& spec, double delta, const QuadParams& quad = {});
// int_a^b r^k q(r, theta) dr for the inner profile (k >= 0, 0 <= a < b <= 1).
double inner_radial_moment(const LevyMeasureSpec& spec, const Vec& theta, double c0, double a, double b,
                           int k, const QuadParams& quad = {});

const char* to_string(ProfileKind k);
const char* to_string(TailKind k);
const char* to_string(BoundStatus s);

}  // namespace cutoff
