#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cutoff/dynamics.hpp"
#include "cutoff/linalg.hpp"

namespace cutoff {

enum class HGProvenance { exact_linear, empirical };

// Asymptotics e^{lambda t} t^{1-ell} phi^x_{t+tau} ~ sum_k e^{i omega_k t} v_k.
struct HGData {
  double lambda = 0.0;
  int ell = 1;
  double tau = 0.0;
  int m = 0;
  // Signed frequencies and the angles theta_k = omega_k mod 2 pi.
  std::vector<double> omega;
  std::vector<double> theta;
  std::vector<CVec> v;
  HGProvenance provenance = HGProvenance::exact_linear;
  bool degenerate = false;
  // Eigenvalues of the linearization whose component in x is numerically zero.
  std::vector<cd> zero_components;
  double fit_residual = 0.0;
  std::string note;

  int dim() const { return v.empty() ? 0 : static_cast<int>(v.front().size()); }
  CVec rotating(double t) const;
  Vec rotating_real(double t) const;
};

const char* to_string(HGProvenance p);

struct HGOptions {
  double cluster_tol = 1e-8;
  double ambiguity_band = 1e-5;
  double zero_threshold = 1e-10;
};

HGData hg_from_linearization(const Mat& J, const Vec& x, const HGOptions& opts = {});

struct HGEmpiricalOptions {
  int grid_points = 4000;
  double window_fraction = 0.25;
  double residual_tol = 1e-3;
};

HGData hg_empirical(const VectorFieldModel& vf, const Vec& x, double horizon, const HGEmpiricalOptions& opts = {});

enum class OmegaKind { singleton, cycle, torus };

struct OmegaSet {
  OmegaKind kind = OmegaKind::singleton;
  std::vector<Vec> points;
  double min_norm = 0.0;
  double max_norm = 0.0;
  long cycle_length = 1;

  double spread() const { return max_norm > 0.0 ? (max_norm - min_norm) / max_norm : 0.0; }
};

const char* to_string(OmegaKind k);

// q with |x - p/q| <= tol for some p and q <= max_den, or 0.
long rational_denominator(double x, long max_den = 1000, double tol = 1e-9);

OmegaSet omega_set(const HGData& hg, int n_samples = 4096, const std::optional<Mat>& M = std::nullopt,
                   double offset = 0.5);

enum class GrowthVerdict { profile_sufficient, profile_refuted, undetermined };

struct NormalGrowth {
  bool orthogonal = true;
  bool equal_norms = true;
  GrowthVerdict verdict = GrowthVerdict::profile_sufficient;
};

const char* to_string(GrowthVerdict v);
NormalGrowth normal_growth(const HGData& hg, double tol = 1e-8);

struct CutoffSchedule {
  double eps = 0.0;
  double t_eps = 0.0;
  double w_eps = 0.0;
  std::vector<double> deltas;
  std::vector<double> probe_times;
};

std::vector<double> default_delta_grid();
CutoffSchedule cutoff_schedule(const HGData& hg, double eps, const std::vector<double>& deltas = default_delta_grid());
double cutoff_time(double lambda, int ell, double eps);

enum class ProfileVerdict { profile, window_only, undetermined };

struct ZinfModel {
  bool rotationally_invariant = true;
  std::optional<Mat> M;
};

const char* to_string(ProfileVerdict v);
ProfileVerdict profile_exists(const HGData& hg, const OmegaSet& omega, const ZinfModel& zinf, double tol = 1e-6);

}  // namespace cutoff
