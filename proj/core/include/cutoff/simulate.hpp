#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cutoff/dynamics.hpp"
#include "cutoff/levy_model.hpp"
#include "cutoff/linalg.hpp"
#include "cutoff/rng.hpp"
#include "cutoff/sampling.hpp"

namespace cutoff {

enum class ProcessTag { X, Y, Z, Zinf };
enum class Scheme { euler, strang };

const char* to_string(ProcessTag t);
const char* to_string(Scheme s);

struct SimOptions {
  double dt = 1e-2;
  Scheme scheme = Scheme::euler;
  // Runs sharing a stream tag (and master seed) consume identical increments.
  std::uint64_t stream_tag = 0;
  // Threads for the path loop; 0 keeps the runtime default.
  int threads = 0;
  double overflow_guard = 1e100;
  // Drift substeps keep h * |Db(X)| below this value.
  double substep_limit = 0.5;
  // Cutoff window w_eps; when set, dt must not exceed w_eps / 50.
  std::optional<double> window;
  // Record sup_t |X_t - phi_t| per path against the noiseless scheme.
  bool track_sup_deviation = false;
  LlslOptions increments;
};

struct PathEnsemble {
  ProcessTag tag = ProcessTag::X;
  double eps = 0.0;
  Vec x;
  std::vector<double> t_grid;
  double dt = 0.0;
  int n = 0;
  // One dim x n matrix per time of t_grid (a single matrix for Zinf).
  std::vector<Mat> endpoints;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::euler;
  std::vector<double> sup_deviation;
};

PathEnsemble simulate_X(const VectorFieldModel& vf, const LevyMeasureSpec& spec, double eps, const Vec& x,
                        const std::vector<double>& t_grid, int n, RngStream& rng, const SimOptions& opts = {});

// phi^x_t + eps Y^x_t with Y the linearization along the flow.
PathEnsemble simulate_Y_first_order(const VectorFieldModel& vf, const LevyMeasureSpec& spec, double eps,
                                    const Vec& x, const std::vector<double>& t_grid, int n, RngStream& rng,
                                    const SimOptions& opts = {});

struct CoupledEnsembles {
  PathEnsemble X;
  PathEnsemble Y;
  double max_gap = 0.0;
};

// X and Y driven by the same increments.
CoupledEnsembles simulate_coupled(const VectorFieldModel& vf, const LevyMeasureSpec& spec, double eps,
                                  const Vec& x, const std::vector<double>& t_grid, int n, RngStream& rng,
                                  const SimOptions& opts = {});

enum class ZinfMethod { simulate, exact_if_available };

// eps * Z_inf for dZ = -J Z dt + dL, by simulation from 0 to T* with e^{-delta_J T*} < tol.
PathEnsemble simulate_Z_stationary(const Mat& J, const LevyMeasureSpec& spec, double eps, int n, RngStream& rng,
                                   double tol = 1e-8, const SimOptions& opts = {},
                                   ZinfMethod method = ZinfMethod::simulate);

struct EquilibriumPair {
  Mat longrun;   // X^eps_H from x
  Mat linear;    // eps Z_H from 0 with the same increments
  double horizon = 0.0;
};

EquilibriumPair simulate_equilibrium_pair(const VectorFieldModel& vf, const LevyMeasureSpec& spec, double eps,
                                          const Vec& x, double horizon, int n, RngStream& rng,
                                          const SimOptions& opts = {});

struct GapStats {
  double probability = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double threshold = 0.0;
  double t = 0.0;
  int n = 0;
  long exceed = 0;
  double mean_gap = 0.0;
};

// Wilson score interval at 95%.
void wilson_interval(long successes, long n, double& lo, double& hi);

// Default threshold Delta_eps^{1/alpha} eps with Delta_eps = eps^{alpha/2}.
double default_gap_threshold(double eps, double alpha);

GapStats fw_gap_stats(const VectorFieldModel& vf, const LevyMeasureSpec& spec, double eps, const Vec& x, double t,
                      int n, std::optional<double> threshold, RngStream& rng, const SimOptions& opts = {});

struct MomentRow {
  double t = 0.0;
  double moment = 0.0;
  double ci = 0.0;
  double bound = 0.0;
  bool ok = true;
};

struct MomentAudit {
  double gamma = 0.0;
  double C = 0.0;
  bool clamped = false;
  std::vector<MomentRow> rows;
  bool pass = false;
  std::string note;
};

// E|X_t|^gamma at every ensemble time.
std::vector<std::pair<double, double>> empirical_moments(const PathEnsemble& ens, double gamma);

// Plateau constant C with E|X_t|^gamma <= C eps^gamma from a run started at 0.
double calibrate_moment_constant(const VectorFieldModel& vf, const LevyMeasureSpec& spec, double eps, double gamma,
                                 double horizon, int n, RngStream& rng, const SimOptions& opts = {});

MomentAudit moment_audit(const PathEnsemble& ens, double gamma, const VectorFieldModel& vf, double eps, double C,
                         double beta);

}  // namespace cutoff
