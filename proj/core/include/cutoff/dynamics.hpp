#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cutoff/linalg.hpp"
#include "cutoff/rng.hpp"

namespace cutoff {

enum class FieldKind { linear, fput, oscillator, custom };

// Gaussian bump kappa * exp(-|x|^2 / (2 width^2)).
struct GaussianBump {
  double kappa = 0.0;
  double width = 1.0;
};

// G(x) = (a/2)|x|^2 + (quartic/4)|x|^4 + bump(x).
struct OscillatorPotential {
  double a = 0.0;
  double quartic = 0.0;
  GaussianBump well;
};

class VectorFieldModel {
 public:
  using DriftFn = std::function<Vec(const Vec&)>;
  using JacobianFn = std::function<Mat(const Vec&)>;

  static VectorFieldModel linear(const Mat& Q);
  // b(x) = A^T A x + |Bx|^2 B^T B x + grad eta(x).
  static VectorFieldModel fput(const Mat& A, const Mat& B, const GaussianBump& eta = {});
  // b = (eta x2 + d1 H, -eta x1 + d2 H), H = delta1 x1^2 + delta2 x2^2 + G.
  static VectorFieldModel oscillator(double delta1, double delta2, double eta, const OscillatorPotential& G = {});
  static VectorFieldModel custom(int dim, DriftFn b, JacobianFn Db, double delta, std::string name = "custom");

  int dim() const { return dim_; }
  double delta() const { return delta_; }
  FieldKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const nlohmann::json& params() const { return params_; }

  Vec b(const Vec& x) const { return b_(x); }
  Mat Db(const Vec& x) const { return Db_(x); }
  Mat linear_part() const { return Db_(Vec::Zero(dim_)); }

  // Same field with a different declared coercivity constant.
  VectorFieldModel with_declared_delta(double delta) const;

 private:
  VectorFieldModel() = default;
  void check_fixed_point() const;

  int dim_ = 1;
  double delta_ = 0.0;
  FieldKind kind_ = FieldKind::custom;
  std::string name_;
  nlohmann::json params_ = nlohmann::json::object();
  DriftFn b_;
  JacobianFn Db_;
};

const char* to_string(FieldKind k);

struct Evaluation {
  Vec b;
  Mat Db;
};

Evaluation evaluate(const VectorFieldModel& vf, const Vec& x);

struct CoercivityReport {
  double min_quadratic = 0.0;
  double min_monotone = 0.0;
  double declared_delta = 0.0;
  bool pass = false;
};

CoercivityReport coercivity_audit(const VectorFieldModel& vf, double radius, int n, RngStream& rng,
                                  double tol = 1e-9);

struct OdeTolerance {
  double abs = 1e-10;
  double rel = 1e-8;
};

struct FlowResult {
  Vec x;
  double t = 0.0;
  Vec phi;
  long steps = 0;
  long rejected = 0;
  double error_estimate = 0.0;
  bool decay_ok = true;
};

using OdeRhs = std::function<void(const std::vector<double>&, std::vector<double>&, double)>;

struct OdeStats {
  long steps = 0;
  long rejected = 0;
};

// Adaptive Dormand-Prince 5(4); returns the state at every time of an increasing grid (times >= t0).
std::vector<std::vector<double>> integrate_ode(const OdeRhs& rhs, std::vector<double> y0, double t0,
                                               const std::vector<double>& times, const OdeTolerance& tol,
                                               OdeStats* stats = nullptr);

FlowResult flow(const VectorFieldModel& vf, const Vec& x, double t, const OdeTolerance& tol = {});
// Flow evaluated at each time of an increasing grid starting at or after 0.
std::vector<Vec> flow_grid(const VectorFieldModel& vf, const Vec& x, const std::vector<double>& times,
                           const OdeTolerance& tol = {});

struct FundamentalMatrix {
  double T = 0.0;
  double t = 0.0;
  Vec phi;  // phi^x_{T+t}
  Mat Phi;
  Mat Phi_inv;
  double condition = 1.0;
};

struct FundamentalSequence {
  std::vector<FundamentalMatrix> entries;
  std::vector<std::string> warnings;
};

// dPhi/dt = Phi Db(phi^x_{T+t}), dPhi^{-1}/dt = -Db(phi^x_{T+t}) Phi^{-1}, both identity at t = 0.
FundamentalSequence fundamental_matrix(const VectorFieldModel& vf, const Vec& x, double T,
                                       const std::vector<double>& t_grid, const OdeTolerance& tol = {});

// Sampled sup of the spectral norm of Db over the ball |u| <= radius (512 Halton points plus the sphere).
double jacobian_sup(const VectorFieldModel& vf, double radius, int n = 512);
// Sampled Lipschitz constant of Db (Frobenius) over the ball |u| <= radius.
double jacobian_lipschitz(const VectorFieldModel& vf, double radius, int n = 512);

struct MatrixBoundReport {
  long triples = 0;
  long violations_i = 0;
  long violations_ii = 0;
  long violations_v = 0;
  double max_ratio_i = 0.0;
  double max_ratio_ii = 0.0;
  double max_ratio_v = 0.0;
  std::vector<std::string> warnings;
};

struct MatrixBoundOptions {
  double radius = 2.0;
  double max_offset = 2.0;
  double max_time = 4.0;
  double tol = 1e-8;
  double safety = 1.1;
};

// Checks the decay bounds of the fundamental matrix on random (x, s, t) triples.
MatrixBoundReport matrix_bound_audit(const VectorFieldModel& vf, int n_triples, RngStream& rng,
                                     const MatrixBoundOptions& opts = {});

}  // namespace cutoff
