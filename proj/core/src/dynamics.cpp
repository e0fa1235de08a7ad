#include "cutoff/dynamics.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "cutoff/errors.hpp"

namespace cutoff {

namespace odeint = boost::numeric::odeint;

namespace {

double bump_value(const GaussianBump& e, const Vec& x) {
  return e.kappa * std::exp(-0.5 * x.squaredNorm() / (e.width * e.width));
}

Vec bump_gradient(const GaussianBump& e, const Vec& x) {
  if (e.kappa == 0.0) return Vec::Zero(x.size());
  const double s2 = e.width * e.width;
  return -(bump_value(e, x) / s2) * x;
}

Mat bump_hessian(const GaussianBump& e, const Vec& x) {
  const int d = static_cast<int>(x.size());
  if (e.kappa == 0.0) return Mat::Zero(d, d);
  const double s2 = e.width * e.width;
  const double v = bump_value(e, x);
  return v * (x * x.transpose() / (s2 * s2) - Mat::Identity(d, d) / s2);
}

// Lower bound of the smallest Hessian eigenvalue of the bump over R^d.
double bump_curvature_floor(const GaussianBump& e) {
  if (e.kappa == 0.0) return 0.0;
  const double s2 = e.width * e.width;
  if (e.kappa > 0.0) return -e.kappa / s2;
  return e.kappa / s2 * 2.0 * std::exp(-1.5);
}

double sym_min_eig(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()));
  return es.eigenvalues()(0);
}

double spectral_norm(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues()(0);
}

// Point set on the ball |u| <= radius: Halton points plus a ring on the sphere.
std::vector<Vec> ball_points(int d, double radius, int n) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  std::vector<Vec> pts;
  pts.push_back(Vec::Zero(d));
  auto radical_inverse = [](long i, int b) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
      f /= b;
      r += f * (i % b);
      i /= b;
    }
    return r;
  };
  long i = 1;
  while (static_cast<int>(pts.size()) < n + 1 && i < 100L * n) {
    Vec u(d);
    for (int k = 0; k < d; ++k) u(k) = 2.0 * radical_inverse(i, primes[k % 12]) - 1.0;
    ++i;
    if (u.squaredNorm() <= 1.0) pts.push_back(radius * u);
  }
  const int ring = d == 1 ? 2 : 64;
  for (int j = 0; j < ring; ++j) {
    Vec u = Vec::Zero(d);
    if (d == 1) {
      u(0) = j == 0 ? radius : -radius;
    } else {
      const double a = 2.0 * std::numbers::pi * j / ring;
      u(0) = std::cos(a);
      u(1) = std::sin(a);
      for (int k = 2; k < d; ++k) u(k) = radical_inverse(j + 1, primes[k % 12]) - 0.5;
      u *= radius / u.norm();
    }
    pts.push_back(u);
  }
  return pts;
}

}  // namespace

const char* to_string(FieldKind k) {
  switch (k) {
    case FieldKind::linear: return "linear";
    case FieldKind::fput: return "fput";
    case FieldKind::oscillator: return "oscillator";
    case FieldKind::custom: return "custom";
  }
  return "?";
}

void VectorFieldModel::check_fixed_point() const {
  const Vec b0 = b_(Vec::Zero(dim_));
  if (b0.size() != dim_) throw DimensionMismatch("drift returns wrong dimension");
  if (b0.norm() > 1e-12) throw InvalidParameter("vector field must vanish at the origin");
}

VectorFieldModel VectorFieldModel::linear(const Mat& Q) {
  if (Q.rows() != Q.cols() || Q.rows() < 1) throw DimensionMismatch("Q must be square");
  VectorFieldModel vf;
  vf.dim_ = static_cast<int>(Q.rows());
  vf.kind_ = FieldKind::linear;
  vf.name_ = "linear";
  vf.delta_ = sym_min_eig(Q);
  vf.b_ = [Q](const Vec& x) { return Vec(Q * x); };
  vf.Db_ = [Q](const Vec&) { return Q; };
  std::vector<std::vector<double>> rows(Q.rows());
  for (int i = 0; i < Q.rows(); ++i) {
    for (int j = 0; j < Q.cols(); ++j) rows[i].push_back(Q(i, j));
  }
  vf.params_ = {{"Q", rows}};
  vf.check_fixed_point();
  return vf;
}

VectorFieldModel VectorFieldModel::fput(const Mat& A, const Mat& B, const GaussianBump& eta) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows()) {
    throw DimensionMismatch("A and B must be square of equal size");
  }
  if (!(eta.width > 0.0)) throw InvalidParameter("bump width must be positive");
  VectorFieldModel vf;
  vf.dim_ = static_cast<int>(A.rows());
  vf.kind_ = FieldKind::fput;
  vf.name_ = "fput";
  const Mat AtA = A.transpose() * A;
  const Mat BtB = B.transpose() * B;
  vf.delta_ = sym_min_eig(AtA) + bump_curvature_floor(eta);
  vf.b_ = [AtA, BtB, B, eta](const Vec& x) {
    const double q = (B * x).squaredNorm();
    return Vec(AtA * x + q * (BtB * x) + bump_gradient(eta, x));
  };
  vf.Db_ = [AtA, BtB, B, eta](const Vec& x) {
    const double q = (B * x).squaredNorm();
    const Vec w = BtB * x;
    return Mat(AtA + q * BtB + 2.0 * w * w.transpose() + bump_hessian(eta, x));
  };
  vf.params_ = {{"eta_kappa", eta.kappa}, {"eta_width", eta.width}};
  vf.check_fixed_point();
  return vf;
}

VectorFieldModel VectorFieldModel::oscillator(double d1, double d2, double eta, const OscillatorPotential& G) {
  if (!(d1 > 0.0 && d2 > 0.0)) throw InvalidParameter("delta1 and delta2 must be positive");
  if (G.quartic < 0.0) throw InvalidParameter("quartic coefficient must be non-negative");
  if (!(G.well.width > 0.0)) throw InvalidParameter("well width must be positive");
  VectorFieldModel vf;
  vf.dim_ = 2;
  vf.kind_ = FieldKind::oscillator;
  vf.name_ = "oscillator";
  const double delta3 = -(G.a + bump_curvature_floor(G.well));
  vf.delta_ = 2.0 * std::min(d1, d2) - delta3;
  auto gradG = [G](const Vec& x) {
    return Vec(G.a * x + G.quartic * x.squaredNorm() * x + bump_gradient(G.well, x));
  };
  auto hessG = [G](const Vec& x) {
    return Mat(G.a * Mat::Identity(2, 2) +
               G.quartic * (x.squaredNorm() * Mat::Identity(2, 2) + 2.0 * x * x.transpose()) +
               bump_hessian(G.well, x));
  };
  vf.b_ = [=](const Vec& x) {
    const Vec g = gradG(x);
    Vec out(2);
    out(0) = eta * x(1) + 2.0 * d1 * x(0) + g(0);
    out(1) = -eta * x(0) + 2.0 * d2 * x(1) + g(1);
    return out;
  };
  vf.Db_ = [=](const Vec& x) {
    Mat J(2, 2);
    J << 2.0 * d1, eta, -eta, 2.0 * d2;
    return Mat(J + hessG(x));
  };
  vf.params_ = {{"delta1", d1}, {"delta2", d2}, {"eta", eta}, {"a", G.a}, {"quartic", G.quartic},
                {"well_kappa", G.well.kappa}, {"well_width", G.well.width}, {"delta3", delta3}};
  vf.check_fixed_point();
  return vf;
}

VectorFieldModel VectorFieldModel::custom(int dim, DriftFn b, JacobianFn Db, double delta, std::string name) {
  if (dim < 1) throw InvalidParameter("dimension must be positive");
  if (!b || !Db) throw InvalidParameter("custom field needs drift and Jacobian");
  VectorFieldModel vf;
  vf.dim_ = dim;
  vf.kind_ = FieldKind::custom;
  vf.name_ = std::move(name);
  vf.delta_ = delta;
  vf.b_ = std::move(b);
  vf.Db_ = std::move(Db);
  vf.check_fixed_point();
  return vf;
}

VectorFieldModel VectorFieldModel::with_declared_delta(double delta) const {
  VectorFieldModel vf = *this;
  vf.delta_ = delta;
  return vf;
}

Evaluation evaluate(const VectorFieldModel& vf, const Vec& x) {
  if (x.size() != vf.dim()) throw DimensionMismatch("point has wrong dimension");
  if (!x.allFinite()) throw InvalidParameter("point must be finite");
  return {vf.b(x), vf.Db(x)};
}

CoercivityReport coercivity_audit(const VectorFieldModel& vf, double radius, int n, RngStream& rng, double tol) {
  if (!(radius > 0.0)) throw InvalidParameter("radius must be positive");
  if (n < 1) throw InvalidParameter("sample count must be positive");
  const int d = vf.dim();
  auto ball = [&]() {
    Vec v(d);
    for (int k = 0; k < d; ++k) v(k) = rng.normal();
    v *= radius * std::pow(rng.uniform(), 1.0 / d) / v.norm();
    return v;
  };
  CoercivityReport rep;
  rep.declared_delta = vf.delta();
  rep.min_quadratic = INFINITY;
  rep.min_monotone = INFINITY;
  for (int i = 0; i < n; ++i) {
    const Vec x = ball();
    Vec y(d);
    for (int k = 0; k < d; ++k) y(k) = rng.normal();
    y.normalize();
    rep.min_quadratic = std::min(rep.min_quadratic, y.dot(vf.Db(x) * y));
    const Vec x2 = ball();
    const Vec dx = x - x2;
    if (dx.squaredNorm() > 0.0) {
      rep.min_monotone = std::min(rep.min_monotone, (vf.b(x) - vf.b(x2)).dot(dx) / dx.squaredNorm());
    }
  }
  const double need = vf.delta() * (1.0 - tol);
  rep.pass = vf.delta() > 0.0 && rep.min_quadratic >= need && rep.min_monotone >= need;
  return rep;
}

std::vector<std::vector<double>> integrate_ode(const OdeRhs& rhs, std::vector<double> y, double t0,
                                               const std::vector<double>& times, const OdeTolerance& tol,
                                               OdeStats* stats) {
  using State = std::vector<double>;
  auto stepper = odeint::make_controlled(tol.abs, tol.rel, odeint::runge_kutta_dopri5<State>());
  std::vector<State> out;
  out.reserve(times.size());
  double t = t0;
  double dt = 1e-3;
  OdeStats local;
  for (double target : times) {
    if (target < t - 1e-14 * std::max(1.0, std::abs(t))) throw InvalidParameter("time grid must be increasing");
    while (t < target) {
      double step = std::min(dt, target - t);
      const bool clamped = step < dt;
      const odeint::controlled_step_result res = stepper.try_step(rhs, y, t, step);
      if (res == odeint::success) {
        ++local.steps;
        dt = clamped ? std::max(dt, step) : step;
      } else {
        ++local.rejected;
        dt = step;
      }
      if (dt < 1e-13 * std::max(1.0, std::abs(t))) {
        throw StiffnessError("step size underflow in the flow integrator", t, dt);
      }
      if (target - t < 1e-15 * std::max(1.0, std::abs(target))) t = target;
    }
    out.push_back(y);
  }
  if (stats) *stats = local;
  return out;
}

namespace {

OdeRhs flow_rhs(const VectorFieldModel& vf) {
  const int d = vf.dim();
  return [&vf, d](const std::vector<double>& y, std::vector<double>& dy, double) {
    const Vec b = vf.b(Eigen::Map<const Vec>(y.data(), d));
    for (int i = 0; i < d; ++i) dy[i] = -b(i);
  };
}

}  // namespace

FlowResult flow(const VectorFieldModel& vf, const Vec& x, double t, const OdeTolerance& tol) {
  if (x.size() != vf.dim()) throw DimensionMismatch("initial point has wrong dimension");
  if (!(t >= 0.0)) throw InvalidParameter("horizon must be non-negative");
  FlowResult r;
  r.x = x;
  r.t = t;
  if (x.norm() == 0.0 || t == 0.0) {
    r.phi = x;
    return r;
  }
  OdeStats st;
  const auto ys = integrate_ode(flow_rhs(vf), std::vector<double>(x.data(), x.data() + x.size()), 0.0, {t}, tol, &st);
  r.phi = Eigen::Map<const Vec>(ys.back().data(), vf.dim());
  r.steps = st.steps;
  r.rejected = st.rejected;
  r.error_estimate = static_cast<double>(st.steps) * (tol.abs + tol.rel * x.norm());
  r.decay_ok = r.phi.norm() <= std::exp(-vf.delta() * t) * x.norm() * (1.0 + 10.0 * tol.rel) + r.error_estimate;
  return r;
}

std::vector<Vec> flow_grid(const VectorFieldModel& vf, const Vec& x, const std::vector<double>& times,
                           const OdeTolerance& tol) {
  if (x.size() != vf.dim()) throw DimensionMismatch("initial point has wrong dimension");
  std::vector<Vec> out;
  if (x.norm() == 0.0) {
    out.assign(times.size(), x);
    return out;
  }
  const auto ys = integrate_ode(flow_rhs(vf), std::vector<double>(x.data(), x.data() + x.size()), 0.0, times, tol);
  for (const auto& y : ys) out.emplace_back(Eigen::Map<const Vec>(y.data(), vf.dim()));
  return out;
}

FundamentalSequence fundamental_matrix(const VectorFieldModel& vf, const Vec& x, double T,
                                       const std::vector<double>& t_grid, const OdeTolerance& tol) {
  if (t_grid.empty() || t_grid.front() < 0.0) throw InvalidParameter("time grid must start at or after 0");
  const int d = vf.dim();
  const Vec start = flow(vf, x, T, tol).phi;
  std::vector<double> y0(d + 2 * d * d, 0.0);
  for (int i = 0; i < d; ++i) y0[i] = start(i);
  Eigen::Map<Mat>(y0.data() + d, d, d).setIdentity();
  Eigen::Map<Mat>(y0.data() + d + d * d, d, d).setIdentity();
  OdeRhs rhs = [&vf, d](const std::vector<double>& y, std::vector<double>& dy, double) {
    const Eigen::Map<const Vec> p(y.data(), d);
    const Eigen::Map<const Mat> P(y.data() + d, d, d);
    const Eigen::Map<const Mat> Pi(y.data() + d + d * d, d, d);
    const Vec b = vf.b(p);
    const Mat J = vf.Db(p);
    for (int i = 0; i < d; ++i) dy[i] = -b(i);
    Eigen::Map<Mat>(dy.data() + d, d, d) = P * J;
    Eigen::Map<Mat>(dy.data() + d + d * d, d, d) = -J * Pi;
  };
  const auto ys = integrate_ode(rhs, y0, 0.0, t_grid, tol);
  FundamentalSequence seq;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    FundamentalMatrix fm;
    fm.T = T;
    fm.t = t_grid[k];
    fm.phi = Eigen::Map<const Vec>(ys[k].data(), d);
    fm.Phi = Eigen::Map<const Mat>(ys[k].data() + d, d, d);
    fm.Phi_inv = Eigen::Map<const Mat>(ys[k].data() + d + d * d, d, d);
    fm.condition = spectral_norm(fm.Phi) * spectral_norm(fm.Phi_inv);
    if (fm.condition > 1e8) {
      seq.warnings.push_back("fundamental matrix condition number " + std::to_string(fm.condition) + " at t = " +
                             std::to_string(fm.t));
    }
    seq.entries.push_back(std::move(fm));
  }
  return seq;
}

double jacobian_sup(const VectorFieldModel& vf, double radius, int n) {
  double best = 0.0;
  for (const Vec& u : ball_points(vf.dim(), radius, n)) best = std::max(best, spectral_norm(vf.Db(u)));
  return best;
}

double jacobian_lipschitz(const VectorFieldModel& vf, double radius, int n) {
  const auto pts = ball_points(vf.dim(), radius, n);
  std::vector<Mat> J;
  J.reserve(pts.size());
  for (const Vec& u : pts) J.push_back(vf.Db(u));
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double dist = (pts[i] - pts[j]).norm();
      if (dist > 1e-12) best = std::max(best, (J[i] - J[j]).norm() / dist);
    }
  }
  return best;
}

MatrixBoundReport matrix_bound_audit(const VectorFieldModel& vf, int n_triples, RngStream& rng,
                                     const MatrixBoundOptions& opts) {
  const int d = vf.dim();
  const double delta = vf.delta();
  if (!(delta > 0.0)) throw InvalidParameter("matrix bounds need a positive coercivity constant");
  const Mat J = vf.linear_part();
  OdeTolerance tight{1e-13, 1e-12};
  MatrixBoundReport rep;
  for (int i = 0; i < n_triples; ++i) {
    Vec x(d);
    for (int k = 0; k < d; ++k) x(k) = rng.normal();
    x *= opts.radius * std::pow(rng.uniform(), 1.0 / d) / x.norm();
    const double T = opts.max_offset * rng.uniform();
    double s = opts.max_time * rng.uniform();
    double t = opts.max_time * rng.uniform();
    if (s > t) std::swap(s, t);
    const double xn = x.norm();
    const double C_sup = opts.safety * jacobian_sup(vf, xn, 128);
    const double C_v = std::max(C_sup, opts.safety * jacobian_lipschitz(vf, xn, 128));
    const auto seq = fundamental_matrix(vf, x, T, {s, t}, tight);
    for (const auto& w : seq.warnings) rep.warnings.push_back(w);
    const auto& Fs = seq.entries[0];
    const auto& Ft = seq.entries[1];
    const double sd = std::sqrt(static_cast<double>(d));
    const double lhs_i = spectral_norm(Ft.Phi_inv * Fs.Phi);
    const double rhs_i = sd * std::exp(-delta * (t - s));
    const double lhs_ii = spectral_norm(Fs.Phi_inv * Ft.Phi);
    const double rhs_ii = sd * std::exp(C_sup * (t - s));
    const Mat lin = Mat((-J * (t - s)).exp());
    const double lhs_v = std::pow(spectral_norm(Ft.Phi_inv * Fs.Phi - lin), 2);
    const double phiT = flow(vf, x, T, tight).phi.norm();
    const double rhs_v = C_v * C_v * d * d * d / (4.0 * delta * delta) * phiT * phiT * std::exp(-delta * t);
    auto ratio = [](double l, double r) { return r > 0.0 ? l / r : (l > 0.0 ? INFINITY : 0.0); };
    rep.max_ratio_i = std::max(rep.max_ratio_i, ratio(lhs_i, rhs_i));
    rep.max_ratio_ii = std::max(rep.max_ratio_ii, ratio(lhs_ii, rhs_ii));
    rep.max_ratio_v = std::max(rep.max_ratio_v, ratio(lhs_v, rhs_v));
    if (lhs_i > rhs_i * (1.0 + opts.tol)) ++rep.violations_i;
    if (lhs_ii > rhs_ii * (1.0 + opts.tol)) ++rep.violations_ii;
    if (lhs_v > rhs_v * (1.0 + opts.tol) + 1e-24) ++rep.violations_v;
    ++rep.triples;
  }
  return rep;
}

}  // namespace cutoff
