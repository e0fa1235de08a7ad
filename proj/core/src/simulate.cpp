#include "cutoff/simulate.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>

#include "cutoff/errors.hpp"

namespace cutoff {

const char* to_string(ProcessTag t) {
  switch (t) {
    case ProcessTag::X: return "X";
    case ProcessTag::Y: return "Y";
    case ProcessTag::Z: return "Z";
    case ProcessTag::Zinf: return "Zinf";
  }
  return "?";
}

const char* to_string(Scheme s) { return s == Scheme::euler ? "euler" : "strang"; }

namespace {

double row_sum_norm(const Mat& J) { return J.cwiseAbs().rowwise().sum().maxCoeff(); }

// Noiseless part of one scheme step, with substeps so that s * |Db| stays below the limit.
class DriftMap {
 public:
  DriftMap(const VectorFieldModel& vf, Scheme scheme, double limit)
      : vf_(vf), scheme_(scheme), limit_(limit), constant_(vf.kind() == FieldKind::linear) {
    if (constant_) const_norm_ = row_sum_norm(vf.linear_part());
  }

  void advance(Vec& X, double h) const {
    double left = h;
    while (left > 0.0) {
      const double s = substep(X, left);
      if (scheme_ == Scheme::euler) {
        X -= s * vf_.b(X);
      } else {
        const Vec k1 = -vf_.b(X);
        const Vec k2 = -vf_.b(X + 0.5 * s * k1);
        const Vec k3 = -vf_.b(X + 0.5 * s * k2);
        const Vec k4 = -vf_.b(X + s * k3);
        X += (s / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      left -= s;
    }
  }

  // Flow together with its linearization Y along the flow.
  void advance_joint(Vec& phi, Vec& Y, double h) const {
    double left = h;
    while (left > 0.0) {
      const double s = substep(phi, left);
      if (scheme_ == Scheme::euler) {
        const Mat J = vf_.Db(phi);
        phi -= s * vf_.b(phi);
        Y -= s * (J * Y);
      } else {
        const Vec p2 = phi;
        const Vec a1 = -vf_.b(p2);
        const Vec c1 = -(vf_.Db(p2) * Y);
        const Vec p3 = p2 + 0.5 * s * a1;
        const Vec y3 = Y + 0.5 * s * c1;
        const Vec a2 = -vf_.b(p3);
        const Vec c2 = -(vf_.Db(p3) * y3);
        const Vec p4 = p2 + 0.5 * s * a2;
        const Vec y4 = Y + 0.5 * s * c2;
        const Vec a3 = -vf_.b(p4);
        const Vec c3 = -(vf_.Db(p4) * y4);
        const Vec p5 = p2 + s * a3;
        const Vec y5 = Y + s * c3;
        const Vec a4 = -vf_.b(p5);
        const Vec c4 = -(vf_.Db(p5) * y5);
        phi += (s / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        Y += (s / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
      }
      left -= s;
    }
  }

 private:
  double substep(const Vec& X, double left) const {
    const double nrm = constant_ ? const_norm_ : row_sum_norm(vf_.Db(X));
    if (!(nrm > 0.0) || left * nrm <= limit_) return left;
    const double m = std::ceil(left * nrm / limit_);
    return left / m;
  }

  const VectorFieldModel& vf_;
  Scheme scheme_;
  double limit_;
  bool constant_;
  double const_norm_ = 0.0;
};

struct Segment {
  long steps = 0;
  double remainder = 0.0;
  int sampler = -1;
};

// Full steps and exact remainders between consecutive grid times.
struct StepPlan {
  std::vector<Segment> segments;
  std::vector<IncrementSampler> samplers;  // samplers[0] has step dt
};

StepPlan make_plan(const LevyMeasureSpec& spec, const std::vector<double>& t_grid, const SimOptions& opts) {
  if (!(opts.dt > 0.0)) throw InvalidParameter("dt must be positive");
  if (opts.window && opts.dt > *opts.window / 50.0 * (1.0 + 1e-12)) {
    throw InvalidParameter("dt exceeds w_eps / 50");
  }
  StepPlan plan;
  plan.samplers.emplace_back(spec, opts.dt, opts.increments);
  std::map<double, int> by_rem;
  double prev = 0.0;
  for (double t : t_grid) {
    if (!(t >= prev)) throw InvalidParameter("time grid must be non-decreasing and non-negative");
    const double span = t - prev;
    Segment seg;
    seg.steps = static_cast<long>(std::floor(span / opts.dt + 1e-9));
    seg.remainder = span - seg.steps * opts.dt;
    if (seg.remainder <= 1e-9 * opts.dt) {
      seg.remainder = 0.0;
    } else {
      auto it = by_rem.find(seg.remainder);
      if (it == by_rem.end()) {
        plan.samplers.emplace_back(spec, seg.remainder, opts.increments);
        it = by_rem.emplace(seg.remainder, static_cast<int>(plan.samplers.size()) - 1).first;
      }
      seg.sampler = it->second;
    }
    plan.segments.push_back(seg);
    prev = t;
  }
  return plan;
}

// Runs body(path) over all paths; rethrows the error of the lowest failing path.
template <class Body>
void for_each_path(int n, int threads, Body&& body) {
  std::exception_ptr first;
  long first_path = -1;
  std::mutex m;
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
  for (int p = 0; p < n; ++p) {
    try {
      body(p);
    } catch (...) {
      std::lock_guard<std::mutex> lock(m);
      if (first_path < 0 || p < first_path) {
        first_path = p;
        first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

std::uint64_t path_seed(const RngStream& rng, const SimOptions& opts) {
  return derive_seed(rng.seed(), {rng.stream(), opts.stream_tag, 0x51AULL});
}

void guard(const Vec& X, const SimOptions& opts, std::uint64_t seed, long path) {
  if (!X.allFinite() || X.norm() > opts.overflow_guard) {
    throw DivergenceError("numerical blow-up of a simulated path", seed, path);
  }
}

void check_inputs(const VectorFieldModel& vf, const LevyMeasureSpec& spec, const Vec& x, int n) {
  if (spec.dim != vf.dim()) throw DimensionMismatch("noise and drift dimensions differ");
  if (x.size() != vf.dim()) throw DimensionMismatch("initial point has wrong dimension");
  if (n < 1) throw InvalidParameter("path count must be positive");
}

PathEnsemble make_ensemble(ProcessTag tag, double eps, const Vec& x, const std::vector<double>& t_grid, int n,
                           std::uint64_t seed, const SimOptions& opts) {
  PathEnsemble e;
  e.tag = tag;
  e.eps = eps;
  e.x = x;
  e.t_grid = t_grid;
  e.dt = opts.dt;
  e.n = n;
  e.seed = seed;
  e.scheme = opts.scheme;
  e.endpoints.assign(t_grid.size(), Mat(x.size(), n));
  return e;
}

}  // namespace

PathEnsemble simulate_X(const VectorFieldModel& vf, const LevyMeasureSpec& spec, double eps, const Vec& x,
                        const std::vector<double>& t_grid, int n, RngStream& rng, const SimOptions& opts) {
  check_inputs(vf, spec, x, n);
  const std::uint64_t seed = path_seed(rng, opts);
  PathEnsemble ens = make_ensemble(ProcessTag::X, eps, x, t_grid, n, seed, opts);
  if (eps == 0.0) {
    const auto phis = flow_grid(vf, x, t_grid);
    for (std::size_t k = 0; k < t_grid.size(); ++k) ens.endpoints[k] = phis[k].replicate(1, n);
    if (opts.track_sup_deviation) ens.sup_deviation.assign(n, 0.0);
    return ens;
  }
  const StepPlan plan = make_plan(spec, t_grid, opts);
  const DriftMap drift(vf, opts.scheme, opts.substep_limit);
  if (opts.track_sup_deviation) ens.sup_deviation.assign(n, 0.0);
  const int d = vf.dim();
  for_each_path(n, opts.threads, [&](int p) {
    RngStream r(seed, static_cast<std::uint64_t>(p));
    Vec X = x, phi = x, inc(d);
    double sup = 0.0;
    auto step = [&](const IncrementSampler& s, double h) {
      s.sample(r, inc);
      if (opts.scheme == Scheme::euler) {
        drift.advance(X, h);
        X += eps * inc;
      } else {
        drift.advance(X, 0.5 * h);
        X += eps * inc;
        drift.advance(X, 0.5 * h);
      }
      guard(X, opts, seed, p);
      if (opts.track_sup_deviation) {
        drift.advance(phi, h);
        sup = std::max(sup, (X - phi).norm());
      }
    };
    for (std::size_t k = 0; k < plan.segments.size(); ++k) {
      const Segment& seg = plan.segments[k];
      for (long i = 0; i < seg.steps; ++i) step(plan.samplers[0], opts.dt);
      if (seg.sampler >= 0) step(plan.samplers[seg.sampler], seg.remainder);
      ens.endpoints[k].col(p) = X;
    }
    if (opts.track_sup_deviation) ens.sup_deviation[p] = sup;
  });
  return ens;
}

CoupledEnsembles simulate_coupled(const VectorFieldModel& vf, const LevyMeasureSpec& spec, double eps,
                                  const Vec& x, const std::vector<double>& t_grid, int n, RngStream& rng,
                                  const SimOptions& opts) {
  check_inputs(vf, spec, x, n);
  const std::uint64_t seed = path_seed(rng, opts);
  CoupledEnsembles out;
  out.X = make_ensemble(ProcessTag::X, eps, x, t_grid, n, seed, opts);
  out.Y = make_ensemble(ProcessTag::Y, eps, x, t_grid, n, seed, opts);
  const StepPlan plan = make_plan(spec, t_grid, opts);
  const DriftMap drift(vf, opts.scheme, opts.substep_limit);
  const int d = vf.dim();
  std::vector<double> gaps(n, 0.0);
  for_each_path(n, opts.threads, [&](int p) {
    RngStream r(seed, static_cast<std::uint64_t>(p));
    Vec X = x, phi = x, Y = Vec::Zero(d), inc(d);
    double gap = 0.0;
    auto step = [&](const IncrementSampler& s, double h) {
      s.sample(r, inc);
      if (opts.scheme == Scheme::euler) {
        drift.advance(X, h);
        drift.advance_joint(phi, Y, h);
        X += eps * inc;
        Y += inc;
      } else {
        drift.advance(X, 0.5 * h);
        drift.advance_joint(phi, Y, 0.5 * h);
        X += eps * inc;
        Y += inc;
        drift.advance(X, 0.5 * h);
        drift.advance_joint(phi, Y, 0.5 * h);
      }
      guard(X, opts, seed, p);
      guard(Y, opts, seed, p);
      gap = std::max(gap, (X - phi - eps * Y).norm());
    };
    for (std::size_t k = 0; k < plan.segments.size(); ++k) {
      const Segment& seg = plan.segments[k];
      for (long i = 0; i < seg.steps; ++i) step(plan.samplers[0], opts.dt);
      if (seg.sampler >= 0) step(plan.samplers[seg.sampler], seg.remainder);
      out.X.endpoints[k].col(p) = X;
      out.Y.endpoints[k].col(p) = phi + eps * Y;
    }
    gaps[p] = gap;
  });
  out.max_gap = n > 0 ? *std::max_element(gaps.begin(), gaps.end()) : 0.0;
  return out;
}

PathEnsemble simulate_Y_first_order(const VectorFieldModel& vf, const LevyMeasureSpec& spec, double eps,
                                    const Vec& x, const std::vector<double>& t_grid, int n, RngStream& rng,
                                    const SimOptions& opts) {
  return simulate_coupled(vf, spec, eps, x, t_grid, n, rng, opts).Y;
}

PathEnsemble simulate_Z_stationary(const Mat& J, const LevyMeasureSpec& spec, double eps, int n, RngStream& rng,
                                   double tol, const SimOptions& opts, ZinfMethod method) {
  if (J.rows() != spec.dim || J.cols() != spec.dim) throw DimensionMismatch("J does not match the noise dimension");
  if (!(tol > 0.0 && tol < 1.0)) throw InvalidParameter("tolerance must lie in (0,1)");
  Eigen::ComplexEigenSolver<Mat> es(J);
  double dmin = INFINITY;
  for (int i = 0; i < J.rows(); ++i) dmin = std::min(dmin, es.eigenvalues()(i).real());
  if (!(dmin > 0.0)) throw DomainError("J must have eigenvalues with positive real parts");
  const int d = spec.dim;
  if (method == ZinfMethod::exact_if_available && spec.exactly_stable() && spec.symmetric()) {
    const Mat S = 0.5 * (J + J.transpose());
    const double c = S.trace() / d;
    const bool scalar = (S - c * Mat::Identity(d, d)).norm() <= 1e-12 * std::max(1.0, J.norm());
    const bool skew_free = (J - S).norm() <= 1e-12 * std::max(1.0, J.norm());
    StableLaw law = stable_limit(spec);
    if (scalar && (skew_free || law.isotropic)) {
      law.K /= spec.alpha * c;
      for (auto& f : law.factors) f.gamma /= spec.alpha * c;
      const StableSampler s(law, 1.0);
      const std::uint64_t seed = path_seed(rng, opts);
      PathEnsemble ens = make_ensemble(ProcessTag::Zinf, eps, Vec::Zero(d), {}, n, seed, opts);
      ens.endpoints.assign(1, Mat(d, n));
      for_each_path(n, opts.threads, [&](int p) {
        RngStream r(seed, static_cast<std::uint64_t>(p));
        Vec z(d);
        s.sample(r, z);
        ens.endpoints[0].col(p) = eps * z;
      });
      return ens;
    }
  }
  const double T = std::log(1.0 / tol) / dmin;
  const VectorFieldModel lin = VectorFieldModel::linear(J);
  PathEnsemble ens = simulate_X(lin, spec, eps, Vec::Zero(d), {T}, n, rng, opts);
  ens.tag = ProcessTag::Zinf;
  ens.t_grid.clear();
  return ens;
}

EquilibriumPair simulate_equilibrium_pair(const VectorFieldModel& vf, const LevyMeasureSpec& spec, double eps,
                                          const Vec& x, double horizon, int n, RngStream& rng,
                                          const SimOptions& opts) {
  check_inputs(vf, spec, x, n);
  const std::uint64_t seed = path_seed(rng, opts);
  const StepPlan plan = make_plan(spec, {horizon}, opts);
  const DriftMap drift(vf, opts.scheme, opts.substep_limit);
  const VectorFieldModel lin = VectorFieldModel::linear(vf.linear_part());
  const DriftMap drift_lin(lin, opts.scheme, opts.substep_limit);
  const int d = vf.dim();
  EquilibriumPair out;
  out.horizon = horizon;
  out.longrun.resize(d, n);
  out.linear.resize(d, n);
  for_each_path(n, opts.threads, [&](int p) {
    RngStream r(seed, static_cast<std::uint64_t>(p));
    Vec X = x, Z = Vec::Zero(d), inc(d);
    auto step = [&](const IncrementSampler& s, double h) {
      s.sample(r, inc);
      if (opts.scheme == Scheme::euler) {
        drift.advance(X, h);
        drift_lin.advance(Z, h);
        X += eps * inc;
        Z += eps * inc;
      } else {
        drift.advance(X, 0.5 * h);
        drift_lin.advance(Z, 0.5 * h);
        X += eps * inc;
        Z += eps * inc;
        drift.advance(X, 0.5 * h);
        drift_lin.advance(Z, 0.5 * h);
      }
      guard(X, opts, seed, p);
    };
    const Segment& seg = plan.segments[0];
    for (long i = 0; i < seg.steps; ++i) step(plan.samplers[0], opts.dt);
    if (seg.sampler >= 0) step(plan.samplers[seg.sampler], seg.remainder);
    out.longrun.col(p) = X;
    out.linear.col(p) = Z;
  });
  return out;
}

void wilson_interval(long k, long n, double& lo, double& hi) {
  if (n <= 0) {
    lo = 0.0;
    hi = 1.0;
    return;
  }
  const double z = 1.96;
  const double p = static_cast<double>(k) / n;
  const double den = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / den;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * static_cast<double>(n))) / den;
  lo = std::max(0.0, centre - half);
  hi = std::min(1.0, centre + half);
}

double default_gap_threshold(double eps, double alpha) {
  const double window = std::pow(eps, alpha / 2.0);
  return std::pow(window, 1.0 / alpha) * eps;
}

GapStats fw_gap_stats(const VectorFieldModel& vf, const LevyMeasureSpec& spec, double eps, const Vec& x, double t,
                      int n, std::optional<double> threshold, RngStream& rng, const SimOptions& opts) {
  if (!(t >= 0.0)) throw InvalidParameter("time must be non-negative");
  const CoupledEnsembles c = simulate_coupled(vf, spec, eps, x, {t}, n, rng, opts);
  GapStats g;
  g.t = t;
  g.n = n;
  g.threshold = threshold ? *threshold : default_gap_threshold(eps, spec.alpha);
  double sum = 0.0;
  for (int p = 0; p < n; ++p) {
    const double gap = (c.X.endpoints[0].col(p) - c.Y.endpoints[0].col(p)).norm();
    sum += gap;
    if (gap >= g.threshold) ++g.exceed;
  }
  g.mean_gap = sum / n;
  g.probability = static_cast<double>(g.exceed) / n;
  wilson_interval(g.exceed, n, g.ci_low, g.ci_high);
  return g;
}

std::vector<std::pair<double, double>> empirical_moments(const PathEnsemble& ens, double gamma) {
  std::vector<std::pair<double, double>> out;
  for (const Mat& E : ens.endpoints) {
    double s = 0.0, s2 = 0.0;
    for (Eigen::Index p = 0; p < E.cols(); ++p) {
      const double v = std::pow(E.col(p).norm(), gamma);
      s += v;
      s2 += v * v;
    }
    const double n = static_cast<double>(E.cols());
    const double mean = s / n;
    const double var = std::max(0.0, (s2 / n - mean * mean) * n / std::max(1.0, n - 1.0));
    out.emplace_back(mean, 1.96 * std::sqrt(var / n));
  }
  return out;
}

double calibrate_moment_constant(const VectorFieldModel& vf, const LevyMeasureSpec& spec, double eps, double gamma,
                                 double horizon, int n, RngStream& rng, const SimOptions& opts) {
  if (!(eps > 0.0)) throw InvalidParameter("calibration needs eps > 0");
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(horizon * i / 20.0);
  const PathEnsemble ens = simulate_X(vf, spec, eps, Vec::Zero(vf.dim()), grid, n, rng, opts);
  double C = 0.0;
  for (const auto& [m, ci] : empirical_moments(ens, gamma)) C = std::max(C, (m + ci) / std::pow(eps, gamma));
  return C;
}

MomentAudit moment_audit(const PathEnsemble& ens, double gamma, const VectorFieldModel& vf, double eps, double C,
                         double beta) {
  if (ens.tag != ProcessTag::X) throw InvalidParameter("moment audit needs an X ensemble");
  MomentAudit a;
  const double cap = std::min(beta, 1.0);
  a.gamma = gamma;
  if (gamma > cap) {
    a.gamma = cap;
    a.clamped = true;
    a.note = "gamma clamped to min(beta, 1)";
  }
  a.C = C;
  const auto mom = empirical_moments(ens, a.gamma);
  a.pass = true;
  const double xg = std::pow(ens.x.norm(), a.gamma);
  for (std::size_t k = 0; k < ens.t_grid.size(); ++k) {
    MomentRow r;
    r.t = ens.t_grid[k];
    r.moment = mom[k].first;
    r.ci = mom[k].second;
    r.bound = std::exp(-vf.delta() * a.gamma * r.t) * xg + C * std::pow(eps, a.gamma);
    r.ok = r.moment - r.ci <= r.bound;
    a.pass = a.pass && r.ok;
    a.rows.push_back(r);
  }
  return a;
}

}  // namespace cutoff
