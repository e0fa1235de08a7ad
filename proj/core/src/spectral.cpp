#include "cutoff/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "cutoff/errors.hpp"

namespace cutoff {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double w) {
  double t = std::fmod(w, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

struct Cluster {
  cd mu;
  int mult = 0;
};

std::vector<Cluster> cluster_eigenvalues(const CVec& ev, double scale, const HGOptions& opts) {
  std::vector<cd> vals(ev.data(), ev.data() + ev.size());
  std::vector<Cluster> clusters;
  std::vector<bool> used(vals.size(), false);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (used[i]) continue;
    cd sum = vals[i];
    int count = 1;
    used[i] = true;
    for (std::size_t j = i + 1; j < vals.size(); ++j) {
      if (!used[j] && std::abs(vals[j] - vals[i]) <= opts.cluster_tol * scale) {
        used[j] = true;
        sum += vals[j];
        ++count;
      }
    }
    clusters.push_back({sum / static_cast<double>(count), count});
  }
  for (std::size_t a = 0; a < clusters.size(); ++a) {
    for (std::size_t b = a + 1; b < clusters.size(); ++b) {
      const double gap = std::abs(clusters[a].mu - clusters[b].mu);
      if (gap <= opts.ambiguity_band * scale) {
        throw AmbiguityError("eigenvalues are numerically close; Jordan structure is ambiguous",
                             {1, clusters[a].mult + clusters[b].mult});
      }
    }
  }
  return clusters;
}

CMat matrix_power(const CMat& A, int k) {
  CMat P = CMat::Identity(A.rows(), A.cols());
  for (int i = 0; i < k; ++i) P = P * A;
  return P;
}

// Orthonormal basis of the kernel of A, with an ambiguity check on the singular value gap.
CMat kernel(const CMat& A, int expected, double scale, const HGOptions& opts) {
  Eigen::JacobiSVD<CMat> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const int n = static_cast<int>(s.size());
  int zero = 0;
  for (int i = 0; i < n; ++i) {
    const double r = s(i) / scale;
    if (r <= opts.cluster_tol) {
      ++zero;
    } else if (r <= opts.ambiguity_band) {
      throw AmbiguityError("singular value inside the ambiguity band", {zero, zero + 1});
    }
  }
  if (zero != expected) throw AmbiguityError("generalized eigenspace dimension mismatch", {zero, expected});
  return svd.matrixV().rightCols(zero);
}

}  // namespace

const char* to_string(HGProvenance p) { return p == HGProvenance::exact_linear ? "exact-linear" : "empirical"; }

CVec HGData::rotating(double t) const {
  CVec s = CVec::Zero(dim());
  for (std::size_t k = 0; k < v.size(); ++k) s += std::exp(cd(0.0, omega[k] * t)) * v[k];
  return s;
}

Vec HGData::rotating_real(double t) const { return rotating(t).real(); }

HGData hg_from_linearization(const Mat& J, const Vec& x, const HGOptions& opts) {
  if (J.rows() != J.cols()) throw DimensionMismatch("J must be square");
  if (x.size() != J.rows()) throw DimensionMismatch("x has wrong dimension");
  const int d = static_cast<int>(J.rows());
  Eigen::ComplexSchur<CMat> schur(J.cast<cd>());
  const CVec ev = schur.matrixT().diagonal();
  for (int i = 0; i < d; ++i) {
    if (!(ev(i).real() > 0.0)) throw DomainError("linearization must have eigenvalues with positive real part");
  }
  HGData hg;
  hg.provenance = HGProvenance::exact_linear;
  if (x.norm() == 0.0) {
    hg.degenerate = true;
    hg.note = "x = 0: the linearization vanishes and there is no cutoff";
    return hg;
  }
  const double scale = std::max(1.0, J.norm());
  const auto clusters = cluster_eigenvalues(ev, scale, opts);
  const CMat Jc = J.cast<cd>();
  std::vector<CMat> bases;
  CMat V(d, d);
  int col = 0;
  for (const auto& c : clusters) {
    const CMat A = Jc - c.mu * CMat::Identity(d, d);
    const CMat N = kernel(matrix_power(A, c.mult), c.mult, std::pow(scale, c.mult), opts);
    V.middleCols(col, c.mult) = N;
    col += c.mult;
    bases.push_back(N);
  }
  const CVec coeff = V.colPivHouseholderQr().solve(x.cast<cd>());

  struct Component {
    cd mu;
    CVec y;
    int ell = 0;
  };
  std::vector<Component> active;
  col = 0;
  for (std::size_t j = 0; j < clusters.size(); ++j) {
    const int m = clusters[j].mult;
    const CVec y = bases[j] * coeff.segment(col, m);
    col += m;
    if (y.norm() <= opts.zero_threshold * x.norm()) {
      hg.zero_components.push_back(clusters[j].mu);
      continue;
    }
    const CMat A = Jc - clusters[j].mu * CMat::Identity(d, d);
    CVec z = y;
    int ell = 0;
    while (ell < m + 1) {
      ++ell;
      const CVec next = A * z;
      const double r = next.norm() / (scale * z.norm());
      if (r <= opts.cluster_tol) break;
      if (r <= opts.ambiguity_band) throw AmbiguityError("Jordan chain length is ambiguous", {ell, ell + 1});
      z = next;
    }
    active.push_back({clusters[j].mu, y, ell});
  }
  if (!hg.zero_components.empty()) {
    hg.note = "some eigencomponents of x are zero at threshold " + std::to_string(opts.zero_threshold) +
              "; the classification is threshold-dependent";
  }
  double lambda = INFINITY;
  for (const auto& c : active) lambda = std::min(lambda, c.mu.real());
  int ell = 1;
  for (const auto& c : active) {
    if (c.mu.real() <= lambda + opts.cluster_tol * scale) ell = std::max(ell, c.ell);
  }
  hg.lambda = lambda;
  hg.ell = ell;
  double fact = 1.0;
  for (int k = 2; k < ell; ++k) fact *= k;
  const double sign = (ell - 1) % 2 == 0 ? 1.0 : -1.0;
  for (const auto& c : active) {
    if (c.mu.real() > lambda + opts.cluster_tol * scale || c.ell != ell) continue;
    const CMat A = Jc - c.mu * CMat::Identity(d, d);
    CVec v = (sign / fact) * (matrix_power(A, ell - 1) * c.y);
    double w = -c.mu.imag();
    if (std::abs(w) <= opts.cluster_tol * scale) {
      w = 0.0;
      v = v.real().cast<cd>();
    }
    hg.omega.push_back(w);
    hg.theta.push_back(wrap_angle(w));
    hg.v.push_back(v);
  }
  hg.m = static_cast<int>(hg.v.size());
  return hg;
}

namespace {

struct HarmonicFit {
  double residual = INFINITY;
  Mat coef;
};

// Least squares of rows e^{lambda t} t^{1-ell} phi_t on {1, cos(w t), sin(w t)}.
HarmonicFit harmonic_fit(const std::vector<double>& t, const std::vector<Vec>& phi, double lambda, int ell,
                         const std::vector<double>& freqs, bool constant) {
  const int n = static_cast<int>(t.size());
  const int d = static_cast<int>(phi.front().size());
  const int p = (constant ? 1 : 0) + 2 * static_cast<int>(freqs.size());
  Mat X(n, p), Y(n, d);
  for (int i = 0; i < n; ++i) {
    int c = 0;
    if (constant) X(i, c++) = 1.0;
    for (double w : freqs) {
      X(i, c++) = std::cos(w * t[i]);
      X(i, c++) = std::sin(w * t[i]);
    }
    const double g = std::exp(lambda * t[i]) * std::pow(t[i], 1.0 - ell);
    Y.row(i) = g * phi[i].transpose();
  }
  HarmonicFit f;
  f.coef = X.colPivHouseholderQr().solve(Y);
  const double norm = Y.norm();
  f.residual = norm > 0.0 ? (Y - X * f.coef).norm() / norm : INFINITY;
  return f;
}

}  // namespace

HGData hg_empirical(const VectorFieldModel& vf, const Vec& x, double horizon, const HGEmpiricalOptions& opts) {
  if (x.size() != vf.dim()) throw DimensionMismatch("x has wrong dimension");
  if (!(horizon > 0.0)) throw InvalidParameter("horizon must be positive");
  HGData hg;
  hg.provenance = HGProvenance::empirical;
  if (x.norm() == 0.0) {
    hg.degenerate = true;
    hg.note = "x = 0: the linearization vanishes and there is no cutoff";
    return hg;
  }
  const double end_norm = flow(vf, x, horizon).phi.norm();
  if (!(end_norm < 1e-6 * x.norm())) {
    throw NonConvergence("horizon too short: the flow has not entered the linear regime", end_norm / x.norm());
  }
  const OdeTolerance tight{1e-10 * end_norm, 1e-11};
  const double t0 = (1.0 - opts.window_fraction) * horizon;
  std::vector<double> times(opts.grid_points);
  for (int i = 0; i < opts.grid_points; ++i) times[i] = t0 + (horizon - t0) * i / (opts.grid_points - 1);
  const auto phi = flow_grid(vf, x, times, tight);

  const Mat J = vf.linear_part();
  Eigen::ComplexEigenSolver<Mat> es(J);
  const CVec ev = es.eigenvalues();

  double best_res = INFINITY;
  int best_ell = 1;
  double best_lambda = 0.0;
  std::vector<double> best_freqs;
  bool best_const = false;
  HarmonicFit best_fit;
  for (int ell = 1; ell <= vf.dim(); ++ell) {
    // log-linear fit for a starting value of lambda
    double st = 0, sy = 0, stt = 0, sty = 0;
    const int n = static_cast<int>(times.size());
    for (int i = 0; i < n; ++i) {
      const double y = std::log(phi[i].norm()) - (ell - 1) * std::log(times[i]);
      st += times[i];
      sy += y;
      stt += times[i] * times[i];
      sty += times[i] * y;
    }
    const double lam0 = -(n * sty - st * sy) / (n * stt - st * st);
    // frequencies of the linearization eigenvalues closest to the fitted rate
    double closest = INFINITY;
    for (int i = 0; i < ev.size(); ++i) closest = std::min(closest, std::abs(ev(i).real() - lam0));
    std::vector<double> freqs;
    bool constant = false;
    for (int i = 0; i < ev.size(); ++i) {
      if (std::abs(std::abs(ev(i).real() - lam0) - closest) > 1e-6 * std::max(1.0, std::abs(lam0))) continue;
      const double w = std::abs(ev(i).imag());
      if (w < 1e-9) {
        constant = true;
      } else if (std::none_of(freqs.begin(), freqs.end(), [&](double f) { return std::abs(f - w) < 1e-9; })) {
        freqs.push_back(w);
      }
    }
    auto objective = [&](double lam) { return harmonic_fit(times, phi, lam, ell, freqs, constant).residual; };
    double a = lam0 * 0.95, b = lam0 * 1.05;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), dd = a + gr * (b - a);
    double fc = objective(c), fd = objective(dd);
    for (int it = 0; it < 120 && (b - a) > 1e-14 * std::abs(lam0); ++it) {
      if (fc < fd) {
        b = dd;
        dd = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = objective(c);
      } else {
        a = c;
        c = dd;
        fc = fd;
        dd = a + gr * (b - a);
        fd = objective(dd);
      }
    }
    const double lam = 0.5 * (a + b);
    HarmonicFit fit = harmonic_fit(times, phi, lam, ell, freqs, constant);
    if (fit.residual < best_res * 0.5) {
      best_res = fit.residual;
      best_ell = ell;
      best_lambda = lam;
      best_freqs = freqs;
      best_const = constant;
      best_fit = fit;
    }
  }
  hg.fit_residual = best_res;
  if (!(best_res <= opts.residual_tol)) {
    throw NonConvergence("flow asymptotics do not match an exponential-polynomial-harmonic model", best_res);
  }
  hg.lambda = best_lambda;
  hg.ell = best_ell;
  int c = 0;
  if (best_const) {
    hg.omega.push_back(0.0);
    hg.theta.push_back(0.0);
    hg.v.push_back(best_fit.coef.row(c++).transpose().cast<cd>());
  }
  for (double w : best_freqs) {
    const Vec A = best_fit.coef.row(c++).transpose();
    const Vec B = best_fit.coef.row(c++).transpose();
    const CVec vp = 0.5 * (A.cast<cd>() - cd(0.0, 1.0) * B.cast<cd>());
    hg.omega.push_back(w);
    hg.theta.push_back(wrap_angle(w));
    hg.v.push_back(vp);
    hg.omega.push_back(-w);
    hg.theta.push_back(wrap_angle(-w));
    hg.v.push_back(vp.conjugate());
  }
  hg.m = static_cast<int>(hg.v.size());
  return hg;
}

const char* to_string(OmegaKind k) {
  switch (k) {
    case OmegaKind::singleton: return "singleton";
    case OmegaKind::cycle: return "cycle";
    case OmegaKind::torus: return "torus";
  }
  return "?";
}

long rational_denominator(double x, long max_den, double tol) {
  x -= std::floor(x);
  if (std::abs(x) <= tol || std::abs(1.0 - x) <= tol) return 1;
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(r);
    const long ai = static_cast<long>(a);
    const long p2 = ai * p1 + p0;
    const long q2 = ai * q1 + q0;
    if (q2 > max_den) return 0;
    if (std::abs(x - static_cast<double>(p2) / q2) <= tol) return q2;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double frac = r - a;
    if (frac < 1e-15) return 0;
    r = 1.0 / frac;
  }
  return 0;
}

OmegaSet omega_set(const HGData& hg, int n_samples, const std::optional<Mat>& M, double offset) {
  OmegaSet om;
  if (hg.degenerate || hg.v.empty()) throw InvalidParameter("no Hartman-Grobman data");
  auto norm_of = [&](const Vec& p) { return M ? (*M * p).norm() : p.norm(); };
  bool all_zero = true;
  long q = 1;
  bool rational = true;
  double wmin = INFINITY;
  for (std::size_t k = 0; k < hg.omega.size(); ++k) {
    if (hg.omega[k] == 0.0) continue;
    all_zero = false;
    wmin = std::min(wmin, std::abs(hg.omega[k]));
    const long den = rational_denominator(hg.theta[k] / kTwoPi);
    if (den == 0) {
      rational = false;
    } else {
      q = std::lcm(q, den);
      if (q > 100000) rational = false;
    }
  }
  if (all_zero) {
    om.kind = OmegaKind::singleton;
    om.points.push_back(hg.rotating_real(0.0));
  } else if (rational) {
    om.kind = OmegaKind::cycle;
    om.cycle_length = q;
    for (long j = 0; j < q; ++j) om.points.push_back(hg.rotating_real(static_cast<double>(j)));
  } else {
    om.kind = OmegaKind::torus;
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    const double period = kTwoPi / wmin;
    for (int j = 0; j < n_samples; ++j) {
      const double frac = std::fmod((j + offset) * golden, 1.0);
      om.points.push_back(hg.rotating_real(period * (frac + j)));
    }
  }
  om.min_norm = INFINITY;
  om.max_norm = 0.0;
  for (const auto& p : om.points) {
    const double r = norm_of(p);
    om.min_norm = std::min(om.min_norm, r);
    om.max_norm = std::max(om.max_norm, r);
  }
  return om;
}

const char* to_string(GrowthVerdict v) {
  switch (v) {
    case GrowthVerdict::profile_sufficient: return "profile-sufficient";
    case GrowthVerdict::profile_refuted: return "profile-refuted";
    case GrowthVerdict::undetermined: return "undetermined";
  }
  return "?";
}

NormalGrowth normal_growth(const HGData& hg, double tol) {
  NormalGrowth ng;
  bool irrational = false;
  for (std::size_t k = 0; k < hg.v.size(); ++k) {
    if (!(hg.omega[k] > 0.0)) continue;
    const Vec re = hg.v[k].real();
    const Vec im = hg.v[k].imag();
    const double scale = std::max(re.squaredNorm(), im.squaredNorm());
    if (std::abs(re.dot(im)) > tol * scale) ng.orthogonal = false;
    if (std::abs(re.norm() - im.norm()) > tol * std::sqrt(scale)) ng.equal_norms = false;
    if (rational_denominator(hg.theta[k] / kTwoPi) == 0) irrational = true;
  }
  if (ng.orthogonal && ng.equal_norms) {
    ng.verdict = GrowthVerdict::profile_sufficient;
  } else if (irrational) {
    ng.verdict = GrowthVerdict::profile_refuted;
  } else {
    ng.verdict = GrowthVerdict::undetermined;
  }
  return ng;
}

std::vector<double> default_delta_grid() { return {0.25, 0.5, 0.75, 0.9, 1.0, 1.1, 1.25, 1.5, 2.0}; }

double cutoff_time(double lambda, int ell, double eps) {
  if (!(lambda > 0.0)) throw InvalidParameter("lambda must be positive");
  if (ell < 1) throw InvalidParameter("ell must be at least 1");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0,1)");
  const double L = std::log(1.0 / eps);
  if (ell == 1) return L / lambda;
  if (!(eps < std::exp(-1.0))) throw DomainError("eps must be below 1/e when ell > 1");
  return L / lambda + (ell - 1) / lambda * std::log(L);
}

CutoffSchedule cutoff_schedule(const HGData& hg, double eps, const std::vector<double>& deltas) {
  if (hg.degenerate) throw DomainError("no cutoff time scale for degenerate data");
  CutoffSchedule s;
  s.eps = eps;
  s.t_eps = cutoff_time(hg.lambda, hg.ell, eps);
  s.w_eps = 1.0 / hg.lambda;
  s.deltas = deltas;
  for (double d : deltas) {
    if (!(d > 0.0)) throw InvalidParameter("probe factors must be positive");
    s.probe_times.push_back(d * s.t_eps);
  }
  return s;
}

const char* to_string(ProfileVerdict v) {
  switch (v) {
    case ProfileVerdict::profile: return "profile";
    case ProfileVerdict::window_only: return "window-only";
    case ProfileVerdict::undetermined: return "undetermined";
  }
  return "?";
}

ProfileVerdict profile_exists(const HGData& hg, const OmegaSet& omega, const ZinfModel& zinf, double tol) {
  if (hg.degenerate) return ProfileVerdict::undetermined;
  if (!zinf.rotationally_invariant) return ProfileVerdict::undetermined;
  double lo = INFINITY, hi = 0.0;
  for (const auto& p : omega.points) {
    const double r = zinf.M ? (*zinf.M * p).norm() : p.norm();
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (omega.points.empty()) return ProfileVerdict::undetermined;
  return (hi - lo) <= tol * hi ? ProfileVerdict::profile : ProfileVerdict::window_only;
}

}  // namespace cutoff
