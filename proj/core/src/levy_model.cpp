#include "cutoff/levy_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cutoff/errors.hpp"

namespace cutoff {

namespace {

constexpr double kPi = std::numbers::pi;

double sin_power_half_integral(int k) {
  // int_0^{pi/2} sin^k(phi) dphi
  return std::sqrt(kPi) * std::tgamma((k + 1) / 2.0) / (2.0 * std::tgamma(k / 2.0 + 1.0));
}

bool atoms_symmetric(const std::vector<SpectralAtom>& atoms, bool require_equal_weight) {
  for (const auto& a : atoms) {
    bool found = false;
    for (const auto& b : atoms) {
      if ((a.direction + b.direction).norm() < 1e-9 &&
          std::abs(a.weight * a.c0 - b.weight * b.c0) <= 1e-12 * std::max(1.0, a.weight * a.c0) &&
          (!require_equal_weight || std::abs(a.weight - b.weight) <= 1e-12 * std::max(1.0, a.weight))) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

// x - sin x computed without cancellation.
double sin_minus_x(double x) {
  if (std::abs(x) < 1e-3) {
    const double x2 = x * x;
    return -x * x2 / 6.0 * (1.0 - x2 / 20.0);
  }
  return std::sin(x) - x;
}

// Integral of (e^{isr} - 1 - isr) q(r) over r in (0, 1], substituted r = y^m so the
// r^{1-alpha} singularity at 0 turns into a bounded integrand.
cd inner_direction(const LevyMeasureSpec& spec, double s, const Vec& theta, double c0, bool real_only,
                   const QuadParams& quad) {
  if (s == 0.0) return {0.0, 0.0};
  const double m = 1.0 / (2.0 - spec.alpha);
  auto re_f = [&](double y) {
    if (y <= 0.0) return 0.0;
    const double r = std::pow(y, m);
    const double jac = m * std::pow(y, m - 1.0);
    const double h = std::sin(0.5 * s * r);
    return -2.0 * h * h * spec.q(r, theta, c0) * jac;
  };
  QuadResult re = integrate_gk(re_f, 0.0, 1.0, quad);
  check_quadrature(re, quad, "inner layer exponent");
  double im_val = 0.0;
  if (!real_only) {
    auto im_f = [&](double y) {
      if (y <= 0.0) return 0.0;
      const double r = std::pow(y, m);
      const double jac = m * std::pow(y, m - 1.0);
      return sin_minus_x(s * r) * spec.q(r, theta, c0) * jac;
    };
    QuadResult im = integrate_gk(im_f, 0.0, 1.0, quad);
    check_quadrature(im, quad, "inner layer exponent (odd part)");
    im_val = im.value;
  }
  return {re.value, im_val};
}

// h(s) = int_1^inf (e^{isr} - 1) r^{-1-p} dr.
cd pareto_tail_integral(double s, double p, const QuadParams& quad) {
  if (s == 0.0) return {0.0, 0.0};
  const double as = std::abs(s);
  const double sign = s < 0 ? -1.0 : 1.0;
  const double R = std::max(1.0 + 1e-12, std::min(quad.truncation_radius, 1.0 + 40.0 * kPi / as));
  auto re_f = [&](double r) {
    const double h = std::sin(0.5 * as * r);
    return -2.0 * h * h * std::pow(r, -1.0 - p);
  };
  auto im_f = [&](double r) { return std::sin(as * r) * std::pow(r, -1.0 - p); };
  QuadResult re = integrate_gk(re_f, 1.0, R, quad);
  QuadResult im = integrate_gk(im_f, 1.0, R, quad);
  check_quadrature(re, quad, "tail exponent");
  check_quadrature(im, quad, "tail exponent");
  auto f = [&](double t) { return std::pow(R + t, -1.0 - p); };
  QuadResult C = fourier_cos(f, as);
  QuadResult S = fourier_sin(f, as);
  const double c = std::cos(as * R), sn = std::sin(as * R);
  const double cos_tail = c * C.value - sn * S.value;
  const double sin_tail = sn * C.value + c * S.value;
  const double mass_tail = std::pow(R, -p) / p;
  const double err = C.error + S.error;
  if (!std::isfinite(cos_tail) || err > quad.fail_tol * std::max(1.0, std::abs(mass_tail))) {
    throw QuadratureError("tail exponent remainder did not converge", err);
  }
  return {re.value + cos_tail - mass_tail, sign * (im.value + sin_tail)};
}

// E exp(i s R) - 1 for R uniform on (1, r_max).
cd shell_charfn_minus_one(double s, double r_max) {
  if (s == 0.0) return {0.0, 0.0};
  const cd i(0.0, 1.0);
  const cd v = (std::exp(i * s * r_max) - std::exp(i * s)) / (i * s * (r_max - 1.0));
  return v - 1.0;
}

// Tail contribution along one direction with spectral weight w and constant c0.
cd tail_direction(const LevyMeasureSpec& spec, double s, double w, double c0, double total_weight,
                  const QuadParams& quad) {
  switch (spec.tail.kind) {
    case TailKind::none:
    case TailKind::point_mass:
      return {0.0, 0.0};
    case TailKind::uniform_shell:
      return spec.tail.rate * (w / total_weight) * shell_charfn_minus_one(s, spec.tail.r_max);
    case TailKind::pareto:
      return w * spec.tail.intensity * pareto_tail_integral(s, spec.tail.index, quad);
    case TailKind::stable_extension:
      return w * c0 * pareto_tail_integral(s, spec.alpha, quad);
  }
  return {0.0, 0.0};
}

// Average over theta uniform on the sphere of an even function of <u, theta>.
double isotropic_average(int d, double unorm, const std::function<double(double)>& g,
                         const QuadParams& quad) {
  if (d == 1) return g(unorm);
  QuadParams outer = quad;
  outer.rel_tol = std::max(quad.rel_tol, 1e-9);
  auto f = [&](double phi) { return g(unorm * std::cos(phi)) * std::pow(std::sin(phi), d - 2); };
  QuadResult r = integrate_gk(f, 0.0, 0.5 * kPi, outer);
  check_quadrature(r, outer, "angular average");
  return r.value / sin_power_half_integral(d - 2);
}

}  // namespace

const char* to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::pure_stable: return "pure_stable";
    case ProfileKind::tempered: return "tempered";
    case ProfileKind::lamperti: return "lamperti";
    case ProfileKind::custom: return "custom";
  }
  return "?";
}

const char* to_string(TailKind k) {
  switch (k) {
    case TailKind::none: return "none";
    case TailKind::point_mass: return "point_mass";
    case TailKind::uniform_shell: return "uniform_shell";
    case TailKind::pareto: return "pareto";
    case TailKind::stable_extension: return "stable_extension";
  }
  return "?";
}

const char* to_string(BoundStatus s) {
  switch (s) {
    case BoundStatus::pass: return "pass";
    case BoundStatus::fail: return "fail";
    case BoundStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

double stable_radial_constant(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidParameter("alpha must lie in (0,2)");
  if (alpha == 1.0) return kPi / 2.0;
  return std::tgamma(1.0 - alpha) * std::cos(kPi * alpha / 2.0) / alpha;
}

double sphere_abs_moment(int d, double alpha) {
  return std::tgamma(d / 2.0) * std::tgamma((alpha + 1.0) / 2.0) /
         (std::sqrt(kPi) * std::tgamma((d + alpha) / 2.0));
}

void LevyMeasureSpec::validate() const {
  if (dim < 1) throw InvalidParameter("dimension must be positive");
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidParameter("alpha must lie in (0,2)");
  if (isotropic && !atoms.empty()) throw InvalidParameter("spectral measure is either atoms or isotropic");
  if (!isotropic && atoms.empty()) throw InvalidParameter("empty spectral measure");
  if (isotropic) {
    if (!(isotropic->mass > 0.0) || !std::isfinite(isotropic->mass)) throw InvalidParameter("isotropic mass must be positive");
    if (!(isotropic->c0 > 0.0)) throw InvalidParameter("c0 must be positive");
  }
  for (const auto& a : atoms) {
    if (a.direction.size() != dim) throw DimensionMismatch("atom direction has wrong dimension");
    if (std::abs(a.direction.norm() - 1.0) > 1e-9) throw InvalidParameter("atom direction must be a unit vector");
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw InvalidParameter("atom weights must be positive and finite");
    if (!(a.c0 > 0.0) || !std::isfinite(a.c0)) throw InvalidParameter("c0 must be positive for every atom");
  }
  switch (profile.kind) {
    case ProfileKind::tempered:
      if (!(profile.rate > 0.0)) throw InvalidParameter("tempering rate must be positive");
      break;
    case ProfileKind::custom:
      if (!profile.custom) throw InvalidParameter("custom profile requires a density");
      break;
    default:
      break;
  }
  switch (tail.kind) {
    case TailKind::point_mass:
      if (tail.point.size() != dim) throw DimensionMismatch("tail point has wrong dimension");
      if (!(tail.point.norm() > 1.0)) throw InvalidParameter("tail point must satisfy |z| > 1");
      if (!(tail.rate >= 0.0)) throw InvalidParameter("tail rate must be non-negative");
      break;
    case TailKind::uniform_shell:
      if (!(tail.r_max > 1.0)) throw InvalidParameter("shell radius must exceed 1");
      if (!(tail.rate >= 0.0)) throw InvalidParameter("tail rate must be non-negative");
      break;
    case TailKind::pareto:
      if (!(tail.index > 0.0)) throw InvalidParameter("Pareto index must be positive");
      if (!(tail.intensity > 0.0)) throw InvalidParameter("Pareto intensity must be positive");
      break;
    default:
      break;
  }
  if (!(beta > 0.0)) throw InvalidParameter("beta must be positive");
  if (symmetric_small_jumps && !isotropic && !atoms_symmetric(atoms, false)) {
    throw InvalidParameter("symmetric_small_jumps claimed but atoms are not symmetric");
  }
}

double LevyMeasureSpec::q(double r, const Vec& theta, double c0) const {
  switch (profile.kind) {
    case ProfileKind::pure_stable:
      return c0 * std::pow(r, -1.0 - alpha);
    case ProfileKind::tempered:
      return c0 * std::pow(r, -1.0 - alpha) * std::exp(-profile.rate * r);
    case ProfileKind::lamperti: {
      const double em1 = std::expm1(r);
      return c0 * std::exp(r) * std::pow(em1, -1.0 - alpha);
    }
    case ProfileKind::custom:
      return profile.custom(r, theta);
  }
  return 0.0;
}

bool LevyMeasureSpec::exactly_stable() const {
  return profile.kind == ProfileKind::pure_stable && tail.kind == TailKind::stable_extension;
}

bool LevyMeasureSpec::symmetric() const {
  bool spectral_sym = isotropic.has_value() || atoms_symmetric(atoms, tail.kind == TailKind::pareto ||
                                                                          tail.kind == TailKind::uniform_shell);
  if (!spectral_sym) return false;
  if (profile.kind == ProfileKind::custom && !symmetric_small_jumps) return false;
  if (tail.kind == TailKind::point_mass && tail.rate > 0.0) return false;
  return true;
}

double LevyMeasureSpec::essinf_c0() const {
  if (isotropic) return isotropic->c0;
  double m = INFINITY;
  for (const auto& a : atoms) m = std::min(m, a.c0);
  return atoms.empty() ? 0.0 : m;
}

double LevyMeasureSpec::total_spectral_mass() const {
  if (isotropic) return isotropic->mass;
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

double LevyMeasureSpec::tail_rate() const {
  switch (tail.kind) {
    case TailKind::none: return 0.0;
    case TailKind::point_mass:
    case TailKind::uniform_shell: return tail.rate;
    case TailKind::pareto: return tail.intensity * total_spectral_mass() / tail.index;
    case TailKind::stable_extension: {
      if (isotropic) return isotropic->c0 * isotropic->mass / alpha;
      double s = 0.0;
      for (const auto& a : atoms) s += a.weight * a.c0;
      return s / alpha;
    }
  }
  return 0.0;
}

double StableLaw::exponent(const Vec& u) const {
  if (isotropic) return -K * std::pow(u.norm(), alpha);
  double s = 0.0;
  for (const auto& f : factors) s += f.gamma * std::pow(std::abs(f.direction.dot(u)), alpha);
  return -s;
}

double StableLaw::min_directional_scale() const {
  if (isotropic) return K;
  if (dim == 1) {
    double s = 0.0;
    for (const auto& f : factors) s += f.gamma * std::pow(std::abs(f.direction(0)), alpha);
    return s;
  }
  double best = INFINITY;
  if (dim == 2) {
    for (int i = 0; i < 3600; ++i) {
      const double a = kPi * i / 3600.0;
      Vec v(2);
      v << std::cos(a), std::sin(a);
      best = std::min(best, -exponent(v));
    }
    return best;
  }
  RngStream rng(0x5EEDull, 7);
  for (int i = 0; i < 20000; ++i) {
    Vec v(dim);
    for (int k = 0; k < dim; ++k) v(k) = rng.normal();
    v.normalize();
    best = std::min(best, -exponent(v));
  }
  return best;
}

LevyMeasureSpec make_isotropic_stable(int d, double alpha, double K, double beta) {
  LevyMeasureSpec spec;
  spec.dim = d;
  spec.alpha = alpha;
  spec.isotropic = IsotropicMarker{K / (stable_radial_constant(alpha) * sphere_abs_moment(d, alpha)), 1.0};
  spec.profile.kind = ProfileKind::pure_stable;
  spec.tail.kind = TailKind::stable_extension;
  spec.beta = beta;
  spec.symmetric_small_jumps = true;
  return spec;
}

LevyMeasureSpec make_axis_atoms(int d, double alpha, double weight, double c0, double beta) {
  LevyMeasureSpec spec;
  spec.dim = d;
  spec.alpha = alpha;
  for (int i = 0; i < d; ++i) {
    for (double sgn : {1.0, -1.0}) {
      Vec e = Vec::Zero(d);
      e(i) = sgn;
      spec.atoms.push_back({e, weight, c0});
    }
  }
  spec.profile.kind = ProfileKind::pure_stable;
  spec.tail.kind = TailKind::stable_extension;
  spec.beta = beta;
  spec.symmetric_small_jumps = true;
  return spec;
}

StableLaw make_isotropic_law(int d, double alpha, double K) {
  StableLaw law;
  law.dim = d;
  law.alpha = alpha;
  law.isotropic = true;
  law.K = K;
  return law;
}

StableLaw stable_limit(const LevyMeasureSpec& spec) {
  spec.validate();
  const double Ca = stable_radial_constant(spec.alpha);
  StableLaw law;
  law.dim = spec.dim;
  law.alpha = spec.alpha;
  if (spec.isotropic) {
    law.isotropic = true;
    law.K = spec.isotropic->c0 * spec.isotropic->mass * Ca * sphere_abs_moment(spec.dim, spec.alpha);
    return law;
  }
  if (!atoms_symmetric(spec.atoms, false)) {
    throw UnsupportedConfiguration("stable limit sampling requires a symmetric spectral measure");
  }
  law.isotropic = false;
  for (const auto& a : spec.atoms) {
    const double g = a.weight * a.c0 * Ca;
    bool merged = false;
    for (auto& f : law.factors) {
      if ((f.direction - a.direction).norm() < 1e-9 || (f.direction + a.direction).norm() < 1e-9) {
        f.gamma += g;
        merged = true;
        break;
      }
    }
    if (!merged) law.factors.push_back({a.direction, g});
  }
  return law;
}

cd char_exponent(const LevyMeasureSpec& spec, const Vec& u, const QuadParams& quad) {
  spec.validate();
  if (u.size() != spec.dim) throw DimensionMismatch("evaluation point has wrong dimension");
  if (!(quad.truncation_radius >= 1.0)) throw InvalidParameter("truncation radius must be at least 1");
  const double un = u.norm();
  if (un == 0.0) return {0.0, 0.0};
  const bool sym = spec.symmetric();
  if (spec.exactly_stable() && sym) return {stable_limit(spec).exponent(u), 0.0};

  cd total(0.0, 0.0);
  if (spec.isotropic) {
    const double M = spec.isotropic->mass;
    const double c0 = spec.isotropic->c0;
    const Vec e1 = Vec::Unit(spec.dim, 0);
    auto g = [&](double s) {
      double v = inner_direction(spec, s, e1, c0, true, quad).real();
      if (spec.tail.kind != TailKind::point_mass && spec.tail.kind != TailKind::none) {
        v += tail_direction(spec, s, 1.0, c0, 1.0, quad).real();
      }
      return v;
    };
    // uniform_shell rate is a total rate; pareto/stable tails scale with the spectral mass.
    if (spec.tail.kind == TailKind::uniform_shell) {
      auto gi = [&](double s) { return inner_direction(spec, s, e1, c0, true, quad).real(); };
      auto gt = [&](double s) { return shell_charfn_minus_one(s, spec.tail.r_max).real(); };
      total += M * isotropic_average(spec.dim, un, gi, quad) +
               spec.tail.rate * isotropic_average(spec.dim, un, gt, quad);
    } else {
      total += M * isotropic_average(spec.dim, un, g, quad);
    }
  } else {
    const double W = spec.total_spectral_mass();
    for (const auto& a : spec.atoms) {
      const double s = a.direction.dot(u);
      total += a.weight * inner_direction(spec, s, a.direction, a.c0, sym, quad);
      total += tail_direction(spec, s, a.weight, a.c0, W, quad);
    }
    if (sym) total.imag(0.0);
  }
  if (spec.tail.kind == TailKind::point_mass && spec.tail.rate > 0.0) {
    total += spec.tail.rate * (std::exp(cd(0.0, spec.tail.point.dot(u))) - 1.0);
  }
  return total;
}

CharExponentGrid char_exponent_grid(const LevyMeasureSpec& spec, const std::vector<Vec>& points,
                                    const QuadParams& quad) {
  CharExponentGrid grid;
  grid.points = points;
  grid.truncation_radius = quad.truncation_radius;
  const bool closed = spec.exactly_stable() && spec.symmetric();
  grid.method = closed ? "closed-form" : "gauss-kronrod";
  for (const auto& u : points) {
    grid.values.push_back(char_exponent(spec, u, quad));
    grid.errors.push_back(closed ? 0.0 : quad.rel_tol * std::max(1.0, std::abs(grid.values.back())));
  }
  return grid;
}

namespace {

// int over y in [0, Y] of exp((beta - p) y) dy by quadrature on growing horizons.
MomentCheck power_tail_moment(double prefactor, double beta, double p, const QuadParams& quad) {
  MomentCheck out;
  constexpr double kGuard = 1e300;
  double prev = 0.0;
  double value = 0.0;
  bool converged = false;
  for (double Y = 25.0; Y <= 1600.0; Y *= 2.0) {
    auto f = [&](double y) { return std::exp((beta - p) * y); };
    QuadResult r = integrate_gk(f, 0.0, Y, quad);
    value = prefactor * r.value;
    if (!std::isfinite(value) || value > kGuard) break;
    if (Y > 25.0 && std::abs(value - prev) <= 1e-10 * std::max(1.0, std::abs(value))) {
      converged = true;
      break;
    }
    prev = value;
  }
  if (converged) {
    out.value = value;
    out.pass = true;
  } else {
    out.value = INFINITY;
    out.pass = false;
    out.note = "tail moment diverges (beta >= tail index)";
  }
  return out;
}

}  // namespace

MomentCheck verify_moment_hypothesis(const LevyMeasureSpec& spec, double beta) {
  if (!(beta > 0.0)) throw InvalidParameter("beta must be positive");
  spec.validate();
  QuadParams quad;
  MomentCheck out;
  switch (spec.tail.kind) {
    case TailKind::none:
      out.value = 0.0;
      out.pass = true;
      break;
    case TailKind::point_mass:
      out.value = spec.tail.rate * std::pow(spec.tail.point.norm(), beta);
      out.pass = std::isfinite(out.value);
      break;
    case TailKind::uniform_shell: {
      const double rm = spec.tail.r_max;
      auto f = [&](double r) { return std::pow(r, beta) / (rm - 1.0); };
      QuadResult r = integrate_gk(f, 1.0, rm, quad);
      out.value = spec.tail.rate * r.value;
      out.pass = std::isfinite(out.value);
      break;
    }
    case TailKind::pareto:
      out = power_tail_moment(spec.tail.intensity * spec.total_spectral_mass(), beta, spec.tail.index, quad);
      break;
    case TailKind::stable_extension: {
      double pref = 0.0;
      if (spec.isotropic) {
        pref = spec.isotropic->c0 * spec.isotropic->mass;
      } else {
        for (const auto& a : spec.atoms) pref += a.weight * a.c0;
      }
      out = power_tail_moment(pref, beta, spec.alpha, quad);
      break;
    }
  }
  if (beta > 1.0) out.note += (out.note.empty() ? "" : "; ") + std::string("fractional moments use beta^1 = 1");
  return out;
}

EquatorReport equator_report(const LevyMeasureSpec& spec) {
  if (!spec.isotropic && spec.atoms.empty()) throw InvalidParameter("empty spectral measure");
  spec.validate();
  EquatorReport rep;
  const int d = spec.dim;
  rep.essinf_c0 = spec.essinf_c0();
  if (spec.isotropic) {
    rep.span_rank = d;
    rep.min_directional_mass = spec.isotropic->mass / d;
  } else {
    Mat D(d, static_cast<int>(spec.atoms.size()));
    Mat S = Mat::Zero(d, d);
    for (std::size_t k = 0; k < spec.atoms.size(); ++k) {
      D.col(static_cast<int>(k)) = spec.atoms[k].direction;
      S += spec.atoms[k].weight * spec.atoms[k].direction * spec.atoms[k].direction.transpose();
    }
    Eigen::JacobiSVD<Mat> svd(D);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
      if (sv(i) > 1e-10 * std::max(1.0, sv(0))) ++rank;
    }
    rep.span_rank = rank;
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    rep.min_directional_mass = std::max(0.0, es.eigenvalues()(0));
  }
  rep.pass = rep.essinf_c0 > 0.0 && rep.span_rank == d && rep.min_directional_mass > 0.0;
  return rep;
}

double inner_radial_moment(const LevyMeasureSpec& spec, const Vec& theta, double c0, double a, double b,
                           int k, const QuadParams& quad) {
  if (b <= a) return 0.0;
  if (spec.profile.kind == ProfileKind::pure_stable) {
    const double e = k - spec.alpha;
    if (std::abs(e) < 1e-14) return c0 * std::log(b / a);
    return c0 * (std::pow(b, e) - (a > 0.0 ? std::pow(a, e) : 0.0)) / e;
  }
  if (a > 0.0) {
    auto f = [&](double r) { return std::pow(r, k) * spec.q(r, theta, c0); };
    QuadResult r = integrate_gk(f, a, b, quad);
    check_quadrature(r, quad, "radial moment");
    return r.value;
  }
  if (k - spec.alpha <= -1.0) return INFINITY;
  // substitution r = b * y^m regularizes r^{k-1-alpha} near zero
  const double m = 1.0 / (k - spec.alpha);
  auto f = [&](double y) {
    if (y <= 0.0) return 0.0;
    const double r = b * std::pow(y, m);
    const double jac = b * m * std::pow(y, m - 1.0);
    return std::pow(r, k) * spec.q(r, theta, c0) * jac;
  };
  QuadResult r = integrate_gk(f, 0.0, 1.0, quad);
  check_quadrature(r, quad, "radial moment");
  return r.value;
}

Mat inner_covariance(const LevyMeasureSpec& spec, double delta, const QuadParams& quad) {
  const int d = spec.dim;
  Mat S = Mat::Zero(d, d);
  if (delta <= 0.0) return S;
  if (spec.isotropic) {
    const Vec e1 = Vec::Unit(d, 0);
    const double m2 = inner_radial_moment(spec, e1, spec.isotropic->c0, 0.0, delta, 2, quad);
    return Mat::Identity(d, d) * (spec.isotropic->mass * m2 / d);
  }
  for (const auto& a : spec.atoms) {
    const double m2 = inner_radial_moment(spec, a.direction, a.c0, 0.0, delta, 2, quad);
    S += a.weight * m2 * a.direction * a.direction.transpose();
  }
  return S;
}

OreyMasudaResult orey_masuda_bound(const LevyMeasureSpec& spec, const Vec& v, const QuadParams& quad) {
  spec.validate();
  if (v.size() != spec.dim) throw DimensionMismatch("v has wrong dimension");
  const double vn = v.norm();
  if (!(vn > 0.0)) throw InvalidParameter("v must be nonzero");
  OreyMasudaResult out;
  const double cmin = spec.essinf_c0();
  const EquatorReport eq = equator_report(spec);

  // r0: largest grid radius below which |r^{1+alpha} q - c0| <= cmin / 2 holds everywhere.
  std::vector<std::pair<Vec, double>> dirs;
  if (spec.isotropic) {
    dirs.push_back({Vec::Unit(spec.dim, 0), spec.isotropic->c0});
  } else {
    for (const auto& a : spec.atoms) dirs.push_back({a.direction, a.c0});
  }
  double r0 = 0.0;
  for (int j = 0; j < 200; ++j) {
    const double r = std::pow(10.0, -6.0 + 6.0 * j / 199.0);
    bool ok = true;
    for (const auto& [th, c0] : dirs) {
      if (std::abs(std::pow(r, 1.0 + spec.alpha) * spec.q(r, th, c0) - c0) > 0.5 * cmin) ok = false;
    }
    if (!ok) break;
    r0 = r;
  }
  out.r0 = r0;
  out.C_angle = r0 > 0.0 ? 1.0 / r0 : INFINITY;
  out.c_angle = cmin / (2.0 * (2.0 - spec.alpha)) * eq.min_directional_mass;
  out.lower_bound = out.c_angle * std::pow(vn, spec.alpha);

  auto directional = [&](double s, const Vec& th, double c0) {
    const double as = std::abs(s);
    if (as == 0.0) return 0.0;
    const double upper = std::min(1.0, 1.0 / as);
    return s * s * inner_radial_moment(spec, th, c0, 0.0, upper, 2, quad);
  };
  if (spec.isotropic) {
    const Vec e1 = Vec::Unit(spec.dim, 0);
    auto g = [&](double s) { return directional(s, e1, spec.isotropic->c0); };
    out.integral = spec.isotropic->mass * isotropic_average(spec.dim, vn, g, quad);
  } else {
    for (const auto& a : spec.atoms) out.integral += a.weight * directional(a.direction.dot(v), a.direction, a.c0);
  }
  if (!(vn > out.C_angle)) {
    out.status = BoundStatus::inconclusive;
  } else if (out.lower_bound > 0.0 && out.integral >= out.lower_bound) {
    out.status = BoundStatus::pass;
  } else {
    out.status = BoundStatus::fail;
  }
  out.pass = out.status == BoundStatus::pass;
  return out;
}

HolderEstimate holder_exponent_estimate(const LevyMeasureSpec& spec, double pair_scale, int n_pairs,
                                        RngStream& rng, const QuadParams& quad) {
  if (!(pair_scale > 0.0 && pair_scale <= 0.5)) throw InvalidParameter("pair_scale must lie in (0, 1/2]");
  if (n_pairs < 1) throw InvalidParameter("n_pairs must be positive");
  spec.validate();
  HolderEstimate out;
  out.exponent = std::min(spec.beta, 1.0);
  if (spec.beta > 1.0) {
    out.clamped = true;
    out.note = "beta clamped to 1";
  }
  const int d = spec.dim;
  auto random_unit = [&]() {
    Vec v(d);
    for (int k = 0; k < d; ++k) v(k) = rng.normal();
    return Vec(v / v.norm());
  };
  for (int i = 0; i < n_pairs; ++i) {
    Vec z1, z2;
    do {
      z1 = random_unit() * (0.5 * std::pow(rng.uniform(), 1.0 / d));
      z2 = z1 + random_unit() * (pair_scale * rng.uniform());
    } while (z2.norm() > 0.5 || (z1 - z2).norm() == 0.0);
    const double num = std::abs(char_exponent(spec, z1, quad) - char_exponent(spec, z2, quad));
    out.quotient = std::max(out.quotient, num / std::pow((z1 - z2).norm(), out.exponent));
  }
  return out;
}

}  // namespace cutoff
