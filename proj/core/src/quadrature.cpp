#include "cutoff/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <cmath>

#include "cutoff/errors.hpp"

namespace cutoff {

namespace bq = boost::math::quadrature;

QuadResult integrate_gk(const RealFn& f, double a, double b, const QuadParams& q) {
  QuadResult r;
  if (a == b) return r;
  double l1 = 0.0;
  r.value = bq::gauss_kronrod<double, 31>::integrate(f, a, b, q.max_depth, q.rel_tol, &r.error, &l1);
  if (!std::isfinite(r.value)) r.error = INFINITY;
  return r;
}

QuadResult integrate_to_inf(const RealFn& f, double a, const QuadParams& q) {
  QuadResult r;
  bq::exp_sinh<double> integrator;
  double l1 = 0.0;
  auto g = [&](double t) { return f(a + t); };
  r.value = integrator.integrate(g, 0.0, std::numeric_limits<double>::infinity(), q.rel_tol, &r.error, &l1);
  if (!std::isfinite(r.value)) r.error = INFINITY;
  return r;
}

namespace {

bq::ooura_fourier_sin<double>& sin_integrator() {
  thread_local bq::ooura_fourier_sin<double> integrator(1e-11, 8);
  return integrator;
}

bq::ooura_fourier_cos<double>& cos_integrator() {
  thread_local bq::ooura_fourier_cos<double> integrator(1e-11, 8);
  return integrator;
}

}  // namespace

QuadResult fourier_sin(const RealFn& f, double omega) {
  QuadResult r;
  if (omega == 0.0) return r;
  const double sign = omega < 0 ? -1.0 : 1.0;
  auto [v, rel] = sin_integrator().integrate(f, std::abs(omega));
  r.value = sign * v;
  r.error = std::abs(v) * rel;
  return r;
}

QuadResult fourier_cos(const RealFn& f, double omega) {
  QuadResult r;
  auto [v, rel] = cos_integrator().integrate(f, std::abs(omega));
  r.value = v;
  r.error = std::abs(v) * rel;
  return r;
}

void check_quadrature(const QuadResult& r, const QuadParams& q, const char* what) {
  if (!std::isfinite(r.value) || r.error > q.fail_tol * std::max(1.0, std::abs(r.value))) {
    throw QuadratureError(std::string(what) + ": quadrature did not converge", r.error);
  }
}

void gauss_legendre_panels(double a, double b, int panels, std::vector<double>& nodes,
                           std::vector<double>& weights) {
  using G = bq::gauss<double, 10>;
  nodes.clear();
  weights.clear();
  const double h = (b - a) / panels;
  const auto& abscissa = G::abscissa();
  const auto& w = G::weights();
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * h;
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      const double x = abscissa[i];
      if (x == 0.0) {
        nodes.push_back(c);
        weights.push_back(0.5 * h * w[i]);
      } else {
        nodes.push_back(c - 0.5 * h * x);
        weights.push_back(0.5 * h * w[i]);
        nodes.push_back(c + 0.5 * h * x);
        weights.push_back(0.5 * h * w[i]);
      }
    }
  }
}

}  // namespace cutoff
