#pragma once

#include <functional>
#include <vector>

namespace cutoff {

struct QuadParams {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  unsigned max_depth = 18;
  double truncation_radius = 50.0;
  // Estimated error above fail_tol * max(1, |I|) raises QuadratureError.
  double fail_tol = 1e-6;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

using RealFn = std::function<double(double)>;

// Adaptive Gauss-Kronrod (31 nodes) on a finite interval.
QuadResult integrate_gk(const RealFn& f, double a, double b, const QuadParams& q = {});

// Integral over [a, inf) of a smooth, exponentially or algebraically decaying integrand.
QuadResult integrate_to_inf(const RealFn& f, double a, const QuadParams& q = {});

// Oscillatory half-line integrals: int_0^inf f(t) sin(w t) dt and int_0^inf f(t) cos(w t) dt.
QuadResult fourier_sin(const RealFn& f, double omega);
QuadResult fourier_cos(const RealFn& f, double omega);

// Throws QuadratureError when the estimate is not within budget.
void check_quadrature(const QuadResult& r, const QuadParams& q, const char* what);

// Composite Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre_panels(double a, double b, int panels, std::vector<double>& nodes,
                           std::vector<double>& weights);

}  // namespace cutoff
