#include "cutoff/reference_laws.hpp"

#include <cmath>
#include <numbers>

#include "cutoff/errors.hpp"
#include "cutoff/quadrature.hpp"

namespace cutoff {

namespace {

constexpr double kPi = std::numbers::pi;

void check(double alpha, double sigma) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw InvalidParameter("alpha must lie in (0,2]");
  if (!(sigma > 0.0)) throw InvalidParameter("sigma must be positive");
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

double cauchy_cdf(double x, double scale) { return 0.5 + std::atan(x / scale) / kPi; }

double symmetric_stable_sf(double x, double alpha, double sigma) {
  check(alpha, sigma);
  if (x < 0.0) return 1.0 - symmetric_stable_sf(-x, alpha, sigma);
  if (x == 0.0) return 0.5;
  if (alpha == 1.0) return 0.5 - std::atan(x / sigma) / kPi;
  if (alpha == 2.0) return 0.5 * std::erfc(x / (2.0 * sigma));
  auto f = [&](double u) {
    if (u == 0.0) return 0.0;
    return -std::expm1(-std::pow(sigma * u, alpha)) / u;
  };
  return fourier_sin(f, x).value / kPi;
}

double symmetric_stable_cdf(double x, double alpha, double sigma) {
  return x >= 0.0 ? 1.0 - symmetric_stable_sf(x, alpha, sigma) : symmetric_stable_sf(-x, alpha, sigma);
}

double symmetric_stable_pdf(double x, double alpha, double sigma) {
  check(alpha, sigma);
  if (alpha == 1.0) return sigma / (kPi * (x * x + sigma * sigma));
  if (x == 0.0) return std::tgamma(1.0 + 1.0 / alpha) / (kPi * sigma);
  auto f = [&](double u) { return std::exp(-std::pow(sigma * u, alpha)); };
  return fourier_cos(f, std::abs(x)).value / kPi;
}

}  // namespace cutoff
