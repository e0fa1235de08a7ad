#pragma once

namespace cutoff {

double normal_cdf(double x);
double normal_pdf(double x);
double cauchy_cdf(double x, double scale = 1.0);
// Symmetric stable law with E exp(iuX) = exp(-sigma^alpha |u|^alpha).
double symmetric_stable_cdf(double x, double alpha, double sigma = 1.0);
double symmetric_stable_pdf(double x, double alpha, double sigma = 1.0);
// P(X > x) for x >= 0, accurate deep into the tail.
double symmetric_stable_sf(double x, double alpha, double sigma = 1.0);

}  // namespace cutoff
