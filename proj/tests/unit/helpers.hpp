#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "cutoff/distance.hpp"
#include "cutoff/linalg.hpp"

namespace cutoff::testing {

inline cd empirical_charfn(const Mat& samples, const Vec& u) {
  cd s = 0.0;
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    const double a = u.dot(samples.col(j));
    s += cd(std::cos(a), std::sin(a));
  }
  return s / static_cast<double>(samples.cols());
}

// Two-sample check: the bias-corrected histogram distance is within its noise band.
inline bool same_law(const Mat& A, const Mat& B, double floor = 0.01) {
  const TVEstimate e = tv_hist(A, B);
  return e.value <= 3.0 * e.ci + floor;
}

inline Vec vec(std::initializer_list<double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x(i++) = a;
  return x;
}

inline Mat row(const std::vector<double>& v) {
  Mat m(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

}  // namespace cutoff::testing
