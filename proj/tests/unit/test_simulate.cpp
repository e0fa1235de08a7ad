#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "cutoff/distance.hpp"
#include "cutoff/errors.hpp"
#include "cutoff/simulate.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cutoff;
using cutoff::testing::empirical_charfn;
using cutoff::testing::same_law;
using cutoff::testing::vec;

namespace {

VectorFieldModel fput1() {
  Mat A(1, 1), B(1, 1);
  A << 1.0;
  B << 1.0;
  return VectorFieldModel::fput(A, B);
}

VectorFieldModel scalar_linear(int d, double c) { return VectorFieldModel::linear(c * Mat::Identity(d, d)); }

double median(std::vector<double> v) {
  const std::size_t k = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(k), v.end());
  return v[k];
}

}  // namespace

TEST_SUITE("simulate") {
  TEST_CASE("zero noise reproduces the flow") {
    const VectorFieldModel vf = fput1();
    const LevyMeasureSpec spec = make_isotropic_stable(1, 1.5, 1.0, 1.0);
    const std::vector<double> grid{0.5, 1.0, 3.0};
    RngStream rng(3, 0);
    const PathEnsemble e = simulate_X(vf, spec, 0.0, vec({2.0}), grid, 5, rng);
    // x' = -x - x^3 has phi_t^2 = x^2 e^{-2t} / (1 + x^2 (1 - e^{-2t})).
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double q = std::exp(-2.0 * grid[k]);
      const double phi = 2.0 * std::sqrt(q / (1.0 + 4.0 * (1.0 - q)));
      for (int p = 0; p < 5; ++p) CHECK(e.endpoints[k](0, p) == doctest::Approx(phi).epsilon(1e-7));
    }
  }

  TEST_CASE("linear marginal matches the OU characteristic function") {
    Mat Q(2, 2);
    Q << 1.0, 0.5, -0.5, 1.0;
    const VectorFieldModel vf = VectorFieldModel::linear(Q);
    const LevyMeasureSpec spec = make_isotropic_stable(2, 1.5, 1.0, 1.0);
    const double eps = 0.5, t = 1.0;
    const Vec x = vec({1.0, 0.0});
    const int n = 20000;
    SimOptions opts;
    opts.dt = 2e-3;
    RngStream rng(4, 0);
    const PathEnsemble e = simulate_X(vf, spec, eps, x, {t}, n, rng, opts);
    // exp(i<z, e^{-Qt} x>) * exp(-K eps^a int_0^t |e^{-Q^T s} z|^a ds); e^{-Q^T s} is e^{-s} times a rotation.
    const Vec m = (-Q * t).exp() * x;
    for (const Vec& z : {vec({0.7, 0.0}), vec({0.0, 1.2}), vec({-0.8, 0.9})}) {
      const double integral = std::pow(z.norm(), 1.5) * (1.0 - std::exp(-1.5 * t)) / 1.5;
      const cd truth = std::exp(cd(0.0, z.dot(m))) * std::exp(-std::pow(eps, 1.5) * integral);
      CHECK(std::abs(empirical_charfn(e.endpoints[0], z) - truth) < 4.0 / std::sqrt(n));
      CHECK(std::abs(ou_marginal_charfn(Q, spec, eps, x, t, z) - truth) < 1e-8);
    }
  }

  TEST_CASE("sup deviation from the flow shrinks linearly in eps") {
    const VectorFieldModel vf = fput1();
    const LevyMeasureSpec spec = make_isotropic_stable(1, 1.5, 1.0, 1.0);
    SimOptions opts;
    opts.track_sup_deviation = true;
    std::vector<double> med;
    for (double eps : {0.1, 0.01}) {
      RngStream rng(5, 0);
      const PathEnsemble e = simulate_X(vf, spec, eps, vec({1.0}), {2.0}, 2000, rng, opts);
      REQUIRE(e.sup_deviation.size() == 2000u);
      med.push_back(median(e.sup_deviation));
    }
    CHECK(med[1] < med[0]);
    CHECK(med[0] / med[1] > 5.0);
    CHECK(med[0] / med[1] < 20.0);
  }

  TEST_CASE("coupled processes agree for a linear field") {
    const VectorFieldModel vf = scalar_linear(2, 0.8);
    const LevyMeasureSpec spec = make_isotropic_stable(2, 1.2, 1.0, 1.0);
    RngStream rng(6, 0);
    const CoupledEnsembles c = simulate_coupled(vf, spec, 0.3, vec({1.0, -1.0}), {0.5, 2.0}, 500, rng);
    CHECK(c.max_gap < 1e-12);
    for (std::size_t k = 0; k < 2; ++k) CHECK((c.X.endpoints[k] - c.Y.endpoints[k]).norm() < 1e-12);
  }

  TEST_CASE("coupled gap is second order in eps for fput") {
    const VectorFieldModel vf = fput1();
    const LevyMeasureSpec spec = make_isotropic_stable(1, 1.5, 1.0, 1.0);
    std::vector<double> scaled;
    for (double eps : {0.1, 0.05, 0.02}) {
      RngStream rng(7, 0);
      const CoupledEnsembles c = simulate_coupled(vf, spec, eps, vec({1.0}), {1.0}, 4000, rng);
      std::vector<double> g(4000);
      for (int p = 0; p < 4000; ++p) g[p] = std::abs(c.X.endpoints[0](0, p) - c.Y.endpoints[0](0, p));
      scaled.push_back(median(g) / (eps * eps));
    }
    for (double s : scaled) CHECK(s > 0.0);
    CHECK(scaled[1] / scaled[0] == doctest::Approx(1.0).epsilon(0.3));
    CHECK(scaled[2] / scaled[0] == doctest::Approx(1.0).epsilon(0.3));
  }

  TEST_CASE("exact stationary sampler matches the closed form") {
    const double c = 1.3, K = 1.0, alpha = 1.5, eps = 0.4;
    const Mat J = c * Mat::Identity(2, 2);
    const LevyMeasureSpec spec = make_isotropic_stable(2, alpha, K, 1.0);
    const int n = 100000;
    RngStream rng(8, 0);
    const PathEnsemble e = simulate_Z_stationary(J, spec, eps, n, rng, 1e-8, {}, ZinfMethod::exact_if_available);
    CHECK(e.tag == ProcessTag::Zinf);
    REQUIRE(e.endpoints.size() == 1u);
    for (const Vec& z : {vec({1.0, 0.0}), vec({1.5, -2.0})}) {
      const cd truth = std::exp(-K * std::pow(eps * z.norm(), alpha) / (c * alpha));
      CHECK(std::abs(empirical_charfn(e.endpoints[0], z) - truth) < 4.0 / std::sqrt(n));
      CHECK(std::abs(ou_stationary_charfn(J, spec, eps, z) - truth) < 1e-9);
    }
  }

  TEST_CASE("simulated stationary law matches the closed form") {
    const double c = 1.0, alpha = 1.5, eps = 0.5;
    const Mat J = c * Mat::Identity(1, 1);
    const LevyMeasureSpec spec = make_isotropic_stable(1, alpha, 1.0, 1.0);
    const int n = 10000;
    RngStream rng(9, 0);
    const PathEnsemble e = simulate_Z_stationary(J, spec, eps, n, rng, 1e-4);
    for (double u : {0.5, 2.0}) {
      const double truth = std::exp(-std::pow(eps * u, alpha) / (c * alpha));
      CHECK(std::abs(empirical_charfn(e.endpoints[0], vec({u})) - truth) < 4.0 / std::sqrt(n) + 0.01);
    }
  }

  TEST_CASE("stationary samples scale with eps") {
    const Mat J = 2.0 * Mat::Identity(2, 2);
    const LevyMeasureSpec spec = make_isotropic_stable(2, 1.7, 1.0, 1.0);
    RngStream r1(10, 0), r2(10, 0);
    const PathEnsemble a = simulate_Z_stationary(J, spec, 0.2, 1000, r1, 1e-8, {}, ZinfMethod::exact_if_available);
    const PathEnsemble b = simulate_Z_stationary(J, spec, 0.4, 1000, r2, 1e-8, {}, ZinfMethod::exact_if_available);
    CHECK((2.0 * a.endpoints[0] - b.endpoints[0]).norm() < 1e-12 * b.endpoints[0].norm());
  }

  TEST_CASE("stationary sampler rejects bad input") {
    const LevyMeasureSpec spec = make_isotropic_stable(2, 1.5, 1.0, 1.0);
    RngStream rng(11, 0);
    CHECK_THROWS_AS(simulate_Z_stationary(-Mat::Identity(2, 2), spec, 0.1, 10, rng), DomainError);
    CHECK_THROWS_AS(simulate_Z_stationary(Mat::Identity(3, 3), spec, 0.1, 10, rng), DimensionMismatch);
    CHECK_THROWS_AS(simulate_Z_stationary(Mat::Identity(2, 2), spec, 0.1, 10, rng, 2.0), InvalidParameter);
  }

  TEST_CASE("gap statistics vanish for a linear field") {
    const VectorFieldModel vf = scalar_linear(1, 1.0);
    const LevyMeasureSpec spec = make_isotropic_stable(1, 1.5, 1.0, 1.0);
    RngStream rng(12, 0);
    const GapStats g = fw_gap_stats(vf, spec, 0.1, vec({1.0}), 2.0, 1000, std::nullopt, rng);
    CHECK(g.exceed == 0);
    CHECK(g.probability == 0.0);
    CHECK(g.threshold == doctest::Approx(std::pow(0.1, 1.5 / 2.0 / 1.5) * 0.1));
  }

  TEST_CASE("infinite threshold is never exceeded") {
    const VectorFieldModel vf = fput1();
    const LevyMeasureSpec spec = make_isotropic_stable(1, 1.5, 1.0, 1.0);
    RngStream rng(13, 0);
    const GapStats g =
        fw_gap_stats(vf, spec, 0.2, vec({1.0}), 1.0, 1000, std::numeric_limits<double>::infinity(), rng);
    CHECK(g.exceed == 0);
    CHECK(g.mean_gap > 0.0);
    CHECK_THROWS_AS(fw_gap_stats(vf, spec, 0.2, vec({1.0}), -1.0, 10, std::nullopt, rng), InvalidParameter);
  }

  TEST_CASE("Wilson interval") {
    double lo = 0.0, hi = 0.0;
    wilson_interval(0, 100, lo, hi);
    CHECK(lo == 0.0);
    CHECK(hi == doctest::Approx(0.036995).epsilon(1e-4));
    wilson_interval(50, 100, lo, hi);
    CHECK(lo == doctest::Approx(0.40383).epsilon(1e-4));
    CHECK(hi == doctest::Approx(0.59617).epsilon(1e-4));
    wilson_interval(0, 0, lo, hi);
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
  }

  TEST_CASE("noiseless moment audit passes with C = 0") {
    const VectorFieldModel vf = fput1();
    const LevyMeasureSpec spec = make_isotropic_stable(1, 1.5, 1.0, 1.0);
    RngStream rng(14, 0);
    const PathEnsemble e = simulate_X(vf, spec, 0.0, vec({1.5}), {0.5, 1.0, 4.0}, 3, rng);
    const MomentAudit a = moment_audit(e, 0.7, vf, 0.0, 0.0, 1.0);
    CHECK(a.pass);
    CHECK_FALSE(a.clamped);
    for (const MomentRow& r : a.rows) CHECK(r.moment < r.bound);
  }

  TEST_CASE("moment audit clamps gamma") {
    const VectorFieldModel vf = fput1();
    const LevyMeasureSpec spec = make_isotropic_stable(1, 1.5, 1.0, 1.0);
    RngStream rng(15, 0);
    const PathEnsemble e = simulate_X(vf, spec, 0.0, vec({1.0}), {1.0}, 2, rng);
    const MomentAudit a = moment_audit(e, 0.9, vf, 0.0, 0.0, 0.5);
    CHECK(a.clamped);
    CHECK(a.gamma == 0.5);
  }

  TEST_CASE("calibrated constant bounds a fresh run from the origin") {
    const VectorFieldModel vf = fput1();
    const LevyMeasureSpec spec = make_isotropic_stable(1, 1.5, 1.0, 1.0);
    for (double eps : {0.1, 0.01}) {
      RngStream cal(16, 0), run(17, 0);
      const double C = calibrate_moment_constant(vf, spec, eps, 0.8, 10.0, 2000, cal);
      CHECK(C > 0.0);
      const PathEnsemble e = simulate_X(vf, spec, eps, vec({0.0}), {1.0, 5.0, 10.0}, 2000, run);
      CHECK(moment_audit(e, 0.8, vf, eps, C, 1.0).pass);
    }
  }

  TEST_CASE("linear plateau moment scales as eps^gamma") {
    const VectorFieldModel vf = scalar_linear(1, 1.0);
    const LevyMeasureSpec spec = make_isotropic_stable(1, 1.5, 1.0, 1.0);
    const double gamma = 0.6;
    RngStream r1(18, 0), r2(18, 0);
    const PathEnsemble a = simulate_X(vf, spec, 0.1, vec({0.0}), {12.0}, 2000, r1);
    const PathEnsemble b = simulate_X(vf, spec, 0.05, vec({0.0}), {12.0}, 2000, r2);
    const double ma = empirical_moments(a, gamma)[0].first;
    const double mb = empirical_moments(b, gamma)[0].first;
    CHECK(mb / ma == doctest::Approx(std::pow(0.5, gamma)).epsilon(1e-9));
  }

  TEST_CASE("results do not depend on the thread count") {
    const VectorFieldModel vf = fput1();
    const LevyMeasureSpec spec = make_isotropic_stable(1, 1.5, 1.0, 1.0);
    SimOptions one, many;
    one.threads = 1;
    many.threads = 3;
    RngStream r1(19, 0), r2(19, 0);
    const PathEnsemble a = simulate_X(vf, spec, 0.1, vec({1.0}), {1.0, 2.0}, 300, r1, one);
    const PathEnsemble b = simulate_X(vf, spec, 0.1, vec({1.0}), {1.0, 2.0}, 300, r2, many);
    for (std::size_t k = 0; k < 2; ++k) CHECK(a.endpoints[k] == b.endpoints[k]);
  }

  TEST_CASE("stream tags give independent runs") {
    const VectorFieldModel vf = fput1();
    const LevyMeasureSpec spec = make_isotropic_stable(1, 1.5, 1.0, 1.0);
    SimOptions o1, o2;
    o2.stream_tag = 7;
    RngStream r1(20, 0), r2(20, 0);
    const PathEnsemble a = simulate_X(vf, spec, 0.3, vec({1.0}), {1.0}, 5000, r1, o1);
    const PathEnsemble b = simulate_X(vf, spec, 0.3, vec({1.0}), {1.0}, 5000, r2, o2);
    CHECK(a.endpoints[0] != b.endpoints[0]);
    CHECK(same_law(a.endpoints[0], b.endpoints[0], 0.03));
  }

  TEST_CASE("step larger than the window fraction is rejected") {
    const VectorFieldModel vf = fput1();
    const LevyMeasureSpec spec = make_isotropic_stable(1, 1.5, 1.0, 1.0);
    SimOptions opts;
    opts.window = 1.0;
    opts.dt = 0.1;
    RngStream rng(21, 0);
    CHECK_THROWS_AS(simulate_X(vf, spec, 0.1, vec({1.0}), {1.0}, 10, rng, opts), InvalidParameter);
    opts.dt = 0.02;
    CHECK_NOTHROW(simulate_X(vf, spec, 0.1, vec({1.0}), {1.0}, 10, rng, opts));
  }

  TEST_CASE("mismatched inputs are rejected") {
    const VectorFieldModel vf = fput1();
    RngStream rng(22, 0);
    CHECK_THROWS_AS(simulate_X(vf, make_isotropic_stable(2, 1.5, 1.0, 1.0), 0.1, vec({1.0}), {1.0}, 10, rng),
                    DimensionMismatch);
    CHECK_THROWS_AS(simulate_X(vf, make_isotropic_stable(1, 1.5, 1.0, 1.0), 0.1, vec({1.0, 0.0}), {1.0}, 10, rng),
                    DimensionMismatch);
    CHECK_THROWS_AS(simulate_X(vf, make_isotropic_stable(1, 1.5, 1.0, 1.0), 0.1, vec({1.0}), {1.0}, 0, rng),
                    InvalidParameter);
  }

  TEST_CASE("equilibrium pair of a linear field coincides") {
    const VectorFieldModel vf = scalar_linear(1, 1.0);
    const LevyMeasureSpec spec = make_isotropic_stable(1, 1.5, 1.0, 1.0);
    RngStream rng(23, 0);
    const EquilibriumPair p = simulate_equilibrium_pair(vf, spec, 0.1, vec({0.0}), 5.0, 200, rng);
    CHECK((p.longrun - p.linear).norm() < 1e-12);
  }
}
