#include <cmath>
#include <vector>

#include "cutoff/errors.hpp"
#include "cutoff/spectral.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cutoff;
using cutoff::testing::vec;

namespace {

Mat osc_J(double d1, double d2, double eta, double a = 0.0) {
  Mat J(2, 2);
  J << 2.0 * d1 + a, eta, -eta, 2.0 * d2 + a;
  return J;
}

HGData scalar_hg(double lambda, int ell) {
  HGData hg;
  hg.lambda = lambda;
  hg.ell = ell;
  hg.m = 1;
  hg.omega = {0.0};
  hg.theta = {0.0};
  hg.v = {CVec::Ones(1)};
  return hg;
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("scalar linearization") {
    Mat J(1, 1);
    J << 1.7;
    const HGData hg = hg_from_linearization(J, vec({-0.4}));
    CHECK(hg.lambda == doctest::Approx(1.7));
    CHECK(hg.ell == 1);
    CHECK(hg.m == 1);
    CHECK(hg.theta[0] == 0.0);
    CHECK(std::abs(hg.v[0](0) - cd(-0.4, 0.0)) < 1e-14);
  }

  TEST_CASE("oscillator eigenstructure") {
    const double d1 = 0.25, d2 = 0.5, eta = 1.0;
    const HGData hg = hg_from_linearization(osc_J(d1, d2, eta), vec({1.0, 0.5}));
    const double disc = std::pow(2.0 * d2 - 2.0 * d1, 2) - 4.0 * eta * eta;
    REQUIRE(disc < 0.0);
    CHECK(hg.lambda == doctest::Approx(d1 + d2).epsilon(1e-12));
    CHECK(hg.ell == 1);
    CHECK(hg.m == 2);
    for (std::size_t k = 0; k < hg.v.size(); ++k) {
      CHECK(std::abs(hg.omega[k]) == doctest::Approx(std::sqrt(-disc) / 2.0).epsilon(1e-12));
      // Eigenvector direction (1, (2(d2 - d1) +- i sqrt(-disc)) / (2 eta)).
      const cd ratio = hg.v[k](1) / hg.v[k](0);
      CHECK(ratio.real() == doctest::Approx((d2 - d1) / eta).epsilon(1e-10));
      CHECK(std::abs(ratio.imag()) == doctest::Approx(std::sqrt(-disc) / (2.0 * eta)).epsilon(1e-10));
    }
    for (double t : {0.0, 0.7, 3.1, 40.0}) CHECK(hg.rotating(t).imag().norm() < 1e-10);
    // e^{lambda t} phi_t approaches the rotating vector.
    const Mat J = osc_J(d1, d2, eta);
    Eigen::EigenSolver<Mat> es(J);
    const double t = 30.0;
    const CMat P = es.eigenvectors();
    const CVec c = P.colPivHouseholderQr().solve(vec({1.0, 0.5}).cast<cd>());
    CVec phi = CVec::Zero(2);
    for (int k = 0; k < 2; ++k) phi += std::exp(-es.eigenvalues()(k) * t) * c(k) * P.col(k);
    CHECK((std::exp(hg.lambda * t) * phi.real() - hg.rotating_real(t)).norm() < 1e-9);
  }

  TEST_CASE("Jordan block chain length") {
    Mat J(2, 2);
    J << 0.8, 1.0, 0.0, 0.8;
    CHECK(hg_from_linearization(J, vec({0.0, 1.0})).ell == 2);
    CHECK(hg_from_linearization(J, vec({1.0, 0.0})).ell == 1);
    // e^{-Jt} e_2 = e^{-0.8 t}(-t, 1): t e^{-lambda t} growth with v = -e_1.
    const HGData hg = hg_from_linearization(J, vec({0.0, 1.0}));
    CHECK(hg.lambda == doctest::Approx(0.8));
    CHECK(std::abs(hg.v[0](0) - cd(-1.0, 0.0)) < 1e-8);
  }

  TEST_CASE("degenerate and non-generic starting points") {
    const HGData z = hg_from_linearization(osc_J(0.5, 0.5, 1.0), Vec::Zero(2));
    CHECK(z.degenerate);
    CHECK_THROWS_AS(cutoff_schedule(z, 0.01), DomainError);
    Mat D(2, 2);
    D << 1.0, 0.0, 0.0, 3.0;
    const HGData e = hg_from_linearization(D, vec({0.0, 2.0}));
    CHECK(e.lambda == doctest::Approx(3.0));
    CHECK(e.zero_components.size() == 1);
    CHECK_FALSE(e.note.empty());
    Mat bad(1, 1);
    bad << -1.0;
    CHECK_THROWS_AS(hg_from_linearization(bad, vec({1.0})), DomainError);
  }

  TEST_CASE("empirical data agree with the linearization on linear fields") {
    Mat Q(2, 2);
    Q << 1.0, 0.3, 0.0, 2.0;
    for (const Mat& J : {Q, osc_J(0.25, 0.5, 1.0), Mat(0.6 * Mat::Identity(1, 1))}) {
      const VectorFieldModel vf = VectorFieldModel::linear(J);
      const Vec x = J.rows() == 1 ? vec({1.0}) : vec({1.0, 0.5});
      const HGData a = hg_from_linearization(J, x);
      const HGData b = hg_empirical(vf, x, 30.0 / a.lambda);
      CHECK(b.lambda == doctest::Approx(a.lambda).epsilon(1e-6));
      CHECK(b.ell == a.ell);
      CHECK(b.provenance == HGProvenance::empirical);
    }
  }

  TEST_CASE("empirical data for a gradient field") {
    Mat A(1, 1), B(1, 1);
    A << 1.0;
    B << 1.0;
    const HGData hg = hg_empirical(VectorFieldModel::fput(A, B), vec({1.0}), 30.0);
    CHECK(hg.ell == 1);
    CHECK(hg.m == 1);
    CHECK(hg.lambda == doctest::Approx(1.0).epsilon(1e-6));
    // e^t phi_t -> x / sqrt(1 + x^2).
    CHECK(hg.v[0](0).real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-5));
    CHECK(omega_set(hg).kind == OmegaKind::singleton);
    CHECK(hg_empirical(VectorFieldModel::fput(A, B), vec({0.0}), 30.0).degenerate);
  }

  TEST_CASE("omega limit sets") {
    Mat J(1, 1);
    J << 1.0;
    const OmegaSet s = omega_set(hg_from_linearization(J, vec({2.0})));
    CHECK(s.kind == OmegaKind::singleton);
    CHECK(s.points.size() == 1);
    CHECK(s.points[0](0) == doctest::Approx(2.0));

    HGData c;
    c.lambda = 1.0;
    c.m = 2;
    const double w = 2.0 * M_PI / 3.0;
    c.omega = {w, -w};
    c.theta = {w, 2.0 * M_PI - w};
    c.v = {CVec(CVec::Constant(2, cd(0.5, -0.2))), CVec(CVec::Constant(2, cd(0.5, 0.2)))};
    const OmegaSet cy = omega_set(c);
    CHECK(cy.kind == OmegaKind::cycle);
    CHECK(cy.cycle_length == 3);
    CHECK(cy.points.size() == 3);

    const OmegaSet eq = omega_set(hg_from_linearization(osc_J(0.5, 0.5, 1.0), vec({1.0, 0.5})));
    CHECK(eq.max_norm - eq.min_norm < 1e-8);
    const OmegaSet ne = omega_set(hg_from_linearization(osc_J(0.25, 0.5, 1.0), vec({1.0, 0.5})));
    CHECK(ne.kind == OmegaKind::torus);
    CHECK(ne.spread() > 0.1);
  }

  TEST_CASE("omega set statistics do not depend on the sampling offset") {
    for (double d1 : {0.5, 0.25}) {
      const HGData hg = hg_from_linearization(osc_J(d1, 0.5, 1.0), vec({1.0, 0.5}));
      const OmegaSet a = omega_set(hg, 4096, std::nullopt, 0.5);
      const OmegaSet b = omega_set(hg, 4096, std::nullopt, 0.123);
      CHECK(std::abs((a.max_norm - a.min_norm) - (b.max_norm - b.min_norm)) < (d1 == 0.5 ? 1e-6 : 1e-2));
    }
  }

  TEST_CASE("normal growth condition") {
    const HGData eq = hg_from_linearization(osc_J(1.0, 1.0, 1.0), vec({1.0, 0.0}));
    const NormalGrowth g = normal_growth(eq);
    CHECK(g.orthogonal);
    CHECK(g.equal_norms);
    CHECK(g.verdict == GrowthVerdict::profile_sufficient);
    for (const auto& v : eq.v) {
      const cd r = v(1) / v(0);
      CHECK(std::abs(r.real()) < 1e-12);
      CHECK(std::abs(std::abs(r.imag()) - 1.0) < 1e-12);
    }
    const NormalGrowth h = normal_growth(hg_from_linearization(osc_J(0.25, 0.5, 1.0), vec({1.0, 0.5})));
    CHECK_FALSE(h.orthogonal);
    CHECK(h.verdict == GrowthVerdict::profile_refuted);
    Mat J(1, 1);
    J << 2.0;
    CHECK(normal_growth(hg_from_linearization(J, vec({1.0}))).verdict == GrowthVerdict::profile_sufficient);
  }

  TEST_CASE("cutoff schedule") {
    const CutoffSchedule a = cutoff_schedule(scalar_hg(1.0, 1), std::exp(-5.0));
    CHECK(a.t_eps == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(a.w_eps == 1.0);
    const CutoffSchedule b = cutoff_schedule(scalar_hg(2.0, 3), 1e-2);
    const long double L = std::log(100.0L);
    CHECK(std::abs(b.t_eps - static_cast<double>(L / 2 + std::log(L))) < 1e-12);
    CHECK(std::abs(b.t_eps - 3.829765) < 1e-6);
    CHECK(b.w_eps == 0.5);
    REQUIRE(b.probe_times.size() == default_delta_grid().size());
    for (std::size_t k = 0; k < b.deltas.size(); ++k) CHECK(b.probe_times[k] == b.deltas[k] * b.t_eps);
    double prev = 0.0;
    for (double e = 0.3; e > 1e-8; e /= 3.0) {
      const double t = cutoff_time(0.5, 2, e);
      CHECK(t > prev);
      prev = t;
    }
    const double gap = cutoff_time(2.0, 2, 1e-9) - cutoff_time(2.0, 2, 2e-9);
    CHECK(gap == doctest::Approx(std::log(2.0) / 2.0).epsilon(0.1));
    CHECK(std::abs(cutoff_time(2.0, 2, 1e-12) - cutoff_time(2.0, 2, 2e-12) - std::log(2.0) / 2.0) < std::abs(gap - std::log(2.0) / 2.0));
    CHECK_THROWS(cutoff_time(1.0, 1, 1.5));
  }

  TEST_CASE("profile existence") {
    Mat J(1, 1);
    J << 1.0;
    const HGData s = hg_from_linearization(J, vec({1.0}));
    CHECK(profile_exists(s, omega_set(s), ZinfModel{}) == ProfileVerdict::profile);
    const HGData eq = hg_from_linearization(osc_J(0.5, 0.5, 1.0), vec({1.0, 0.5}));
    CHECK(profile_exists(eq, omega_set(eq), ZinfModel{}) == ProfileVerdict::profile);
    const HGData ne = hg_from_linearization(osc_J(0.25, 0.5, 1.0), vec({1.0, 0.5}));
    CHECK(profile_exists(ne, omega_set(ne), ZinfModel{}) == ProfileVerdict::window_only);
    CHECK(profile_exists(ne, omega_set(ne), ZinfModel{false, std::nullopt}) == ProfileVerdict::undetermined);
  }

  TEST_CASE("rational angle detection") {
    CHECK(rational_denominator(1.0 / 3.0) == 3);
    CHECK(rational_denominator(0.25) == 4);
    CHECK(rational_denominator(std::sqrt(2.0)) == 0);
    CHECK(rational_denominator(2.0) == 1);
  }
}
