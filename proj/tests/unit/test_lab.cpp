#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cutoff/errors.hpp"
#include "cutoff/lab/config.hpp"
#include "cutoff/lab/experiments.hpp"
#include "cutoff/lab/expr.hpp"
#include "cutoff/lab/report.hpp"
#include "cutoff/reference_laws.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cutoff;
using namespace cutoff::lab;
using cutoff::testing::vec;

namespace {

const char* kLinearYaml = R"(name: small
system:
  preset: linear
  dim: 1
  linear:
    Q: [[1.0]]
noise:
  kind: isotropic
  alpha: 1.7
  scale: 1.0
  beta: 1.0
experiment:
  x: [1.0]
  eps: [0.1, 0.01]
  deltas: [0.5, 1.5]
  paths: 2000
  equilibrium_paths: 2000
  seed: 7
  sections: [curve]
)";

ExperimentConfig small_linear() {
  ExperimentConfig c = preset_config(SystemPreset::linear);
  c.eps = {0.1, 0.01};
  c.deltas = {0.5, 1.5};
  c.paths = 2000;
  c.equilibrium_paths = 2000;
  c.audit_triples = 20;
  c.sections = {"curve"};
  return c;
}

}  // namespace

TEST_SUITE("lab") {
  TEST_CASE("expressions evaluate arithmetic and functions") {
    CHECK(Expression("1 + 2 * 3")(std::map<std::string, double>{}) == 7.0);
    CHECK(Expression("2 ^ 3 ^ 2")(std::map<std::string, double>{}) == 512.0);
    CHECK(Expression("-x1^2")(std::map<std::string, double>{{"x1", 3.0}}) == -9.0);
    const Expression e("sqrt(x2) + exp(0) * log(x1) - abs(-2) + tanh(0) + sin(0) + cos(0)");
    CHECK(e.variables() == std::vector<std::string>{"x2", "x1"});
    CHECK(e(std::vector<double>{4.0, 1.0}) == doctest::Approx(1.0));
    CHECK(eval_in_n("n^(-1/2)", 100.0) == doctest::Approx(0.1));
    CHECK(eval_in_n("(n + 1) / 2", 9.0) == 5.0);
  }

  TEST_CASE("malformed expressions are rejected") {
    CHECK_THROWS(Expression("1 +"));
    CHECK_THROWS(Expression("(1"));
    CHECK_THROWS(Expression("foo(1)"));
    CHECK_THROWS(eval_in_n("m + 1", 2.0));
  }

  TEST_CASE("presets validate and hash stably") {
    for (SystemPreset p : {SystemPreset::linear, SystemPreset::fput, SystemPreset::oscillator_profile,
                           SystemPreset::oscillator_noprofile}) {
      const ExperimentConfig c = preset_config(p);
      CHECK_NOTHROW(c.validate());
      CHECK(c.hash() == preset_config(p).hash());
      CHECK(parse_preset(to_string(p)) == p);
    }
    ExperimentConfig a = preset_config(SystemPreset::linear);
    ExperimentConfig b = a;
    b.seed += 1;
    CHECK(a.hash() != b.hash());
  }

  TEST_CASE("YAML configuration round trip") {
    const ExperimentConfig c = parse_config(kLinearYaml);
    CHECK(c.name == "small");
    CHECK(c.eps == std::vector<double>{0.1, 0.01});
    CHECK(c.paths == 2000);
    CHECK(c.seed == 7u);
    CHECK(c.noise.alpha == 1.7);
    CHECK(c.x.size() == 1);
    CHECK(c.has_section("curve"));
    CHECK_FALSE(c.has_section("tails"));
  }

  TEST_CASE("configuration errors") {
    const std::string base = kLinearYaml;
    CHECK_THROWS_AS(parse_config(base + "bogus: 1\n"), ConfigError);
    std::string s = base;
    s.replace(s.find("eps: [0.1, 0.01]"), 16, "eps: [0.01, 0.1]");
    CHECK_THROWS_AS(parse_config(s), ConfigError);
    s = base;
    s.replace(s.find("eps: [0.1, 0.01]"), 16, "eps: [0.5, 0.01]");
    CHECK_THROWS_AS(parse_config(s), ConfigError);
    s = base;
    s.replace(s.find("deltas: [0.5, 1.5]"), 18, "deltas: [0.5, 0.9]");
    CHECK_THROWS_AS(parse_config(s), ConfigError);
    s = base;
    s.replace(s.find("x: [1.0]"), 8, "x: [1.0, 2.0]");
    CHECK_THROWS_AS(parse_config(s), ConfigError);
    CHECK_THROWS_AS(parse_preset("nope"), ConfigError);
  }

  TEST_CASE("isotonic regression") {
    const auto f = isotonic_decreasing({3.0, 1.0, 2.0});
    REQUIRE(f.size() == 3);
    CHECK(f[0] == 3.0);
    CHECK(f[1] == 1.5);
    CHECK(f[2] == 1.5);
    CHECK(isotonic_decreasing({1.0, 2.0}, {3.0, 1.0}) == std::vector<double>{1.25, 1.25});
    const std::vector<double> mono{5.0, 4.0, 4.0, 1.0};
    CHECK(isotonic_decreasing(mono) == mono);
  }

  TEST_CASE("mixing time") {
    const std::vector<double> t{1.0, 2.0, 3.0, 4.0};
    MixingTime m = mixing_time(t, {0.9, 0.6, 0.2, 0.1}, 0.25);
    CHECK(m.tmix == 3.0);
    CHECK_FALSE(m.censored);
    m = mixing_time(t, {0.9, 0.8, 0.7, 0.6}, 0.25);
    CHECK(m.censored);
    m = mixing_time(t, {0.1, 0.05, 0.0, 0.0}, 0.25);
    CHECK(m.tmix == 1.0);
    CHECK(m.censored);
    // A noisy bump is pooled before the threshold is read.
    m = mixing_time(t, {0.9, 0.2, 0.3, 0.1}, 0.25);
    CHECK(m.tmix == 2.0);
    CHECK_THROWS_AS(mixing_time(t, {0.5}, 0.25), InvalidParameter);
    CHECK_THROWS_AS(mixing_time(t, {0.9, 0.6, 0.2, 0.1}, 1.0), InvalidParameter);
  }

  TEST_CASE("tail fit recovers the exponent of a power tail") {
    std::vector<double> rho, G;
    for (int i = 0; i <= 20; ++i) {
      rho.push_back(-4.0 + 0.1 * i);
      G.push_back(1.0 - 0.3 * std::exp(1.4 * rho.back()));
    }
    const TailFit f = tail_fit(rho, G, -4.0, -2.0);
    CHECK(f.alpha_hat == doctest::Approx(1.4).epsilon(1e-9));
    CHECK_FALSE(f.doubly_exponential);
    CHECK(f.points == 21);
  }

  TEST_CASE("tail fit flags a Gaussian profile") {
    std::vector<double> rho, G;
    for (int i = 0; i <= 40; ++i) {
      rho.push_back(-3.0 + 0.05 * i);
      G.push_back(2.0 * normal_cdf(0.5 * std::exp(-rho.back())) - 1.0);
    }
    CHECK(tail_fit(rho, G, -2.0, -1.0).doubly_exponential);
    rho.assign({-5.0, -4.5, -4.0});
    G.assign(3, 1.0);
    CHECK_THROWS_AS(tail_fit(rho, G, -5.0, -4.0), DomainError);
    CHECK_THROWS_AS(tail_fit(rho, G, -5.0, 0.0), InvalidParameter);
  }

  TEST_CASE("schedule follows the cutoff formula") {
    Lab lab(small_linear());
    CutoffReport r;
    lab.run_spectral(r);
    CHECK(lab.hg().lambda == doctest::Approx(1.0));
    CHECK(lab.hg().ell == 1);
    for (std::size_t i = 0; i < 2; ++i) {
      const double eps = lab.config().eps[i];
      CHECK(lab.schedule(i).t_eps == doctest::Approx(std::log(1.0 / eps)));
    }
  }

  TEST_CASE("starting at the fixed point has no profile") {
    ExperimentConfig c = small_linear();
    c.x = vec({0.0});
    Lab lab(c);
    CutoffReport r;
    lab.run_spectral(r);
    CHECK(lab.hg().degenerate);
    CHECK(r.spectral["profile_verdict"] == "undetermined");
  }

  TEST_CASE("oscillator presets report their verdicts") {
    {
      Lab lab(preset_config(SystemPreset::oscillator_noprofile));
      CutoffReport r;
      lab.run_spectral(r);
      CHECK(r.spectral["normal_growth"]["verdict"] == "profile-refuted");
      CHECK(r.spectral["profile_verdict"] == "window-only");
    }
    {
      Lab lab(preset_config(SystemPreset::oscillator_profile));
      CutoffReport r;
      lab.run_spectral(r);
      CHECK(r.spectral["normal_growth"]["verdict"] == "profile-sufficient");
      CHECK(r.spectral["profile_verdict"] == "profile");
    }
  }

  TEST_CASE("runs are deterministic and CSV headers are fixed") {
    const ExperimentConfig c = small_linear();
    const CutoffReport a = run_tv_curve(c);
    const CutoffReport b = run_tv_curve(c);
    CHECK(a.error.empty());
    CHECK(tv_curve_csv(a) == tv_curve_csv(b));
    CHECK(tv_curve_csv(a).rfind("eps,delta,t,tv,ci,method\n", 0) == 0);
    CHECK(profile_csv(a).rfind("eps,rho,g_hat,ci,g_theory\n", 0) == 0);
    CHECK(mixing_csv(a).rfind("eps,eta,tmix,censored\n", 0) == 0);
    const auto hist = std::count_if(a.curve.begin(), a.curve.end(), [](const CurveCell& x) { return x.method == "hist"; });
    CHECK(static_cast<std::size_t>(hist) == c.eps.size() * c.deltas.size());
    CHECK(a.config_hash == c.hash());
    for (const CurveCell& cell : a.curve) {
      CHECK(cell.tv >= 0.0);
      CHECK(cell.tv <= 1.0);
    }
  }

  TEST_CASE("curve flags are recomputable from the cells") {
    const ExperimentConfig c = small_linear();
    const CutoffReport r = run_tv_curve(c);
    REQUIRE(r.flags.count("curve_below_window_increases"));
    std::map<double, std::vector<const CurveCell*>> by_delta;
    for (const CurveCell& cell : r.curve) {
      if (cell.method == "hist") by_delta[cell.delta].push_back(&cell);
    }
    bool below = true, above = true;
    for (const auto& [delta, cells] : by_delta) {
      REQUIRE(cells.size() == c.eps.size());
      const double sign = delta > 1.0 ? 1.0 : -1.0;
      bool ok = true;
      for (std::size_t i = 1; i < cells.size(); ++i) {
        ok = ok && sign * (cells[i]->tv - cells[i - 1]->tv) <= cells[i]->ci + cells[i - 1]->ci;
      }
      ok = ok && sign * (cells.back()->tv - cells.front()->tv) <= cells.back()->ci + cells.front()->ci;
      (delta > 1.0 ? above : below) = (delta > 1.0 ? above : below) && ok;
    }
    CHECK(r.flags.at("curve_below_window_increases") == below);
    CHECK(r.flags.at("curve_above_window_decreases") == above);
    CHECK(r.exit_code() == (r.all_flags_pass() ? 0 : 1));
  }

  TEST_CASE("number formatting is fixed precision") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1.0 / 3.0) == "0.3333333333");
    CHECK(format_number(INFINITY) == "inf");
  }
}
