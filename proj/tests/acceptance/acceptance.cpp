#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cutoff/distance.hpp"
#include "cutoff/dynamics.hpp"
#include "cutoff/lab/config.hpp"
#include "cutoff/lab/experiments.hpp"
#include "cutoff/levy_model.hpp"
#include "cutoff/reference_laws.hpp"
#include "cutoff/sampling.hpp"
#include "cutoff/simulate.hpp"
#include "cutoff/spectral.hpp"

using namespace cutoff;
using namespace cutoff::lab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

class Detail {
 public:
  template <class T>
  Detail& operator<<(const T& v) {
    os_ << v;
    return *this;
  }
  std::string str() const { return os_.str(); }
  operator std::string() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

// Non-increasing up to the sum of neighbouring confidence half-widths.
bool decreasing_with_slack(const std::vector<double>& v, const std::vector<double>& ci) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[k - 1] + ci[k] + ci[k - 1]) return false;
  }
  return true;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// 1 - 2(1 - F(z / 2)) for a symmetric unimodal law with cdf F.
double shift_tv_1d(double z, double alpha, double sigma) {
  return 1.0 - 2.0 * symmetric_stable_sf(std::abs(z) / 2.0, alpha, sigma);
}

// Scale of the stationary law of dZ = -Z dt + dL for one-dimensional exponent -K|u|^alpha.
double unit_ou_sigma(const LevyMeasureSpec& spec) {
  const StableLaw law = stable_limit(spec);
  return std::pow(law.K / spec.alpha, 1.0 / spec.alpha);
}

Outcome schedule_formula() {
  const double a = cutoff_time(2.0, 3, 1e-2);
  const long double L = std::log(100.0L);
  const double oracle = static_cast<double>(L / 2.0L + 2.0L / 2.0L * std::log(L));
  const double b = cutoff_time(1.0, 1, std::exp(-5.0));
  bool ok = std::abs(a - oracle) <= 1e-12 && std::abs(a - 3.829764718802) <= 1e-11 && std::abs(b - 5.0) <= 1e-12;

  HGData hg;
  hg.lambda = 0.7;
  hg.ell = 2;
  hg.m = 1;
  hg.omega = {0.0};
  hg.theta = {0.0};
  hg.v = {CVec::Ones(1)};
  const std::vector<double> ladder = preset_config(SystemPreset::linear).eps;
  double prev = -1.0, dev = 0.0;
  bool monotone = true;
  for (double eps : ladder) {
    const CutoffSchedule s = cutoff_schedule(hg, eps);
    const long double le = std::log(1.0L / eps);
    const double want = static_cast<double>(le / 0.7L + 1.0L / 0.7L * std::log(le));
    dev = std::max(dev, std::abs(s.t_eps - want));
    monotone = monotone && s.t_eps > prev;
    prev = s.t_eps;
  }
  ok = ok && dev <= 1e-12 && monotone;
  return {ok, Detail() << "t(2,3,1e-2)=" << fmt("%.12f", a) << " ladder dev=" << dev
                       << " monotone=" << monotone};
}

Outcome linear_cutoff() {
  ExperimentConfig c = preset_config(SystemPreset::linear);
  c.eps = {1e-3};
  c.deltas = {0.5, 1.5};
  c.paths = 200000;
  c.equilibrium_paths = 200000;
  c.equilibrium = EquilibriumMode::eps_zinf;
  c.sections = {"curve"};
  Lab lab(c);
  CutoffReport r;
  lab.run_tv_curve(r);
  std::map<std::pair<double, std::string>, double> cell;
  for (const auto& e : r.curve) cell[{e.delta, e.method}] = e.tv;
  const double h05 = cell[{0.5, "hist"}], h15 = cell[{1.5, "hist"}];
  if (!cell.count({0.5, "fourier"}) || !cell.count({1.5, "fourier"})) return {false, "Fourier oracle unavailable"};
  const double f05 = cell[{0.5, "fourier"}], f15 = cell[{1.5, "fourier"}];
  const bool ok = h05 >= 0.8 && h15 <= 0.2 && std::abs(h05 - f05) <= 0.03 && std::abs(h15 - f15) <= 0.03;
  return {ok, Detail() << "TV(0.5t)=" << fmt("%.4f", h05) << " [fourier " << fmt("%.4f", f05) << "] TV(1.5t)="
                       << fmt("%.4f", h15) << " [fourier " << fmt("%.4f", f15) << "]"};
}

Outcome profile_reproduction() {
  ExperimentConfig c = preset_config(SystemPreset::fput);
  c.eps = {1e-3};
  c.rhos.clear();
  for (int k = 0; k <= 24; ++k) c.rhos.push_back(-3.0 + 0.25 * k);
  c.profile_paths = 200000;
  c.equilibrium_paths = 200000;
  c.equilibrium = EquilibriumMode::eps_zinf;
  c.scheme = Scheme::strang;
  c.sections = {"profile"};
  Lab lab(c);
  CutoffReport r;
  lab.run_profile(r);
  // b(x) = x + x^3 from x0 = 1: e^t phi_t -> x0 / sqrt(1 + x0^2).
  const double v = 1.0 / std::sqrt(2.0);
  const double sigma = unit_ou_sigma(lab.noise());
  double sup = 0.0, worst = 0.0;
  for (const auto& p : r.profile) {
    const double g = shift_tv_1d(std::exp(-p.rho) * v, lab.noise().alpha, sigma);
    if (std::abs(p.g_hat - g) > sup) {
      sup = std::abs(p.g_hat - g);
      worst = p.rho;
    }
  }
  const bool ok = r.profile.size() == c.rhos.size() && sup <= 0.05;
  return {ok, Detail() << "sup|G_hat - overlay|=" << fmt("%.4f", sup) << " at rho=" << worst << " over "
                       << r.profile.size() << " points"};
}

Outcome tail_exponent() {
  ExperimentConfig c = preset_config(SystemPreset::linear);
  c.noise.alpha = 1.8;
  c.eps = {1e-3};
  c.sections = {"tails"};
  Lab lab(c);
  CutoffReport r;
  lab.run_tails(r);
  if (!r.tails) return {false, "no tail fit"};
  const double sigma = unit_ou_sigma(lab.noise());
  std::vector<double> rho, G;
  for (int k = 0; k <= 20; ++k) {
    rho.push_back(-4.0 + 0.1 * k);
    G.push_back(shift_tv_1d(std::exp(-rho.back()), 1.8, sigma));
  }
  const TailFit own = tail_fit(rho, G, -4.0, -2.0);
  const double a = r.tails->alpha_hat;
  const bool ok = std::abs(a - 1.8) <= 0.18 && std::abs(own.alpha_hat - 1.8) <= 0.18 && !r.tails->doubly_exponential;
  return {ok, Detail() << "alpha_hat=" << fmt("%.4f", a) << " (closed-form overlay " << fmt("%.4f", own.alpha_hat)
                       << ")"};
}

Outcome profile_dichotomy() {
  ExperimentConfig p = preset_config(SystemPreset::oscillator_profile);
  p.rhos = {-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0};
  p.profile_paths = 200000;
  p.equilibrium_paths = 200000;
  p.equilibrium = EquilibriumMode::eps_zinf;
  p.sections = {"profile"};
  Lab lp(p);
  CutoffReport rp;
  lp.run_spectral(rp);
  const std::string growth_p = rp.spectral["normal_growth"]["verdict"].get<std::string>();
  lp.run_profile(rp);
  const double spread = rp.profile_summary["spread"].get<double>();

  ExperimentConfig q = preset_config(SystemPreset::oscillator_noprofile);
  Lab lq(q);
  CutoffReport rq;
  lq.run_spectral(rq);
  const std::string growth_q = rq.spectral["normal_growth"]["verdict"].get<std::string>();
  const std::string kind_q = rq.spectral["omega_set"]["kind"].get<std::string>();
  const double om_spread = rq.spectral["omega_set"]["spread"].get<double>();
  const double theta = lq.hg().theta.empty() ? 0.0 : lq.hg().theta.front();
  const bool irrational = rational_denominator(theta / M_PI) == 0;

  const bool ok = growth_p == to_string(GrowthVerdict::profile_sufficient) && spread < 0.05 &&
                  growth_q == to_string(GrowthVerdict::profile_refuted) && irrational && om_spread > 0.1;
  return {ok, Detail() << "equal rates: " << growth_p << ", spread=" << fmt("%.4f", spread)
                       << "; unequal rates: " << growth_q << ", omega " << kind_q << " spread=" << fmt("%.4f", om_spread)};
}

Outcome matrix_bounds() {
  std::vector<VectorFieldModel> fields;
  fields.push_back(preset_config(SystemPreset::fput).field());
  {
    Mat A(2, 2), B(2, 2);
    A << 1.0, 0.3, 0.0, 1.0;
    B << 0.5, 0.0, 0.2, 0.7;
    fields.push_back(VectorFieldModel::fput(A, B, GaussianBump{0.1, 0.8}));
  }
  fields.push_back(preset_config(SystemPreset::oscillator_profile).field());
  fields.push_back(preset_config(SystemPreset::oscillator_noprofile).field());
  long triples = 0, violations = 0;
  Detail d;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    RngStream rng(derive_seed(20240601, {6, k}), 0);
    const MatrixBoundReport rep = matrix_bound_audit(fields[k], 1000, rng);
    triples += rep.triples;
    const long v = rep.violations_i + rep.violations_ii + rep.violations_v;
    violations += v;
    d << fields[k].name() << "(d=" << fields[k].dim() << "):" << v << " ";
  }
  d << "violations over " << triples << " triples";
  return {violations == 0 && triples == 4000, d.str()};
}

Outcome fw_gap() {
  const ExperimentConfig c = preset_config(SystemPreset::fput);
  const VectorFieldModel vf = c.field();
  const LevyMeasureSpec spec = c.noise_spec();
  const HGData hg = hg_empirical(vf, c.x, 30.0);
  const std::vector<double> eps{0.2, 0.1, 0.05};
  std::vector<double> lp, le, p;
  Detail d;
  bool positive = true;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const CutoffSchedule s = cutoff_schedule(hg, eps[i]);
    SimOptions o;
    o.dt = s.w_eps / 50.0;
    RngStream rng(derive_seed(c.seed, {7, i}), 0);
    const GapStats g = fw_gap_stats(vf, spec, eps[i], c.x, s.t_eps, 100000, std::nullopt, rng, o);
    p.push_back(g.probability);
    positive = positive && g.probability > 0.0;
    if (g.probability > 0.0) {
      lp.push_back(std::log(g.probability));
      le.push_back(std::log(eps[i]));
    }
    d << "p(" << eps[i] << ")=" << fmt("%.4g", g.probability) << " ";
  }
  const double b = std::min(spec.beta, 1.0);
  const double kappa = b / (1.0 + 2.0 * b);
  const double slope = positive ? ls_slope(le, lp) : 0.0;
  const bool decreasing = p[1] < p[0] && p[2] < p[1];
  const bool ok = positive && decreasing && slope > 0.0 && slope >= kappa / 2.0 && slope <= 2.0 * kappa;
  d << "exponent=" << fmt("%.4f", slope) << " target=" << fmt("%.4f", kappa) << " (x2 band)";
  return {ok, d.str()};
}

Outcome moment_bounds() {
  Detail d;
  bool ok = true;
  std::uint64_t tag = 0;
  for (SystemPreset preset : {SystemPreset::linear, SystemPreset::fput}) {
    const ExperimentConfig c = preset_config(preset);
    const VectorFieldModel vf = c.field();
    const LevyMeasureSpec spec = c.noise_spec();
    const double gamma = std::min(spec.beta, 1.0);
    const HGData hg = hg_empirical(vf, c.x, 30.0);
    const int n = 10000;
    double C = 0.0;
    for (std::size_t i = 0; i < c.eps.size(); ++i) {
      SimOptions o;
      o.dt = cutoff_schedule(hg, c.eps[i]).w_eps / 50.0;
      RngStream rng(derive_seed(c.seed, {8, tag, 0, i}), 0);
      C = std::max(C, calibrate_moment_constant(vf, spec, c.eps[i], gamma, 10.0 / vf.delta(), n, rng, o));
    }
    long violations = 0, rows = 0;
    for (std::size_t i = 0; i < c.eps.size(); ++i) {
      const CutoffSchedule s = cutoff_schedule(hg, c.eps[i]);
      std::vector<double> times;
      for (int k = 1; k <= 16; ++k) times.push_back(3.0 * s.t_eps * k / 16.0);
      SimOptions o;
      o.dt = s.w_eps / 50.0;
      RngStream rng(derive_seed(c.seed, {8, tag, 1, i}), 0);
      const PathEnsemble ens = simulate_X(vf, spec, c.eps[i], c.x, times, n, rng, o);
      const MomentAudit a = moment_audit(ens, gamma, vf, c.eps[i], C, spec.beta);
      for (const auto& row : a.rows) violations += row.ok ? 0 : 1;
      rows += static_cast<long>(a.rows.size());
      ok = ok && a.pass;
    }
    d << to_string(preset) << ": C=" << fmt("%.4f", C) << " violations " << violations << "/" << rows << "; ";
    ++tag;
  }
  d << "gamma=1";
  return {ok, d.str()};
}

// TV between U_n + R_n (R_n uniform on [0, a]) and the uniform law on [0, 1].
double slutsky_oracle(long n, double a) {
  std::vector<std::pair<double, int>> ev;
  ev.reserve(2 * n + 2);
  for (long k = 1; k <= n; ++k) {
    ev.push_back({static_cast<double>(k) / n, +1});
    ev.push_back({static_cast<double>(k) / n + a, -1});
  }
  std::sort(ev.begin(), ev.end());
  double l1 = 0.0, prev = 0.0;
  int cover = 0;
  const auto seg = [&](double lo, double hi) {
    if (hi <= lo) return;
    const double f = cover / (n * a);
    const double in = std::max(0.0, std::min(hi, 1.0) - std::max(lo, 0.0));
    l1 += std::abs(f - 1.0) * in + f * ((hi - lo) - in);
  };
  seg(0.0, ev.front().first);
  prev = ev.front().first;
  for (const auto& [x, s] : ev) {
    seg(prev, x);
    cover += s;
    prev = x;
  }
  return 0.5 * l1;
}

Outcome slutsky() {
  std::vector<double> tv;
  bool ok = true;
  Detail d;
  for (long n : {100L, 1000L, 10000L}) {
    const double a = 1.0 / std::sqrt(static_cast<double>(n));
    const SlutskyResult s = slutsky_demo(n, a);
    const double oracle = slutsky_oracle(n, a);
    ok = ok && s.tv_XnYn_vs_U == 1.0 && std::abs(s.tv_Xn_vs_U - oracle) <= 1e-9;
    tv.push_back(s.tv_Xn_vs_U);
    d << "n=" << n << ": " << fmt("%.6f", s.tv_Xn_vs_U) << " ";
  }
  ok = ok && tv[1] < tv[0] && tv[2] < tv[1] && tv[2] < 0.05;
  d << "tv(X_n+Y_n,U)=1";
  return {ok, d.str()};
}

Outcome short_range() {
  ExperimentConfig c = preset_config(SystemPreset::linear);
  c.noise.profile = ProfileKind::tempered;
  c.noise.tempering = 1.0;
  c.noise.tail.kind = TailKind::none;
  const LevyMeasureSpec spec = c.noise_spec();
  RngStream rng(derive_seed(c.seed, {10}), 0);
  const ShortRangeTable t = short_range_diagnostic(spec, {1.0, 1e-1, 1e-2, 1e-3}, 100000, rng);
  std::vector<double> v, ci;
  Detail d;
  for (const auto& row : t.rows) {
    v.push_back(row.tv_raw);
    ci.push_back(row.ci);
    d << "h=" << row.h << ":" << fmt("%.4f", row.tv_raw) << " ";
  }
  const bool ok = t.rows.size() == 4 && t.decreasing && decreasing_with_slack(v, ci) && v.back() < v.front() &&
                  v.back() < 2.0 * t.noise_floor;
  d << "noise floor=" << fmt("%.4f", t.noise_floor);
  return {ok, d.str()};
}

Outcome tv_calibration() {
  const double truth = std::erf(0.5 / std::sqrt(2.0));
  const int n = 100000;
  int covered = 0;
  for (int rep = 0; rep < 100; ++rep) {
    RngStream rng(derive_seed(11, {static_cast<std::uint64_t>(rep)}), 0);
    Mat A(1, n), B(1, n);
    for (int j = 0; j < n; ++j) {
      A(0, j) = rng.normal();
      B(0, j) = 1.0 + rng.normal();
    }
    HistOptions h;
    h.seed = derive_seed(11, {static_cast<std::uint64_t>(rep), 1});
    const TVEstimate e = tv_hist(A, B, h);
    if (std::abs(e.value - truth) <= e.ci) ++covered;
  }
  return {covered >= 90, Detail() << "covered " << covered << "/100 (truth " << fmt("%.6f", truth) << ")"};
}

Outcome equilibrium_asymptotics() {
  ExperimentConfig c = preset_config(SystemPreset::fput);
  c.equilibrium = EquilibriumMode::both;
  c.equilibrium_paths = 100000;
  c.scheme = Scheme::euler;
  Lab lab(c);
  CutoffReport r;
  lab.run_spectral(r);
  for (std::size_t i = 0; i < c.eps.size(); ++i) lab.equilibrium(i, r);
  std::vector<double> v, ci;
  Detail d;
  for (const auto& e : r.equilibrium) {
    v.push_back(e.tv);
    ci.push_back(e.ci);
    d << fmt("%.4f", e.tv) << " ";
  }
  const bool ok = v.size() == c.eps.size() && decreasing_with_slack(v, ci) && v.back() < v.front() && v.back() < 0.05;
  return {ok, Detail() << "TV(longrun, eps Z_inf) along ladder: " << d.str()};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "cutoff schedule formula", schedule_formula},
      {2, "linear 1D stable OU cutoff", linear_cutoff},
      {3, "profile reproduction (1D gradient)", profile_reproduction},
      {4, "profile tail exponent", tail_exponent},
      {5, "profile vs window dichotomy", profile_dichotomy},
      {6, "matrix flow bounds", matrix_bounds},
      {7, "first-order gap decay", fw_gap},
      {8, "moment bounds", moment_bounds},
      {9, "Slutsky counterexample", slutsky},
      {10, "short-range local limit", short_range},
      {11, "TV estimator calibration", tv_calibration},
      {12, "equilibrium asymptotics", equilibrium_asymptotics},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
