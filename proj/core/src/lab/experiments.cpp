#include "cutoff/lab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>

#include <unsupported/Eigen/MatrixFunctions>

#include "cutoff/errors.hpp"
#include "cutoff/reference_laws.hpp"
#include "cutoff/sampling.hpp"

#ifndef CUTOFF_VERSION
#define CUTOFF_VERSION "0.0.0"
#endif

namespace cutoff::lab {

namespace {

enum Section : std::uint64_t { kAudit = 1, kCurve, kEquilibrium, kProfile, kMixing, kTheory };

// Slack-aware monotonicity: each step may violate by the combined CI half-widths.
bool monotone_with_slack(const std::vector<double>& v, const std::vector<double>& ci, bool decreasing) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    const double step = decreasing ? v[k] - v[k - 1] : v[k - 1] - v[k];
    if (step > ci[k] + ci[k - 1]) return false;
  }
  if (v.size() < 2) return true;
  const double end = decreasing ? v.back() - v.front() : v.front() - v.back();
  return end <= ci.front() + ci.back();
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double min_real_eigenvalue(const Mat& J) {
  Eigen::ComplexEigenSolver<Mat> es(J);
  double m = INFINITY;
  for (Eigen::Index i = 0; i < J.rows(); ++i) m = std::min(m, es.eigenvalues()(i).real());
  return m;
}

nlohmann::json cvec_json(const CVec& v) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  return {{"re", re}, {"im", im}};
}

// Constant c with -log|chi(u)| = c |u|^alpha, probed along the coordinate axes at |u| = 1 / unit.
double decay_constant(const std::function<cd(const Vec&)>& chi, int d, double alpha, double unit) {
  double c = INFINITY;
  for (int i = 0; i < d; ++i) {
    Vec u = Vec::Zero(d);
    u(i) = 1.0 / unit;
    c = std::min(c, -std::log(std::abs(chi(u))) * std::pow(unit, alpha));
  }
  return c;
}

FourierGrid capped_grid(int d, double alpha, double c, double extent, bool& capped) {
  FourierGrid g = fourier_grid_for(d, alpha, 0.5 * c, extent, 1e-12);
  const int cap = d == 1 ? (1 << 20) : (d == 2 ? 1024 : 128);
  capped = g.n > cap;
  if (capped) g.n = cap;
  return g;
}

}  // namespace

std::vector<double> isotonic_decreasing(const std::vector<double>& y, const std::vector<double>& w) {
  struct Block {
    double sum, weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    blocks.push_back({wi * y[i], wi, 1});
    while (blocks.size() > 1) {
      const Block& b = blocks.back();
      const Block& a = blocks[blocks.size() - 2];
      if (a.sum / a.weight >= b.sum / b.weight) break;
      const Block merged{a.sum + b.sum, a.weight + b.weight, a.count + b.count};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.sum / b.weight);
  return out;
}

MixingTime mixing_time(const std::vector<double>& t, const std::vector<double>& tv, double eta) {
  if (t.size() != tv.size() || t.empty()) throw InvalidParameter("mixing curve needs matching nonempty grids");
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidParameter("eta must lie in (0,1)");
  const auto iso = isotonic_decreasing(tv);
  for (std::size_t j = 0; j < iso.size(); ++j) {
    if (iso[j] <= eta) return {t[j], j == 0};
  }
  return {t.back(), true};
}

TailFit tail_fit(const std::vector<double>& rho, const std::vector<double>& G, double lo, double hi) {
  if (rho.size() != G.size()) throw DimensionMismatch("profile grids differ in length");
  if (!(hi <= -1.0 && lo < hi)) throw InvalidParameter("tail window must lie in (-inf, -1]");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] < lo - 1e-12 || rho[i] > hi + 1e-12) continue;
    const double tail = 1.0 - G[i];
    if (!(tail > 1e-12)) throw DomainError("window too deep: 1 - G is below the numeric floor");
    xs.push_back(rho[i]);
    ys.push_back(std::log(tail));
  }
  if (xs.size() < 3) throw InsufficientSamples("tail window needs at least three grid points");
  const auto n = static_cast<Eigen::Index>(xs.size());
  Mat X1(n, 2), X2(n, 3);
  Vec y(n);
  const double mid = 0.5 * (lo + hi);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = xs[i] - mid;
    X1(i, 0) = 1.0;
    X1(i, 1) = r;
    X2(i, 0) = 1.0;
    X2(i, 1) = r;
    X2(i, 2) = r * r;
    y(i) = ys[i];
  }
  const Vec b1 = X1.colPivHouseholderQr().solve(y);
  const Vec b2 = X2.colPivHouseholderQr().solve(y);
  const Vec res = y - X1 * b1;
  TailFit f;
  f.alpha_hat = b1(1);
  f.points = static_cast<int>(n);
  f.window_lo = lo;
  f.window_hi = hi;
  if (n > 2) {
    const double s2 = res.squaredNorm() / static_cast<double>(n - 2);
    const Mat XtX = X1.transpose() * X1;
    f.slope_se = std::sqrt(s2 * XtX.inverse()(1, 1));
  }
  f.curvature = std::abs(2.0 * b2(2)) * (hi - lo) / std::max(std::abs(b2(1)), 1e-300);
  f.doubly_exponential = f.curvature > kDoublyExponentialCurvature;
  return f;
}

AuditSummary hypothesis_audit(const ExperimentConfig& cfg) {
  AuditSummary a;
  const LevyMeasureSpec spec = cfg.noise_spec();
  const VectorFieldModel vf = cfg.field();
  RngStream rng(derive_seed(cfg.seed, {kAudit}), 0);
  bool pass = true;

  const bool alpha_ok = spec.alpha > 1.5 && spec.alpha < 2.0;
  a.detail["alpha_range"] = {{"alpha", spec.alpha}, {"pass", alpha_ok}};
  pass = pass && alpha_ok;

  const auto co = coercivity_audit(vf, cfg.audit_radius, 2000, rng);
  a.detail["coercivity"] = {{"min_quadratic", co.min_quadratic},
                            {"min_monotone", co.min_monotone},
                            {"declared_delta", co.declared_delta},
                            {"pass", co.pass}};
  pass = pass && co.pass;

  const auto mom = verify_moment_hypothesis(spec, spec.beta);
  a.detail["moment"] = {{"beta", spec.beta}, {"value", mom.value}, {"note", mom.note}, {"pass", mom.pass}};
  pass = pass && mom.pass;

  const auto eq = equator_report(spec);
  a.detail["equator"] = {{"essinf_c0", eq.essinf_c0},
                         {"span_rank", eq.span_rank},
                         {"min_directional_mass", eq.min_directional_mass},
                         {"pass", eq.pass}};
  pass = pass && eq.pass;

  nlohmann::json om = nlohmann::json::array();
  bool om_pass = true;
  for (int i = 0; i < spec.dim; ++i) {
    Vec v = Vec::Zero(spec.dim);
    v(i) = 1.0;
    const double C = orey_masuda_bound(spec, v).C_angle;
    v *= 10.0 * std::max(C, 1.0);
    const auto r = orey_masuda_bound(spec, v);
    om.push_back({{"direction", i},
                  {"norm", v.norm()},
                  {"integral", r.integral},
                  {"lower_bound", r.lower_bound},
                  {"status", to_string(r.status)}});
    om_pass = om_pass && r.pass;
  }
  a.detail["orey_masuda"] = {{"directions", om}, {"pass", om_pass}};
  pass = pass && om_pass;

  bool env_ok = true;
  std::string env_note;
  try {
    validate_envelope(spec);
  } catch (const EnvelopeViolation& e) {
    env_ok = false;
    env_note = e.what();
  }
  a.detail["envelope"] = {{"pass", env_ok}, {"note", env_note}};
  pass = pass && env_ok;

  MatrixBoundOptions mo;
  mo.radius = cfg.audit_radius;
  const auto mb = matrix_bound_audit(vf, cfg.audit_triples, rng, mo);
  const bool mb_ok = mb.violations_i == 0 && mb.violations_ii == 0 && mb.violations_v == 0;
  a.detail["matrix_bounds"] = {{"triples", mb.triples},
                               {"violations", {mb.violations_i, mb.violations_ii, mb.violations_v}},
                               {"max_ratio", {mb.max_ratio_i, mb.max_ratio_ii, mb.max_ratio_v}},
                               {"warnings", mb.warnings},
                               {"pass", mb_ok}};
  pass = pass && mb_ok;
  a.detail["pass"] = pass;
  a.pass = pass;
  return a;
}

Lab::Lab(ExperimentConfig cfg)
    : cfg_(std::move(cfg)), vf_(cfg_.field()), spec_(cfg_.noise_spec()), start_(std::chrono::steady_clock::now()) {
  cfg_.validate();
  spec_.validate();
  J_ = vf_.linear_part();
}

RngStream Lab::stream(std::uint64_t section, std::uint64_t index) const {
  return RngStream(derive_seed(cfg_.seed, {section, index}), 0);
}

void Lab::check_budget() const {
  if (cfg_.budget_seconds <= 0.0) return;
  const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  if (el > cfg_.budget_seconds) throw BudgetExceeded("runtime budget of " + format_number(cfg_.budget_seconds) + " s exhausted");
}

void Lab::begin(CutoffReport& r) const {
  if (r.config.is_null()) {
    r.config = cfg_.to_json();
    r.config_hash = cfg_.hash();
    r.seed = cfg_.seed;
    r.version = CUTOFF_VERSION;
    r.generated_at = utc_now();
  }
}

SimOptions Lab::sim_options(std::size_t i) const {
  SimOptions o;
  const double w = schedules_.at(i).w_eps;
  o.dt = cfg_.dt ? *cfg_.dt : w / cfg_.dt_divisor;
  o.window = w;
  o.scheme = cfg_.scheme;
  o.threads = cfg_.threads;
  return o;
}

void Lab::run_audits(CutoffReport& r) {
  begin(r);
  const auto a = hypothesis_audit(cfg_);
  r.audits = a.detail;
  r.audits["forced"] = cfg_.force_audits;
  if (!a.pass) {
    if (!cfg_.force_audits) throw AuditFailure("hypothesis audits failed");
    r.warnings.push_back("hypothesis audits failed; continuing because audits are forced");
  }
}

void Lab::run_spectral(CutoffReport& r) {
  begin(r);
  if (!spectral_done_) {
    const double lmin = min_real_eigenvalue(J_);
    if (!(lmin > 0.0)) throw DomainError("Db(0) must have eigenvalues with positive real part");
    hg_ = vf_.kind() == FieldKind::linear ? hg_from_linearization(J_, cfg_.x)
                                          : hg_empirical(vf_, cfg_.x, 30.0 / lmin);
    HGData timing = hg_;
    if (hg_.degenerate) {
      Vec e = Vec::Zero(vf_.dim());
      e(0) = 1.0;
      timing = hg_from_linearization(J_, e);
      r.warnings.push_back("x = 0: there is no cutoff; probe times use the time scale of x = e_1");
    }
    schedules_.clear();
    for (double e : cfg_.eps) schedules_.push_back(cutoff_schedule(timing, e, cfg_.deltas));
    spectral_done_ = true;
  }
  nlohmann::json s;
  s["provenance"] = to_string(hg_.provenance);
  s["degenerate"] = hg_.degenerate;
  s["note"] = hg_.note;
  if (!hg_.degenerate) {
    s["lambda"] = hg_.lambda;
    s["ell"] = hg_.ell;
    s["tau"] = hg_.tau;
    s["m"] = hg_.m;
    s["omega"] = hg_.omega;
    s["theta"] = hg_.theta;
    nlohmann::json vs = nlohmann::json::array();
    for (const auto& v : hg_.v) vs.push_back(cvec_json(v));
    s["v"] = vs;
    s["fit_residual"] = hg_.fit_residual;
    const OmegaSet om = omega_set(hg_);
    const NormalGrowth ng = normal_growth(hg_);
    const Mat S = 0.5 * (J_ + J_.transpose());
    const double c = S.trace() / vf_.dim();
    const bool scalar_sym = (S - c * Mat::Identity(vf_.dim(), vf_.dim())).norm() <= 1e-10 * std::max(1.0, J_.norm());
    ZinfModel zm;
    zm.rotationally_invariant = vf_.dim() == 1 || (spec_.is_isotropic() && scalar_sym);
    ProfileVerdict pv = profile_exists(hg_, om, zm);
    std::string basis = zm.rotationally_invariant ? "rotationally invariant Z_inf" : "none";
    if (pv == ProfileVerdict::undetermined && spec_.is_isotropic() && ng.verdict == GrowthVerdict::profile_refuted) {
      pv = ProfileVerdict::window_only;
      basis = "isotropic noise with refuted normal growth";
    }
    s["omega_set"] = {{"kind", to_string(om.kind)},
                      {"min_norm", om.min_norm},
                      {"max_norm", om.max_norm},
                      {"spread", om.spread()},
                      {"cycle_length", om.cycle_length}};
    s["normal_growth"] = {{"orthogonal", ng.orthogonal}, {"equal_norms", ng.equal_norms}, {"verdict", to_string(ng.verdict)}};
    s["zinf_rotationally_invariant"] = zm.rotationally_invariant;
    s["profile_verdict"] = to_string(pv);
    s["profile_verdict_basis"] = basis;
  } else {
    s["profile_verdict"] = to_string(ProfileVerdict::undetermined);
  }
  r.spectral = s;
  r.schedules = schedules_;
}

const Mat& Lab::equilibrium(std::size_t i, CutoffReport& r) {
  auto it = mu_.find(i);
  if (it != mu_.end()) return it->second;
  const double eps = cfg_.eps.at(i);
  const SimOptions o = sim_options(i);
  RngStream rng = stream(kEquilibrium, i);
  const double horizon = 3.0 * schedules_.at(i).t_eps + 10.0 / vf_.delta();
  Mat mu;
  switch (cfg_.equilibrium) {
    case EquilibriumMode::eps_zinf:
      mu = simulate_Z_stationary(J_, spec_, eps, cfg_.equilibrium_paths, rng, 1e-8, o).endpoints[0];
      break;
    case EquilibriumMode::longrun:
      mu = simulate_X(vf_, spec_, eps, cfg_.x, {horizon}, cfg_.equilibrium_paths, rng, o).endpoints[0];
      break;
    case EquilibriumMode::both: {
      auto pair = simulate_equilibrium_pair(vf_, spec_, eps, cfg_.x, horizon, cfg_.equilibrium_paths, rng, o);
      HistOptions h;
      h.paired = true;
      const TVEstimate tv = tv_hist(pair.longrun, pair.linear, h);
      r.equilibrium.push_back({eps, horizon, tv.value, tv.ci});
      mu = std::move(pair.longrun);
      break;
    }
  }
  check_budget();
  return mu_.emplace(i, std::move(mu)).first->second;
}

void Lab::run_tv_curve(CutoffReport& r) {
  begin(r);
  if (!spectral_done_) run_spectral(r);
  const std::size_t ne = cfg_.eps.size(), nd = cfg_.deltas.size();
  std::vector<std::vector<double>> tv(nd, std::vector<double>(ne)), ci(nd, std::vector<double>(ne));
  const bool linear = vf_.kind() == FieldKind::linear;
  for (std::size_t i = 0; i < ne; ++i) {
    const double eps = cfg_.eps[i];
    const CutoffSchedule& s = schedules_[i];
    const Mat& mu = equilibrium(i, r);
    RngStream rng = stream(kCurve, i);
    const PathEnsemble ens = simulate_X(vf_, spec_, eps, cfg_.x, s.probe_times, cfg_.paths, rng, sim_options(i));
    for (std::size_t k = 0; k < nd; ++k) {
      HistOptions h;
      h.seed = derive_seed(cfg_.seed, {kCurve, i, k});
      const TVEstimate e = tv_hist(ens.endpoints[k], mu, h);
      r.curve.push_back({eps, s.deltas[k], s.probe_times[k], e.value, e.ci, "hist"});
      tv[k][i] = e.value;
      ci[k][i] = e.ci;
    }
    if (linear && vf_.dim() <= 2) {
      const OuCharFn stat(J_, spec_, eps);
      for (std::size_t k = 0; k < nd; ++k) {
        const double t = s.probe_times[k];
        const OuCharFn marg(J_, spec_, eps, t);
        const Vec shift = (-J_ * t).exp() * cfg_.x;
        const auto chiA = [&](const Vec& u) { return marg.shifted(u, shift); };
        const auto chiB = [&](const Vec& u) { return stat(u); };
        const double c = decay_constant(chiA, vf_.dim(), spec_.alpha, eps);
        const double sigma = std::pow(c, 1.0 / spec_.alpha);
        bool capped = false;
        const FourierGrid g = capped_grid(vf_.dim(), spec_.alpha, c, 1.5 * shift.norm() + 60.0 * sigma, capped);
        if (capped) {
          r.warnings.push_back("Fourier oracle skipped at eps " + format_number(eps) + ", delta " +
                               format_number(s.deltas[k]) + ": lattice too large");
          continue;
        }
        const TVEstimate e = tv_fourier_ou(chiA, chiB, g);
        r.curve.push_back({eps, s.deltas[k], t, e.value, e.ci, "fourier"});
      }
    }
    check_budget();
  }
  bool below = true, above = true;
  for (std::size_t k = 0; k < nd; ++k) {
    if (cfg_.deltas[k] < 1.0) below = below && monotone_with_slack(tv[k], ci[k], false);
    if (cfg_.deltas[k] > 1.0) above = above && monotone_with_slack(tv[k], ci[k], true);
  }
  if (ne >= 2) {
    r.flags["curve_below_window_increases"] = below;
    r.flags["curve_above_window_decreases"] = above;
  }
  if (cfg_.equilibrium == EquilibriumMode::both && !r.equilibrium.empty()) {
    std::vector<double> v, c;
    for (const auto& e : r.equilibrium) {
      v.push_back(e.tv);
      c.push_back(e.ci);
    }
    if (v.size() >= 2) r.flags["equilibrium_decreasing"] = monotone_with_slack(v, c, true) && v.back() < v.front();
    r.flags["equilibrium_within_tolerance"] = v.back() <= cfg_.equilibrium_tol;
  }
}

Vec Lab::profile_shift(double t, double rho) const {
  if (hg_.degenerate) return Vec::Zero(vf_.dim());
  const double scale = std::exp(-rho) * std::exp(-hg_.lambda * hg_.tau) / std::pow(hg_.lambda, hg_.ell - 1);
  return scale * hg_.rotating_real(t);
}

std::pair<double, double> Lab::profile_theory(const Vec& shift) {
  const int d = vf_.dim();
  if (shift.norm() == 0.0) return {0.0, 0.0};
  const OuCharFn zinf(J_, spec_, 1.0);
  if (d == 1 && spec_.exactly_stable() && spec_.symmetric()) {
    if (zinf_sigma_ == 0.0) {
      Vec u(1);
      u(0) = 1.0;
      zinf_sigma_ = std::pow(-std::log(std::abs(zinf(u))), 1.0 / spec_.alpha);
    }
    const double a = spec_.alpha, sg = zinf_sigma_;
    return {tv_shift_unimodal_1d([a, sg](double z) { return symmetric_stable_cdf(z, a, sg); }, shift(0)), 1e-9};
  }
  if (d <= 2) {
    if (!grid_) {
      const auto chi = [&](const Vec& u) { return zinf(u); };
      const double c = decay_constant(chi, d, spec_.alpha, 1.0);
      const double sigma = std::pow(c, 1.0 / spec_.alpha);
      double vmax = 0.0;
      for (const auto& v : hg_.v) vmax += v.norm();
      const double far = std::exp(-std::min(cfg_.rhos.front(), cfg_.tail_lo));
      vmax *= far * std::exp(-hg_.lambda * hg_.tau) / std::pow(hg_.lambda, hg_.ell - 1);
      bool capped = false;
      grid_ = capped_grid(d, spec_.alpha, c, 1.5 * vmax + 60.0 * sigma, capped);
      zinf_char_.resize(grid_->size());
      for (std::size_t j = 0; j < grid_->size(); ++j) zinf_char_[j] = zinf(grid_->point(j));
    }
    std::vector<cd> a(zinf_char_.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
      a[j] = std::exp(cd(0.0, grid_->point(j).dot(shift))) * zinf_char_[j];
    }
    const TVEstimate e = tv_fourier_ou(a, zinf_char_, *grid_, 1e-6);
    return {e.value, e.ci};
  }
  if (!zinf_a_) {
    RngStream rng = stream(kTheory, 0);
    zinf_a_ = simulate_Z_stationary(J_, spec_, 1.0, cfg_.profile_paths, rng).endpoints[0];
    zinf_b_ = simulate_Z_stationary(J_, spec_, 1.0, cfg_.profile_paths, rng).endpoints[0];
  }
  const Mat shifted = zinf_a_->colwise() + shift;
  const TVEstimate e = tv_hist(shifted, *zinf_b_);
  return {e.value, e.ci};
}

void Lab::run_profile(CutoffReport& r) {
  begin(r);
  if (!spectral_done_) run_spectral(r);
  const std::size_t ne = cfg_.eps.size();
  std::map<double, std::vector<double>> by_rho;
  nlohmann::json sup_gap = nlohmann::json::array();
  double last_gap = 0.0;
  for (std::size_t i = 0; i < ne; ++i) {
    const double eps = cfg_.eps[i];
    const CutoffSchedule& s = schedules_[i];
    std::vector<double> rhos, times;
    for (double rho : cfg_.rhos) {
      const double t = s.t_eps + rho * s.w_eps;
      if (t < 0.0) continue;
      rhos.push_back(rho);
      times.push_back(t);
    }
    if (rhos.size() < cfg_.rhos.size()) {
      r.warnings.push_back("profile grid truncated at eps " + format_number(eps) + ": negative times dropped");
    }
    const Mat& mu = equilibrium(i, r);
    RngStream rng = stream(kProfile, i);
    const PathEnsemble ens = simulate_X(vf_, spec_, eps, cfg_.x, times, cfg_.profile_paths, rng, sim_options(i));
    double gap = 0.0;
    for (std::size_t k = 0; k < rhos.size(); ++k) {
      HistOptions h;
      h.seed = derive_seed(cfg_.seed, {kProfile, i, k});
      const TVEstimate e = tv_hist(ens.endpoints[k], mu, h);
      const auto [g, gerr] = profile_theory(profile_shift(times[k], rhos[k]));
      r.profile.push_back({eps, rhos[k], times[k], e.value, e.ci, g, gerr});
      by_rho[rhos[k]].push_back(e.value);
      gap = std::max(gap, std::abs(e.value - g));
    }
    sup_gap.push_back({{"eps", eps}, {"sup_gap", gap}});
    last_gap = gap;
    check_budget();
  }
  double spread = 0.0;
  for (const auto& [rho, vals] : by_rho) {
    if (vals.size() != ne) continue;
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    spread = std::max(spread, *hi - *lo);
  }
  const std::string verdict = r.spectral.value("profile_verdict", std::string("undetermined"));
  r.profile_summary = {{"sup_gap", sup_gap}, {"spread", spread}, {"verdict", verdict}, {"collapse_tolerance", cfg_.collapse_tol}};
  const auto& last = r.profile;
  double g_left = 0.0, g_right = 1.0;
  for (const auto& c : last) {
    if (c.eps != cfg_.eps.back()) continue;
    if (c.rho == cfg_.rhos.front()) g_left = c.g_hat;
    if (c.rho == cfg_.rhos.back()) g_right = c.g_hat;
  }
  if (!hg_.degenerate) {
    r.flags["profile_limits"] = g_left >= 0.9 && g_right <= 0.1;
    if (vf_.dim() == 1) r.flags["profile_overlay"] = last_gap <= cfg_.collapse_tol;
  }
  if (ne >= 2) {
    if (verdict == to_string(ProfileVerdict::profile)) {
      r.flags["profile_collapse"] = spread <= cfg_.collapse_tol;
    } else if (verdict == to_string(ProfileVerdict::window_only)) {
      r.flags["profile_window_only"] = spread > cfg_.collapse_tol;
    }
  }
}

void Lab::run_mixing(CutoffReport& r, const std::vector<double>& etas) {
  begin(r);
  if (!spectral_done_) run_spectral(r);
  const std::size_t ne = cfg_.eps.size();
  const int np = cfg_.mixing_points;
  const double ds = (cfg_.mixing_span_hi - cfg_.mixing_span_lo) / (np - 1);
  std::map<double, std::vector<MixingRatio>> by_eta;
  for (std::size_t i = 0; i < ne; ++i) {
    const double eps = cfg_.eps[i];
    const CutoffSchedule& s = schedules_[i];
    std::vector<double> times(np);
    for (int j = 0; j < np; ++j) times[j] = s.t_eps * (cfg_.mixing_span_lo + ds * j);
    const Mat& mu = equilibrium(i, r);
    RngStream rng = stream(kMixing, i);
    const PathEnsemble ens = simulate_X(vf_, spec_, eps, cfg_.x, times, cfg_.mixing_paths, rng, sim_options(i));
    std::vector<double> tv(np);
    for (int j = 0; j < np; ++j) {
      HistOptions h;
      h.seed = derive_seed(cfg_.seed, {kMixing, i, static_cast<std::uint64_t>(j)});
      h.bootstrap = 0;
      tv[j] = tv_hist(ens.endpoints[j], mu, h).value;
    }
    for (double eta : etas) {
      const MixingTime a = mixing_time(times, tv, eta);
      const MixingTime b = mixing_time(times, tv, 1.0 - eta);
      r.mixing.push_back({eps, eta, a.tmix, a.censored});
      MixingRatio q{eps, eta, a.tmix / b.tmix, s.t_eps * ds / b.tmix, a.censored || b.censored};
      r.ratios.push_back(q);
      by_eta[eta].push_back(q);
    }
    check_budget();
  }
  for (auto& [eta, qs] : by_eta) {
    const std::string name = "mixing_ratio_trend_eta_" + format_number(eta);
    std::vector<double> v, slack;
    for (const auto& q : qs) {
      if (q.censored) continue;
      v.push_back(std::abs(q.ratio - 1.0));
      slack.push_back(q.resolution * std::max(1.0, q.ratio));
    }
    if (v.size() < 2) {
      r.censored.push_back(name);
      continue;
    }
    r.flags[name] = monotone_with_slack(v, slack, true) && v.back() < v.front();
  }
}

void Lab::run_tails(CutoffReport& r) {
  begin(r);
  if (!spectral_done_) run_spectral(r);
  if (hg_.degenerate) {
    r.warnings.push_back("tail fit skipped: no deterministic shift for x = 0");
    return;
  }
  const CutoffSchedule& s = schedules_.back();
  std::vector<double> rho, G;
  const int n = 21;
  for (int k = 0; k < n; ++k) {
    const double q = cfg_.tail_lo + (cfg_.tail_hi - cfg_.tail_lo) * k / (n - 1);
    rho.push_back(q);
    G.push_back(profile_theory(profile_shift(s.t_eps + q * s.w_eps, q)).first);
  }
  TailFit f = tail_fit(rho, G, cfg_.tail_lo, cfg_.tail_hi);
  if (vf_.dim() == 1 && spec_.exactly_stable() && spec_.symmetric()) {
    const double q = cfg_.rhos.back();
    const Vec sh = profile_shift(s.t_eps + q * s.w_eps, q);
    const double g = profile_theory(sh).first;
    const double f0 = symmetric_stable_pdf(0.0, spec_.alpha, zinf_sigma_);
    f.right_edge_ratio = g / (std::abs(sh(0)) * f0);
  }
  r.tails = f;
  if (spec_.exactly_stable()) {
    r.flags["tail_alpha"] = std::abs(f.alpha_hat - spec_.alpha) <= 0.1 * spec_.alpha;
    r.flags["tail_not_doubly_exponential"] = !f.doubly_exponential;
  }
}

CutoffReport Lab::run_all() {
  CutoffReport r;
  begin(r);
  try {
    run_audits(r);
    run_spectral(r);
    if (cfg_.has_section("curve")) run_tv_curve(r);
    if (cfg_.has_section("profile")) run_profile(r);
    if (cfg_.has_section("mixing")) run_mixing(r, cfg_.etas);
    if (cfg_.has_section("tails")) run_tails(r);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

namespace {

CutoffReport single(const ExperimentConfig& cfg, const std::function<void(Lab&, CutoffReport&)>& body) {
  Lab lab(cfg);
  CutoffReport r;
  lab.run_audits(r);
  lab.run_spectral(r);
  body(lab, r);
  return r;
}

}  // namespace

CutoffReport run_tv_curve(const ExperimentConfig& cfg) {
  return single(cfg, [](Lab& l, CutoffReport& r) { l.run_tv_curve(r); });
}

CutoffReport run_profile(const ExperimentConfig& cfg) {
  return single(cfg, [](Lab& l, CutoffReport& r) { l.run_profile(r); });
}

CutoffReport run_mixing(const ExperimentConfig& cfg, const std::vector<double>& etas) {
  return single(cfg, [&](Lab& l, CutoffReport& r) { l.run_mixing(r, etas); });
}

CutoffReport run_all(const ExperimentConfig& cfg) { return Lab(cfg).run_all(); }

}  // namespace cutoff::lab
