#include "cutoff/lab/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "cutoff/errors.hpp"
#include "cutoff/lab/expr.hpp"
#include "cutoff/spectral.hpp"

namespace cutoff::lab {

const char* to_string(SystemPreset p) {
  switch (p) {
    case SystemPreset::linear: return "linear";
    case SystemPreset::fput: return "fput";
    case SystemPreset::oscillator_profile: return "oscillator-profile";
    case SystemPreset::oscillator_noprofile: return "oscillator-noprofile";
    case SystemPreset::custom: return "custom";
  }
  return "?";
}

const char* to_string(EquilibriumMode m) {
  switch (m) {
    case EquilibriumMode::longrun: return "longrun";
    case EquilibriumMode::eps_zinf: return "eps-zinf";
    case EquilibriumMode::both: return "both";
  }
  return "?";
}

const char* to_string(NoiseKind k) { return k == NoiseKind::isotropic ? "isotropic" : "axes"; }

SystemPreset parse_preset(const std::string& s) {
  for (SystemPreset p : {SystemPreset::linear, SystemPreset::fput, SystemPreset::oscillator_profile,
                         SystemPreset::oscillator_noprofile, SystemPreset::custom}) {
    if (s == to_string(p)) return p;
  }
  throw ConfigError("unknown system preset '" + s + "'");
}

namespace {

const std::vector<std::string> kSections = {"curve", "profile", "mixing", "tails"};

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

Vec vec_of(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// ---- YAML helpers ----

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
  if (!node.IsMap()) throw ConfigError(where + " must be a table");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + (where.empty() ? "<root>" : where));
  }
}

template <class T>
T get(const YAML::Node& n, const std::string& where) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for " + where);
  }
}

template <class T>
void read(const YAML::Node& parent, const char* key, T& out, const std::string& where) {
  if (const auto n = parent[key]) out = get<T>(n, where + "." + key);
}

std::vector<double> read_list(const YAML::Node& n, const std::string& where) {
  if (n.IsScalar()) return {get<double>(n, where)};
  if (!n.IsSequence()) throw ConfigError(where + " must be a list");
  std::vector<double> v;
  for (const auto& e : n) v.push_back(get<double>(e, where));
  return v;
}

Vec read_vec(const YAML::Node& n, const std::string& where) {
  const auto v = read_list(n, where);
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Mat read_mat(const YAML::Node& n, const std::string& where) {
  if (n.IsScalar()) return Mat::Constant(1, 1, get<double>(n, where));
  if (!n.IsSequence() || n.size() == 0) throw ConfigError(where + " must be a list of rows");
  const auto rows = static_cast<Eigen::Index>(n.size());
  Eigen::Index cols = -1;
  Mat M;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto row = read_list(n[static_cast<std::size_t>(i)], where);
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      M.resize(rows, cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError(where + " has ragged rows");
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = row[static_cast<std::size_t>(j)];
  }
  return M;
}

void read_bump(const YAML::Node& n, GaussianBump& b, const std::string& where) {
  check_keys(n, {"kappa", "width"}, where);
  read(n, "kappa", b.kappa, where);
  read(n, "width", b.width, where);
}

ProfileKind parse_profile(const std::string& s) {
  for (ProfileKind k : {ProfileKind::pure_stable, ProfileKind::tempered, ProfileKind::lamperti}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown radial profile '" + s + "'");
}

TailKind parse_tail(const std::string& s) {
  for (TailKind k : {TailKind::none, TailKind::point_mass, TailKind::uniform_shell, TailKind::pareto,
                     TailKind::stable_extension}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown tail kind '" + s + "'");
}

Scheme parse_scheme(const std::string& s) {
  if (s == "euler") return Scheme::euler;
  if (s == "strang") return Scheme::strang;
  throw ConfigError("unknown scheme '" + s + "'");
}

EquilibriumMode parse_mode(const std::string& s) {
  for (EquilibriumMode m : {EquilibriumMode::longrun, EquilibriumMode::eps_zinf, EquilibriumMode::both}) {
    if (s == to_string(m)) return m;
  }
  throw ConfigError("unknown equilibrium mode '" + s + "'");
}

void apply_system(const YAML::Node& n, SystemConfig& s) {
  check_keys(n, {"preset", "dim", "linear", "fput", "oscillator", "custom"}, "system");
  read(n, "dim", s.dim, "system");
  if (const auto l = n["linear"]) {
    check_keys(l, {"Q"}, "system.linear");
    if (l["Q"]) s.Q = read_mat(l["Q"], "system.linear.Q");
  }
  if (const auto f = n["fput"]) {
    check_keys(f, {"A", "B", "bump"}, "system.fput");
    if (f["A"]) s.A = read_mat(f["A"], "system.fput.A");
    if (f["B"]) s.B = read_mat(f["B"], "system.fput.B");
    if (f["bump"]) read_bump(f["bump"], s.bump, "system.fput.bump");
  }
  if (const auto o = n["oscillator"]) {
    check_keys(o, {"delta1", "delta2", "eta", "potential"}, "system.oscillator");
    read(o, "delta1", s.delta1, "system.oscillator");
    read(o, "delta2", s.delta2, "system.oscillator");
    read(o, "eta", s.eta, "system.oscillator");
    if (const auto p = o["potential"]) {
      check_keys(p, {"a", "quartic", "well"}, "system.oscillator.potential");
      read(p, "a", s.potential.a, "system.oscillator.potential");
      read(p, "quartic", s.potential.quartic, "system.oscillator.potential");
      if (p["well"]) read_bump(p["well"], s.potential.well, "system.oscillator.potential.well");
    }
  }
  if (const auto c = n["custom"]) {
    check_keys(c, {"drift", "delta"}, "system.custom");
    if (const auto d = c["drift"]) {
      if (!d.IsSequence()) throw ConfigError("system.custom.drift must be a list of expressions");
      s.drift.clear();
      for (const auto& e : d) s.drift.push_back(get<std::string>(e, "system.custom.drift"));
    }
    read(c, "delta", s.declared_delta, "system.custom");
  }
}

void apply_noise(const YAML::Node& n, NoiseConfig& z) {
  check_keys(n, {"kind", "alpha", "scale", "beta", "profile", "tail"}, "noise");
  if (n["kind"]) {
    const auto k = get<std::string>(n["kind"], "noise.kind");
    if (k == "isotropic") z.kind = NoiseKind::isotropic;
    else if (k == "axes") z.kind = NoiseKind::axes;
    else throw ConfigError("unknown noise kind '" + k + "'");
  }
  read(n, "alpha", z.alpha, "noise");
  read(n, "scale", z.scale, "noise");
  read(n, "beta", z.beta, "noise");
  if (const auto p = n["profile"]) {
    check_keys(p, {"kind", "rate"}, "noise.profile");
    if (p["kind"]) z.profile = parse_profile(get<std::string>(p["kind"], "noise.profile.kind"));
    read(p, "rate", z.tempering, "noise.profile");
  }
  if (const auto t = n["tail"]) {
    check_keys(t, {"kind", "rate", "point", "r_max", "index", "intensity"}, "noise.tail");
    if (t["kind"]) z.tail.kind = parse_tail(get<std::string>(t["kind"], "noise.tail.kind"));
    read(t, "rate", z.tail.rate, "noise.tail");
    read(t, "r_max", z.tail.r_max, "noise.tail");
    read(t, "index", z.tail.index, "noise.tail");
    read(t, "intensity", z.tail.intensity, "noise.tail");
    if (t["point"]) z.tail.point = read_vec(t["point"], "noise.tail.point");
  }
}

void apply_experiment(const YAML::Node& n, ExperimentConfig& c) {
  check_keys(n,
             {"eps", "x", "deltas", "rhos", "paths", "equilibrium_paths", "profile_paths", "mixing_paths", "dt",
              "seed", "threads", "budget_seconds", "force_audits", "equilibrium", "mixing", "tails", "profile",
              "audits", "sections"},
             "experiment");
  if (n["eps"]) c.eps = read_list(n["eps"], "experiment.eps");
  if (n["x"]) c.x = read_vec(n["x"], "experiment.x");
  if (n["deltas"]) c.deltas = read_list(n["deltas"], "experiment.deltas");
  if (n["rhos"]) c.rhos = read_list(n["rhos"], "experiment.rhos");
  read(n, "paths", c.paths, "experiment");
  read(n, "equilibrium_paths", c.equilibrium_paths, "experiment");
  read(n, "profile_paths", c.profile_paths, "experiment");
  read(n, "mixing_paths", c.mixing_paths, "experiment");
  read(n, "seed", c.seed, "experiment");
  read(n, "threads", c.threads, "experiment");
  read(n, "budget_seconds", c.budget_seconds, "experiment");
  read(n, "force_audits", c.force_audits, "experiment");
  if (const auto d = n["dt"]) {
    check_keys(d, {"divisor", "value", "scheme"}, "experiment.dt");
    read(d, "divisor", c.dt_divisor, "experiment.dt");
    if (d["value"]) c.dt = get<double>(d["value"], "experiment.dt.value");
    if (d["scheme"]) c.scheme = parse_scheme(get<std::string>(d["scheme"], "experiment.dt.scheme"));
  }
  if (const auto e = n["equilibrium"]) {
    check_keys(e, {"mode", "tolerance"}, "experiment.equilibrium");
    if (e["mode"]) c.equilibrium = parse_mode(get<std::string>(e["mode"], "experiment.equilibrium.mode"));
    read(e, "tolerance", c.equilibrium_tol, "experiment.equilibrium");
  }
  if (const auto m = n["mixing"]) {
    check_keys(m, {"etas", "points", "span"}, "experiment.mixing");
    if (m["etas"]) c.etas = read_list(m["etas"], "experiment.mixing.etas");
    read(m, "points", c.mixing_points, "experiment.mixing");
    if (m["span"]) {
      const auto s = read_list(m["span"], "experiment.mixing.span");
      if (s.size() != 2) throw ConfigError("experiment.mixing.span needs two values");
      c.mixing_span_lo = s[0];
      c.mixing_span_hi = s[1];
    }
  }
  if (const auto t = n["tails"]) {
    check_keys(t, {"window"}, "experiment.tails");
    if (t["window"]) {
      const auto w = read_list(t["window"], "experiment.tails.window");
      if (w.size() != 2) throw ConfigError("experiment.tails.window needs two values");
      c.tail_lo = w[0];
      c.tail_hi = w[1];
    }
  }
  if (const auto p = n["profile"]) {
    check_keys(p, {"collapse_tolerance"}, "experiment.profile");
    read(p, "collapse_tolerance", c.collapse_tol, "experiment.profile");
  }
  if (const auto a = n["audits"]) {
    check_keys(a, {"radius", "triples"}, "experiment.audits");
    read(a, "radius", c.audit_radius, "experiment.audits");
    read(a, "triples", c.audit_triples, "experiment.audits");
  }
  if (const auto s = n["sections"]) {
    if (!s.IsSequence()) throw ConfigError("experiment.sections must be a list");
    c.sections.clear();
    for (const auto& e : s) c.sections.push_back(get<std::string>(e, "experiment.sections"));
  }
}

nlohmann::json mat_json(const Mat& M) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    j.push_back(row);
  }
  return j;
}

nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

bool ExperimentConfig::has_section(const std::string& s) const {
  return std::find(sections.begin(), sections.end(), s) != sections.end();
}

ExperimentConfig preset_config(SystemPreset p) {
  ExperimentConfig c;
  c.name = to_string(p);
  c.system.preset = p;
  c.deltas = default_delta_grid();
  c.rhos = linspace(-4.0, 4.0, 17);
  switch (p) {
    case SystemPreset::linear:
      c.system.dim = 1;
      c.system.Q = Mat::Identity(1, 1);
      c.x = vec_of({1.0});
      break;
    case SystemPreset::fput:
      c.system.dim = 1;
      c.system.A = Mat::Identity(1, 1);
      c.system.B = Mat::Identity(1, 1);
      c.x = vec_of({1.0});
      c.equilibrium = EquilibriumMode::both;
      break;
    case SystemPreset::oscillator_profile:
    case SystemPreset::oscillator_noprofile:
      c.system.dim = 2;
      c.system.delta1 = p == SystemPreset::oscillator_profile ? 0.5 : 0.25;
      c.system.delta2 = 0.5;
      c.system.eta = 1.0;
      c.system.potential.quartic = 0.1;
      c.x = vec_of({1.0, 0.5});
      c.eps = {1e-2, std::pow(10.0, -2.5), 1e-3};
      c.sections = {"curve", "profile"};
      break;
    case SystemPreset::custom:
      c.system.dim = 1;
      c.system.drift = {"x1 + 0.5*x1^3"};
      c.system.declared_delta = 1.0;
      c.x = vec_of({1.0});
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  const int d = system.dim;
  if (d < 1 || d > 3) throw ConfigError("system.dim must be 1, 2 or 3");
  switch (system.preset) {
    case SystemPreset::linear:
      if (system.Q.rows() != d || system.Q.cols() != d) throw ConfigError("system.linear.Q must be dim x dim");
      break;
    case SystemPreset::fput:
      if (system.A.rows() != d || system.A.cols() != d || system.B.rows() != d || system.B.cols() != d) {
        throw ConfigError("system.fput.A and B must be dim x dim");
      }
      break;
    case SystemPreset::oscillator_profile:
    case SystemPreset::oscillator_noprofile:
      if (d != 2) throw ConfigError("oscillator presets are two dimensional");
      break;
    case SystemPreset::custom:
      if (static_cast<int>(system.drift.size()) != d) throw ConfigError("system.custom.drift needs dim expressions");
      if (!(system.declared_delta > 0.0)) throw ConfigError("system.custom.delta must be positive");
      break;
  }
  if (eps.empty()) throw ConfigError("experiment.eps is empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0 && eps[i] < std::exp(-1.0))) throw ConfigError("experiment.eps values must lie in (0, 1/e)");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw ConfigError("experiment.eps must be strictly decreasing");
  }
  if (x.size() != d) throw ConfigError("experiment.x must have dim entries");
  if (deltas.empty()) throw ConfigError("experiment.deltas is empty");
  const bool below = std::any_of(deltas.begin(), deltas.end(), [](double v) { return v < 1.0; });
  const bool above = std::any_of(deltas.begin(), deltas.end(), [](double v) { return v > 1.0; });
  for (double v : deltas) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("experiment.deltas must be positive");
  }
  if (!below || !above) throw ConfigError("experiment.deltas needs values below and above 1");
  if (!std::is_sorted(deltas.begin(), deltas.end())) throw ConfigError("experiment.deltas must be increasing");
  if (rhos.size() < 2 || !std::is_sorted(rhos.begin(), rhos.end())) {
    throw ConfigError("experiment.rhos must be an increasing grid");
  }
  for (int n : {paths, equilibrium_paths, profile_paths, mixing_paths}) {
    if (n < 100) throw ConfigError("Monte Carlo sizes must be at least 100");
  }
  if (!(dt_divisor >= 50.0)) throw ConfigError("experiment.dt.divisor must be at least 50");
  if (dt && !(*dt > 0.0)) throw ConfigError("experiment.dt.value must be positive");
  if (!(equilibrium_tol > 0.0 && equilibrium_tol < 1.0)) throw ConfigError("equilibrium tolerance must lie in (0,1)");
  for (double e : etas) {
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("experiment.mixing.etas must lie in (0,1)");
  }
  if (mixing_points < 4) throw ConfigError("experiment.mixing.points must be at least 4");
  if (!(mixing_span_lo > 0.0 && mixing_span_hi > mixing_span_lo)) throw ConfigError("bad experiment.mixing.span");
  if (!(tail_lo < tail_hi && tail_hi <= -1.0)) throw ConfigError("experiment.tails.window must lie in (-inf, -1]");
  if (!(collapse_tol > 0.0)) throw ConfigError("experiment.profile.collapse_tolerance must be positive");
  if (!(audit_radius > 0.0) || audit_triples < 1) throw ConfigError("bad experiment.audits");
  if (!(budget_seconds >= 0.0)) throw ConfigError("experiment.budget_seconds must be non-negative");
  for (const auto& s : sections) {
    if (std::find(kSections.begin(), kSections.end(), s) == kSections.end()) {
      throw ConfigError("unknown section '" + s + "'");
    }
  }
  if (!(noise.alpha > 0.0 && noise.alpha < 2.0)) throw ConfigError("noise.alpha must lie in (0,2)");
  if (!(noise.scale > 0.0)) throw ConfigError("noise.scale must be positive");
  try {
    noise_spec().validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("noise: ") + e.what());
  }
}

LevyMeasureSpec ExperimentConfig::noise_spec() const {
  LevyMeasureSpec spec = noise.kind == NoiseKind::isotropic
                             ? make_isotropic_stable(system.dim, noise.alpha, noise.scale, noise.beta)
                             : make_axis_atoms(system.dim, noise.alpha, noise.scale, 1.0, noise.beta);
  spec.profile.kind = noise.profile;
  spec.profile.rate = noise.tempering;
  spec.tail = noise.tail;
  return spec;
}

VectorFieldModel ExperimentConfig::field() const {
  switch (system.preset) {
    case SystemPreset::linear: return VectorFieldModel::linear(system.Q);
    case SystemPreset::fput: return VectorFieldModel::fput(system.A, system.B, system.bump);
    case SystemPreset::oscillator_profile:
    case SystemPreset::oscillator_noprofile:
      return VectorFieldModel::oscillator(system.delta1, system.delta2, system.eta, system.potential);
    case SystemPreset::custom: break;
  }
  const int d = system.dim;
  std::vector<std::string> names;
  for (int i = 0; i < d; ++i) names.push_back("x" + std::to_string(i + 1));
  std::vector<std::vector<int>> slots;
  std::vector<Expression> exprs;
  for (const auto& text : system.drift) {
    exprs.emplace_back(text);
    std::vector<int> s;
    for (const auto& v : exprs.back().variables()) {
      auto it = std::find(names.begin(), names.end(), v);
      if (it == names.end()) throw ConfigError("drift expression '" + text + "' uses unknown variable " + v);
      s.push_back(static_cast<int>(it - names.begin()));
    }
    slots.push_back(s);
  }
  auto b = [exprs, slots, d](const Vec& x) {
    Vec out(d);
    std::vector<double> vals;
    for (int i = 0; i < d; ++i) {
      vals.clear();
      for (int s : slots[i]) vals.push_back(x(s));
      out(i) = exprs[i](vals);
    }
    return out;
  };
  auto Db = [b, d](const Vec& x) {
    Mat J(d, d);
    for (int k = 0; k < d; ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(x(k)));
      Vec xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      J.col(k) = (b(xp) - b(xm)) / (2.0 * h);
    }
    return J;
  };
  return VectorFieldModel::custom(d, b, Db, system.declared_delta, "custom");
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json s;
  s["preset"] = to_string(system.preset);
  s["dim"] = system.dim;
  switch (system.preset) {
    case SystemPreset::linear: s["linear"] = {{"Q", mat_json(system.Q)}}; break;
    case SystemPreset::fput:
      s["fput"] = {{"A", mat_json(system.A)},
                   {"B", mat_json(system.B)},
                   {"bump", {{"kappa", system.bump.kappa}, {"width", system.bump.width}}}};
      break;
    case SystemPreset::oscillator_profile:
    case SystemPreset::oscillator_noprofile:
      s["oscillator"] = {{"delta1", system.delta1},
                         {"delta2", system.delta2},
                         {"eta", system.eta},
                         {"potential",
                          {{"a", system.potential.a},
                           {"quartic", system.potential.quartic},
                           {"well", {{"kappa", system.potential.well.kappa}, {"width", system.potential.well.width}}}}}};
      break;
    case SystemPreset::custom: s["custom"] = {{"drift", system.drift}, {"delta", system.declared_delta}}; break;
  }
  nlohmann::json tail = {{"kind", to_string(noise.tail.kind)}};
  switch (noise.tail.kind) {
    case TailKind::point_mass: tail["rate"] = noise.tail.rate; tail["point"] = vec_json(noise.tail.point); break;
    case TailKind::uniform_shell: tail["rate"] = noise.tail.rate; tail["r_max"] = noise.tail.r_max; break;
    case TailKind::pareto: tail["index"] = noise.tail.index; tail["intensity"] = noise.tail.intensity; break;
    default: break;
  }
  nlohmann::json z = {{"kind", to_string(noise.kind)},
                      {"alpha", noise.alpha},
                      {"scale", noise.scale},
                      {"beta", noise.beta},
                      {"profile", {{"kind", to_string(noise.profile)}, {"rate", noise.tempering}}},
                      {"tail", tail}};
  nlohmann::json dt_j = {{"divisor", dt_divisor}, {"scheme", to_string(scheme)}};
  if (dt) dt_j["value"] = *dt;
  nlohmann::json e = {{"eps", eps},
                      {"x", vec_json(x)},
                      {"deltas", deltas},
                      {"rhos", rhos},
                      {"paths", paths},
                      {"equilibrium_paths", equilibrium_paths},
                      {"profile_paths", profile_paths},
                      {"mixing_paths", mixing_paths},
                      {"dt", dt_j},
                      {"seed", seed},
                      {"budget_seconds", budget_seconds},
                      {"force_audits", force_audits},
                      {"equilibrium", {{"mode", to_string(equilibrium)}, {"tolerance", equilibrium_tol}}},
                      {"mixing", {{"etas", etas}, {"points", mixing_points}, {"span", {mixing_span_lo, mixing_span_hi}}}},
                      {"tails", {{"window", {tail_lo, tail_hi}}}},
                      {"profile", {{"collapse_tolerance", collapse_tol}}},
                      {"audits", {{"radius", audit_radius}, {"triples", audit_triples}}},
                      {"sections", sections}};
  return {{"name", name}, {"system", s}, {"noise", z}, {"experiment", e}};
}

std::string ExperimentConfig::hash() const {
  const std::string s = to_json().dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML parse error: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("config must be a table");
  check_keys(root, {"name", "system", "noise", "experiment"}, "");
  if (!root["system"] || !root["system"]["preset"]) throw ConfigError("system.preset is required");
  ExperimentConfig c = preset_config(parse_preset(get<std::string>(root["system"]["preset"], "system.preset")));
  read(root, "name", c.name, "");
  apply_system(root["system"], c.system);
  if (root["noise"]) apply_noise(root["noise"], c.noise);
  if (root["experiment"]) apply_experiment(root["experiment"], c);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace cutoff::lab
