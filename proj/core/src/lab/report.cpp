#include "cutoff/lab/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cutoff/errors.hpp"

namespace cutoff::lab {

bool CutoffReport::all_flags_pass() const {
  for (const auto& [name, ok] : flags) {
    if (!ok) return false;
  }
  return true;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << content;
}

}  // namespace

nlohmann::json CutoffReport::to_json() const {
  using nlohmann::json;
  json j;
  j["provenance"] = {{"config_hash", config_hash}, {"seed", seed}, {"version", version}, {"generated_at", generated_at}};
  j["config"] = config;
  j["audits"] = audits;
  j["spectral"] = spectral;
  json sched = json::array();
  for (const auto& s : schedules) {
    sched.push_back({{"eps", number(s.eps)},
                     {"t_eps", number(s.t_eps)},
                     {"w_eps", number(s.w_eps)},
                     {"deltas", s.deltas},
                     {"probe_times", s.probe_times}});
  }
  j["schedules"] = sched;
  json curve_j = json::array();
  for (const auto& c : curve) {
    curve_j.push_back({{"eps", number(c.eps)},
                       {"delta", number(c.delta)},
                       {"t", number(c.t)},
                       {"tv", number(c.tv)},
                       {"ci", number(c.ci)},
                       {"method", c.method}});
  }
  j["curve"] = curve_j;
  json prof = json::array();
  for (const auto& c : profile) {
    prof.push_back({{"eps", number(c.eps)},
                    {"rho", number(c.rho)},
                    {"t", number(c.t)},
                    {"g_hat", number(c.g_hat)},
                    {"ci", number(c.ci)},
                    {"g_theory", number(c.g_theory)},
                    {"theory_error", number(c.theory_error)}});
  }
  j["profile"] = {{"cells", prof}, {"summary", profile_summary}};
  json mix = json::array();
  for (const auto& m : mixing) {
    mix.push_back({{"eps", number(m.eps)}, {"eta", number(m.eta)}, {"tmix", number(m.tmix)}, {"censored", m.censored}});
  }
  json rat = json::array();
  for (const auto& r : ratios) {
    rat.push_back({{"eps", number(r.eps)},
                   {"eta", number(r.eta)},
                   {"ratio", number(r.ratio)},
                   {"resolution", number(r.resolution)},
                   {"censored", r.censored}});
  }
  j["mixing"] = {{"cells", mix}, {"ratios", rat}};
  if (tails) {
    json t = {{"alpha_hat", number(tails->alpha_hat)},
              {"slope_se", number(tails->slope_se)},
              {"curvature", number(tails->curvature)},
              {"doubly_exponential", tails->doubly_exponential},
              {"window", {tails->window_lo, tails->window_hi}},
              {"points", tails->points}};
    t["right_edge_ratio"] = tails->right_edge_ratio ? number(*tails->right_edge_ratio) : json();
    j["tails"] = t;
  } else {
    j["tails"] = nullptr;
  }
  json eq = json::array();
  for (const auto& e : equilibrium) {
    eq.push_back({{"eps", number(e.eps)}, {"horizon", number(e.horizon)}, {"tv", number(e.tv)}, {"ci", number(e.ci)}});
  }
  j["equilibrium"] = eq;
  json fl = json::object();
  for (const auto& [k, v] : flags) fl[k] = v;
  j["flags"] = fl;
  j["censored"] = censored;
  j["warnings"] = warnings;
  j["error"] = error.empty() ? json() : json(error);
  j["exit_code"] = exit_code();
  return j;
}

std::string tv_curve_csv(const CutoffReport& r) {
  std::ostringstream out;
  out << "eps,delta,t,tv,ci,method\n";
  for (const auto& c : r.curve) {
    out << format_number(c.eps) << ',' << format_number(c.delta) << ',' << format_number(c.t) << ','
        << format_number(c.tv) << ',' << format_number(c.ci) << ',' << c.method << '\n';
  }
  return out.str();
}

std::string profile_csv(const CutoffReport& r) {
  std::ostringstream out;
  out << "eps,rho,g_hat,ci,g_theory\n";
  for (const auto& c : r.profile) {
    out << format_number(c.eps) << ',' << format_number(c.rho) << ',' << format_number(c.g_hat) << ','
        << format_number(c.ci) << ',' << format_number(c.g_theory) << '\n';
  }
  return out.str();
}

std::string mixing_csv(const CutoffReport& r) {
  std::ostringstream out;
  out << "eps,eta,tmix,censored\n";
  for (const auto& m : r.mixing) {
    out << format_number(m.eps) << ',' << format_number(m.eta) << ',' << format_number(m.tmix) << ','
        << (m.censored ? "true" : "false") << '\n';
  }
  return out.str();
}

void write_report(const CutoffReport& r, const std::string& dir) {
  const std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  write_file(p / "report.json", r.to_json().dump(2) + "\n");
  write_file(p / "tv_curve.csv", tv_curve_csv(r));
  write_file(p / "profile.csv", profile_csv(r));
  write_file(p / "mixing.csv", mixing_csv(r));
}

}  // namespace cutoff::lab
