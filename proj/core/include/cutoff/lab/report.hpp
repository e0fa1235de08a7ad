#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cutoff/spectral.hpp"

namespace cutoff::lab {

struct CurveCell {
  double eps = 0.0;
  double delta = 0.0;
  double t = 0.0;
  double tv = 0.0;
  double ci = 0.0;
  std::string method;
};

struct ProfileCell {
  double eps = 0.0;
  double rho = 0.0;
  double t = 0.0;
  double g_hat = 0.0;
  double ci = 0.0;
  double g_theory = 0.0;
  double theory_error = 0.0;
};

struct MixingCell {
  double eps = 0.0;
  double eta = 0.0;
  double tmix = 0.0;
  bool censored = false;
};

struct MixingRatio {
  double eps = 0.0;
  double eta = 0.0;
  double ratio = 0.0;
  double resolution = 0.0;
  bool censored = false;
};

struct TailFit {
  double alpha_hat = 0.0;
  double slope_se = 0.0;
  double curvature = 0.0;
  bool doubly_exponential = false;
  double window_lo = 0.0;
  double window_hi = 0.0;
  int points = 0;
  std::optional<double> right_edge_ratio;
};

struct EquilibriumCell {
  double eps = 0.0;
  double horizon = 0.0;
  double tv = 0.0;
  double ci = 0.0;
};

struct CutoffReport {
  nlohmann::json config;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::string generated_at;

  nlohmann::json audits = nlohmann::json::object();
  nlohmann::json spectral = nlohmann::json::object();
  std::vector<CutoffSchedule> schedules;

  std::vector<CurveCell> curve;
  std::vector<ProfileCell> profile;
  nlohmann::json profile_summary = nlohmann::json::object();
  std::vector<MixingCell> mixing;
  std::vector<MixingRatio> ratios;
  std::optional<TailFit> tails;
  std::vector<EquilibriumCell> equilibrium;

  std::map<std::string, bool> flags;
  std::vector<std::string> censored;
  std::vector<std::string> warnings;
  std::string error;

  bool all_flags_pass() const;
  int exit_code() const { return error.empty() && all_flags_pass() ? 0 : 1; }
  nlohmann::json to_json() const;
};

// Fixed-precision decimal rendering used by every CSV cell.
std::string format_number(double v);
std::string tv_curve_csv(const CutoffReport& r);
std::string profile_csv(const CutoffReport& r);
std::string mixing_csv(const CutoffReport& r);
// Writes report.json, tv_curve.csv, profile.csv and mixing.csv into dir (created if needed).
void write_report(const CutoffReport& r, const std::string& dir);

}  // namespace cutoff::lab
