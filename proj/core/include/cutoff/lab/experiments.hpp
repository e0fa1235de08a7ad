#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cutoff/distance.hpp"
#include "cutoff/lab/config.hpp"
#include "cutoff/lab/report.hpp"
#include "cutoff/simulate.hpp"
#include "cutoff/spectral.hpp"

namespace cutoff::lab {

// Pool-adjacent-violators fit of a non-increasing sequence (weights default to 1).
std::vector<double> isotonic_decreasing(const std::vector<double>& y, const std::vector<double>& w = {});

struct MixingTime {
  double tmix = 0.0;
  bool censored = false;
};
// First grid time at which the isotonic fit of tv drops to eta or below.
MixingTime mixing_time(const std::vector<double>& t, const std::vector<double>& tv, double eta);

// Relative slope change across the window above which a profile tail counts as doubly exponential.
inline constexpr double kDoublyExponentialCurvature = 0.5;
// Least-squares slope of ln(1 - G) against rho on [lo, hi] with a curvature test.
TailFit tail_fit(const std::vector<double>& rho, const std::vector<double>& G, double lo, double hi);

struct AuditSummary {
  nlohmann::json detail = nlohmann::json::object();
  bool pass = false;
};
AuditSummary hypothesis_audit(const ExperimentConfig& cfg);

class Lab {
 public:
  explicit Lab(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const VectorFieldModel& field() const { return vf_; }
  const LevyMeasureSpec& noise() const { return spec_; }
  const HGData& hg() const { return hg_; }
  const CutoffSchedule& schedule(std::size_t i) const { return schedules_.at(i); }

  // Deterministic shift of the normalized process at time t for the profile overlay.
  Vec profile_shift(double t, double rho) const;
  // TV(shift + Z_inf, Z_inf) for the unit-noise stationary law, with its numerical error.
  std::pair<double, double> profile_theory(const Vec& shift);

  // Runs the hypothesis audits; throws AuditFailure unless they pass or audits are forced.
  void run_audits(CutoffReport& r);
  void run_spectral(CutoffReport& r);
  void run_tv_curve(CutoffReport& r);
  void run_profile(CutoffReport& r);
  void run_mixing(CutoffReport& r, const std::vector<double>& etas);
  void run_tails(CutoffReport& r);
  CutoffReport run_all();

  // Samples approximating mu^eps for ladder entry i, in the configured mode.
  const Mat& equilibrium(std::size_t i, CutoffReport& r);
  SimOptions sim_options(std::size_t i) const;

 private:
  RngStream stream(std::uint64_t section, std::uint64_t index) const;
  void check_budget() const;
  void begin(CutoffReport& r) const;

  ExperimentConfig cfg_;
  VectorFieldModel vf_;
  LevyMeasureSpec spec_;
  Mat J_;
  HGData hg_;
  bool spectral_done_ = false;
  std::vector<CutoffSchedule> schedules_;
  std::map<std::size_t, Mat> mu_;
  std::chrono::steady_clock::time_point start_;

  // Cached unit-noise stationary law for profile_theory.
  std::optional<FourierGrid> grid_;
  std::vector<cd> zinf_char_;
  std::optional<Mat> zinf_a_, zinf_b_;
  double zinf_sigma_ = 0.0;
};

CutoffReport run_tv_curve(const ExperimentConfig& cfg);
CutoffReport run_profile(const ExperimentConfig& cfg);
CutoffReport run_mixing(const ExperimentConfig& cfg, const std::vector<double>& etas);
CutoffReport run_all(const ExperimentConfig& cfg);

}  // namespace cutoff::lab
