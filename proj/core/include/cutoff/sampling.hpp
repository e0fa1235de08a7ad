#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cutoff/levy_model.hpp"
#include "cutoff/linalg.hpp"
#include "cutoff/rng.hpp"

namespace cutoff {

// n increments of a Levy process over a step dt, stored column-wise (dim x n).
struct IncrementBatch {
  double dt = 0.0;
  int dim = 1;
  Mat values;
  // Contribution of the compound-Poisson tail (|z| > 1) to each column.
  Mat tail;
  std::vector<std::uint32_t> inner_jumps;
  std::vector<std::uint32_t> tail_jumps;
  std::uint64_t shard = 0;

  int n() const { return static_cast<int>(values.cols()); }
};

struct IncrementTags {
  std::uint32_t inner_jumps = 0;
  std::uint32_t tail_jumps = 0;
};

// Standard symmetric stable variate with E exp(iuX) = exp(-|u|^alpha).
double standard_symmetric_stable(double alpha, RngStream& rng);
// Positive stable variate with E exp(-sA) = exp(-s^a), a in (0, 1).
double positive_stable(double a, RngStream& rng);
// Uniform direction on the unit sphere of R^d.
Vec uniform_direction(int d, RngStream& rng);

// Exact increments of a symmetric strictly stable law over a step dt.
class StableSampler {
 public:
  StableSampler() = default;
  StableSampler(const StableLaw& law, double dt);

  void sample(RngStream& rng, Eigen::Ref<Vec> out) const;
  const StableLaw& law() const { return law_; }

 private:
  StableLaw law_;
  double scale_ = 0.0;
  std::vector<double> factor_scales_;
};

enum class SmallJumpMode { gaussian, discard };

struct LlslOptions {
  // Fixed inner cutoff; when absent the cutoff adapts to the step: kappa * (c dt)^{1/alpha}.
  std::optional<double> inner_cutoff;
  double cutoff_factor = 0.02;
  SmallJumpMode small_jumps = SmallJumpMode::gaussian;
  bool exact_stable_fast_path = true;
  double envelope_tol = 1e-9;
};

// Increment generator for a locally layered stable measure over a fixed step.
class IncrementSampler {
 public:
  IncrementSampler(const LevyMeasureSpec& spec, double dt, const LlslOptions& opts = {});

  // When tail_part is given it receives the contribution of the compound-Poisson tail.
  void sample(RngStream& rng, Eigen::Ref<Vec> out, IncrementTags* tags = nullptr, Vec* tail_part = nullptr) const;

  int dim() const { return dim_; }
  double dt() const { return dt_; }
  bool exact() const { return exact_; }
  double inner_cutoff() const { return delta_; }
  // Trace of the covariance carried by jumps below the inner cutoff over one step.
  double truncated_variance() const { return truncated_variance_; }
  double tail_rate() const { return tail_rate_; }

 private:
  struct Channel {
    Vec direction;  // empty for the isotropic channel
    double c0 = 1.0;
    double mean_count = 0.0;
  };

  Vec tail_jump(RngStream& rng) const;
  int pick_atom(const std::vector<double>& cumulative, RngStream& rng) const;

  LevyMeasureSpec spec_;
  int dim_ = 1;
  double dt_ = 0.0;
  bool exact_ = false;
  bool unit_acceptance_ = false;
  StableSampler stable_;
  double delta_ = 0.0;
  std::vector<Channel> channels_;
  Mat small_jump_root_;
  Vec drift_;
  double truncated_variance_ = 0.0;
  double tail_rate_ = 0.0;
  std::vector<double> tail_direction_cdf_;
  SmallJumpMode small_mode_ = SmallJumpMode::gaussian;
};

// Throws EnvelopeViolation when q(r, theta) r^{1+alpha} / c0 exceeds 1 + tol on a log grid of (0, 1].
void validate_envelope(const LevyMeasureSpec& spec, double tol = 1e-9);

IncrementBatch stable_increment(const StableLaw& law, double dt, int n, RngStream& rng);
IncrementBatch stable_increment(double alpha, double scale, const LevyMeasureSpec& spectral, double dt, int n,
                                RngStream& rng);
IncrementBatch llsl_increment(const LevyMeasureSpec& spec, double dt, int n, RngStream& rng,
                              const LlslOptions& opts = {});

using JumpSampler = std::function<Vec(RngStream&)>;
IncrementBatch compound_poisson(double rate, const JumpSampler& jump, int dim, double dt, int n, RngStream& rng);

struct ShortRangeRow {
  double h = 0.0;
  double tv = 0.0;
  double ci = 0.0;
  double tv_raw = 0.0;
  double noise_floor = 0.0;
  double tail_fraction = 0.0;
  double tail_fraction_expected = 0.0;
};

struct ShortRangeTable {
  std::vector<ShortRangeRow> rows;
  double noise_floor = 0.0;
  double noise_floor_sd = 0.0;
  bool decreasing = false;
};

// Distance between h^{-1/alpha} L_h and the stable limit S_alpha(c0 Lambda) for each step h.
ShortRangeTable short_range_diagnostic(const LevyMeasureSpec& spec, const std::vector<double>& h_list, int n,
                                       RngStream& rng, const LlslOptions& opts = {});

// Little-endian float64, row-major n x dim.
void write_columnar(const std::string& path, const Mat& columns);
Mat read_columnar(const std::string& path, int dim);

}  // namespace cutoff
