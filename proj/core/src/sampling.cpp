#include "cutoff/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "cutoff/distance.hpp"
#include "cutoff/errors.hpp"

namespace cutoff {

namespace {

constexpr double kPi = std::numbers::pi;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidParameter("alpha must lie in (0,2)");
}

}  // namespace

double standard_symmetric_stable(double alpha, RngStream& rng) {
  const double V = kPi * (rng.uniform() - 0.5);
  if (alpha == 1.0) return std::tan(V);
  const double W = rng.exponential();
  return std::sin(alpha * V) / std::pow(std::cos(V), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * V) / W, (1.0 - alpha) / alpha);
}

double positive_stable(double a, RngStream& rng) {
  if (!(a > 0.0 && a < 1.0)) throw InvalidParameter("positive stable index must lie in (0,1)");
  const double U = kPi * rng.uniform();
  const double E = rng.exponential();
  return std::sin(a * U) / std::pow(std::sin(U), 1.0 / a) * std::pow(std::sin((1.0 - a) * U) / E, (1.0 - a) / a);
}

Vec uniform_direction(int d, RngStream& rng) {
  Vec v(d);
  if (d == 1) {
    v(0) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return v;
  }
  double n2 = 0.0;
  do {
    for (int k = 0; k < d; ++k) v(k) = rng.normal();
    n2 = v.squaredNorm();
  } while (n2 == 0.0);
  return v / std::sqrt(n2);
}

StableSampler::StableSampler(const StableLaw& law, double dt) : law_(law) {
  check_alpha(law.alpha);
  if (!(dt > 0.0)) throw InvalidParameter("dt must be positive");
  if (law.isotropic) {
    if (!(law.K > 0.0)) throw InvalidParameter("stable scale must be positive");
    scale_ = std::pow(law.K * dt, 1.0 / law.alpha);
  } else {
    for (const auto& f : law.factors) {
      if (f.direction.size() != law.dim) throw DimensionMismatch("stable factor has wrong dimension");
      factor_scales_.push_back(std::pow(f.gamma * dt, 1.0 / law.alpha));
    }
  }
}

void StableSampler::sample(RngStream& rng, Eigen::Ref<Vec> out) const {
  const double a = law_.alpha;
  if (law_.isotropic) {
    if (law_.dim == 1) {
      out(0) = scale_ * standard_symmetric_stable(a, rng);
      return;
    }
    const double A = positive_stable(0.5 * a, rng);
    const double s = scale_ * std::sqrt(2.0 * A);
    for (int k = 0; k < law_.dim; ++k) out(k) = s * rng.normal();
    return;
  }
  out.setZero();
  for (std::size_t k = 0; k < law_.factors.size(); ++k) {
    out += (factor_scales_[k] * standard_symmetric_stable(a, rng)) * law_.factors[k].direction;
  }
}

void validate_envelope(const LevyMeasureSpec& spec, double tol) {
  std::vector<std::pair<Vec, double>> dirs;
  if (spec.isotropic) {
    dirs.push_back({Vec::Unit(spec.dim, 0), spec.isotropic->c0});
  } else {
    for (const auto& a : spec.atoms) dirs.push_back({a.direction, a.c0});
  }
  for (int j = 0; j < 200; ++j) {
    const double r = std::pow(10.0, -6.0 + 6.0 * j / 199.0);
    for (const auto& [th, c0] : dirs) {
      const double ratio = spec.q(r, th, c0) * std::pow(r, 1.0 + spec.alpha) / c0;
      if (!(ratio <= 1.0 + tol)) {
        throw EnvelopeViolation("radial profile exceeds the stable envelope", r, ratio);
      }
    }
  }
}

IncrementSampler::IncrementSampler(const LevyMeasureSpec& spec, double dt, const LlslOptions& opts)
    : spec_(spec), dim_(spec.dim), dt_(dt), small_mode_(opts.small_jumps) {
  spec.validate();
  if (!(dt > 0.0)) throw InvalidParameter("dt must be positive");
  drift_ = Vec::Zero(dim_);
  if (opts.exact_stable_fast_path && spec.exactly_stable() && spec.symmetric()) {
    exact_ = true;
    stable_ = StableSampler(stable_limit(spec), dt);
    return;
  }
  validate_envelope(spec, opts.envelope_tol);
  const double a = spec.alpha;
  double cbar = 0.0;
  if (spec.isotropic) {
    cbar = spec.isotropic->mass * spec.isotropic->c0;
  } else {
    for (const auto& at : spec.atoms) cbar += at.weight * at.c0;
  }
  if (opts.inner_cutoff) {
    delta_ = *opts.inner_cutoff;
    if (!(delta_ > 0.0 && delta_ < 1.0)) throw InvalidParameter("inner cutoff must lie in (0,1)");
  } else {
    delta_ = std::min(0.5, opts.cutoff_factor * std::pow(cbar * dt, 1.0 / a));
  }
  unit_acceptance_ = spec.profile.kind == ProfileKind::pure_stable;
  const double mass = (std::pow(delta_, -a) - 1.0) / a;
  if (spec.isotropic) {
    channels_.push_back({Vec(), spec.isotropic->c0, spec.isotropic->mass * spec.isotropic->c0 * mass * dt});
  } else {
    for (const auto& at : spec.atoms) channels_.push_back({at.direction, at.c0, at.weight * at.c0 * mass * dt});
  }
  const Mat cov = inner_covariance(spec, delta_) * dt;
  truncated_variance_ = cov.trace();
  if (small_mode_ == SmallJumpMode::gaussian) {
    Eigen::SelfAdjointEigenSolver<Mat> es(cov);
    small_jump_root_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  if (!spec.symmetric() && !spec.isotropic) {
    for (const auto& at : spec.atoms) {
      drift_ -= dt * at.weight * inner_radial_moment(spec, at.direction, at.c0, delta_, 1.0, 1) * at.direction;
    }
  }
  tail_rate_ = spec.tail_rate();
  if (!spec.isotropic) {
    double acc = 0.0;
    for (const auto& at : spec.atoms) {
      acc += spec.tail.kind == TailKind::stable_extension ? at.weight * at.c0 : at.weight;
      tail_direction_cdf_.push_back(acc);
    }
  }
}

int IncrementSampler::pick_atom(const std::vector<double>& cumulative, RngStream& rng) const {
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(), cumulative.size() - 1));
}

Vec IncrementSampler::tail_jump(RngStream& rng) const {
  const auto& t = spec_.tail;
  if (t.kind == TailKind::point_mass) return t.point;
  double r = 1.0;
  switch (t.kind) {
    case TailKind::uniform_shell: r = rng.uniform(1.0, t.r_max); break;
    case TailKind::pareto: r = std::pow(rng.uniform(), -1.0 / t.index); break;
    case TailKind::stable_extension: r = std::pow(rng.uniform(), -1.0 / spec_.alpha); break;
    default: break;
  }
  if (spec_.isotropic) return r * uniform_direction(dim_, rng);
  return r * spec_.atoms[pick_atom(tail_direction_cdf_, rng)].direction;
}

void IncrementSampler::sample(RngStream& rng, Eigen::Ref<Vec> out, IncrementTags* tags, Vec* tail_part) const {
  if (tail_part) tail_part->setZero(dim_);
  if (exact_) {
    stable_.sample(rng, out);
    if (tags) *tags = {};
    return;
  }
  out = drift_;
  const double a = spec_.alpha;
  const double span = std::pow(delta_, -a) - 1.0;
  std::uint32_t inner = 0;
  for (const auto& ch : channels_) {
    const std::uint64_t N = rng.poisson(ch.mean_count);
    for (std::uint64_t i = 0; i < N; ++i) {
      const double r = std::pow(1.0 + rng.uniform() * span, -1.0 / a);
      if (ch.direction.size() == 0) {
        const Vec th = uniform_direction(dim_, rng);
        if (!unit_acceptance_ && rng.uniform() * ch.c0 > spec_.q(r, th, ch.c0) * std::pow(r, 1.0 + a)) continue;
        out += r * th;
      } else {
        if (!unit_acceptance_ && rng.uniform() * ch.c0 > spec_.q(r, ch.direction, ch.c0) * std::pow(r, 1.0 + a)) {
          continue;
        }
        out += r * ch.direction;
      }
      ++inner;
    }
  }
  if (small_mode_ == SmallJumpMode::gaussian && truncated_variance_ > 0.0) {
    Vec z(dim_);
    for (int k = 0; k < dim_; ++k) z(k) = rng.normal();
    out += small_jump_root_ * z;
  }
  std::uint32_t tail_count = 0;
  if (tail_rate_ > 0.0) {
    const std::uint64_t N = rng.poisson(tail_rate_ * dt_);
    for (std::uint64_t i = 0; i < N; ++i) {
      const Vec j = tail_jump(rng);
      out += j;
      if (tail_part) *tail_part += j;
    }
    tail_count = static_cast<std::uint32_t>(N);
  }
  if (tags) *tags = {inner, tail_count};
}

IncrementBatch stable_increment(const StableLaw& law, double dt, int n, RngStream& rng) {
  if (n < 1) throw InvalidParameter("batch size must be positive");
  StableSampler s(law, dt);
  IncrementBatch b;
  b.dt = dt;
  b.dim = law.dim;
  b.values.resize(law.dim, n);
  b.tail = Mat::Zero(law.dim, n);
  b.inner_jumps.assign(n, 0);
  b.tail_jumps.assign(n, 0);
  for (int i = 0; i < n; ++i) s.sample(rng, b.values.col(i));
  return b;
}

IncrementBatch stable_increment(double alpha, double scale, const LevyMeasureSpec& spectral, double dt, int n,
                                RngStream& rng) {
  check_alpha(alpha);
  if (!(scale > 0.0)) throw InvalidParameter("scale must be positive");
  LevyMeasureSpec s = spectral;
  s.alpha = alpha;
  StableLaw law;
  if (s.isotropic) {
    law = make_isotropic_law(s.dim, alpha, scale);
  } else {
    law = stable_limit(s);
    double total = 0.0;
    for (const auto& f : law.factors) total += f.gamma;
    for (auto& f : law.factors) f.gamma *= scale / total;
  }
  return stable_increment(law, dt, n, rng);
}

IncrementBatch llsl_increment(const LevyMeasureSpec& spec, double dt, int n, RngStream& rng,
                              const LlslOptions& opts) {
  if (n < 1) throw InvalidParameter("batch size must be positive");
  IncrementSampler s(spec, dt, opts);
  IncrementBatch b;
  b.dt = dt;
  b.dim = spec.dim;
  b.values.resize(spec.dim, n);
  b.tail.resize(spec.dim, n);
  b.inner_jumps.resize(n);
  b.tail_jumps.resize(n);
  Vec tail(spec.dim);
  for (int i = 0; i < n; ++i) {
    IncrementTags tags;
    s.sample(rng, b.values.col(i), &tags, &tail);
    b.tail.col(i) = tail;
    b.inner_jumps[i] = tags.inner_jumps;
    b.tail_jumps[i] = tags.tail_jumps;
  }
  return b;
}

IncrementBatch compound_poisson(double rate, const JumpSampler& jump, int dim, double dt, int n, RngStream& rng) {
  if (!(rate >= 0.0)) throw InvalidParameter("rate must be non-negative");
  if (!(dt > 0.0)) throw InvalidParameter("dt must be positive");
  if (n < 1) throw InvalidParameter("batch size must be positive");
  IncrementBatch b;
  b.dt = dt;
  b.dim = dim;
  b.values = Mat::Zero(dim, n);
  b.inner_jumps.assign(n, 0);
  b.tail_jumps.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    const std::uint64_t N = rate > 0.0 ? rng.poisson(rate * dt) : 0;
    for (std::uint64_t k = 0; k < N; ++k) {
      const Vec j = jump(rng);
      if (j.size() != dim) throw DimensionMismatch("jump sampler returned wrong dimension");
      b.values.col(i) += j;
    }
    b.tail_jumps[i] = static_cast<std::uint32_t>(N);
  }
  b.tail = b.values;
  return b;
}

ShortRangeTable short_range_diagnostic(const LevyMeasureSpec& spec, const std::vector<double>& h_list, int n,
                                       RngStream& rng, const LlslOptions& opts) {
  spec.validate();
  if (h_list.empty()) throw InvalidParameter("h_list must be nonempty");
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    if (!(h_list[i] > 0.0)) throw InvalidParameter("steps must be positive");
    if (i > 0 && !(h_list[i] < h_list[i - 1])) throw InvalidParameter("h_list must be decreasing");
  }
  if (!spec.symmetric() && spec.alpha == 1.0) {
    throw UnsupportedConfiguration("centering for non-symmetric alpha = 1 drivers is undefined");
  }
  const StableLaw limit = stable_limit(spec);
  const StableSampler ref(limit, 1.0);
  auto reference = [&](RngStream& r) {
    Mat m(spec.dim, n);
    for (int i = 0; i < n; ++i) ref.sample(r, m.col(i));
    return m;
  };

  ShortRangeTable table;
  HistOptions hopt;
  hopt.seed = derive_seed(rng.seed(), {rng.stream(), 0x5A});
  constexpr int kFloorReps = 5;
  std::vector<double> floors;
  for (int k = 0; k < kFloorReps; ++k) {
    const Mat A = reference(rng);
    const Mat B = reference(rng);
    floors.push_back(tv_hist(A, B, hopt).raw);
  }
  double mean = 0.0, sq = 0.0;
  for (double f : floors) mean += f;
  mean /= kFloorReps;
  for (double f : floors) sq += (f - mean) * (f - mean);
  table.noise_floor = mean;
  table.noise_floor_sd = std::sqrt(sq / (kFloorReps - 1));

  for (double h : h_list) {
    IncrementBatch b = llsl_increment(spec, h, n, rng, opts);
    b.values *= std::pow(h, -1.0 / spec.alpha);
    const Mat S = reference(rng);
    const TVEstimate e = tv_hist(b.values, S, hopt);
    ShortRangeRow row;
    row.h = h;
    row.tv = e.value;
    row.ci = e.ci;
    row.tv_raw = e.raw;
    row.noise_floor = table.noise_floor;
    long with_tail = 0;
    for (auto c : b.tail_jumps) with_tail += c > 0 ? 1 : 0;
    row.tail_fraction = static_cast<double>(with_tail) / n;
    row.tail_fraction_expected = -std::expm1(-spec.tail_rate() * h);
    table.rows.push_back(row);
  }
  table.decreasing = true;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    if (table.rows[i].tv_raw > table.rows[i - 1].tv_raw + table.rows[i - 1].ci + table.noise_floor_sd) {
      table.decreasing = false;
    }
  }
  if (table.rows.size() > 1 && !(table.rows.back().tv_raw < table.rows.front().tv_raw)) table.decreasing = false;
  return table;
}

namespace {

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xFFull) << (8 * (7 - i));
  return r;
}

}  // namespace

void write_columnar(const std::string& path, const Mat& columns) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    for (Eigen::Index i = 0; i < columns.rows(); ++i) {
      std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(columns(i, j)));
      f.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!f) throw Error("write failed for " + path);
}

Mat read_columnar(const std::string& path, int dim) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw Error("cannot open " + path);
  const auto bytes = static_cast<std::size_t>(f.tellg());
  if (dim < 1 || bytes % (8 * static_cast<std::size_t>(dim)) != 0) throw DimensionMismatch("dump size mismatch");
  const auto n = static_cast<Eigen::Index>(bytes / (8 * static_cast<std::size_t>(dim)));
  f.seekg(0);
  Mat m(dim, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int i = 0; i < dim; ++i) {
      std::uint64_t bits = 0;
      f.read(reinterpret_cast<char*>(&bits), sizeof bits);
      m(i, j) = std::bit_cast<double>(to_le(bits));
    }
  }
  return m;
}

}  // namespace cutoff
