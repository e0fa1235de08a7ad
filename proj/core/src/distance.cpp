#include "cutoff/distance.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "cutoff/errors.hpp"
#include "cutoff/rng.hpp"

namespace cutoff {

namespace {

constexpr double kPi = std::numbers::pi;
// Spacing, relative to the local mean, that counts as a gap between clusters.
constexpr double kGapFactor = 20.0;

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

// Flat cell index of every column of X under per-axis edges.
std::vector<std::uint32_t> cell_indices(const Mat& X, const std::vector<std::vector<double>>& edges, int k) {
  std::vector<std::uint32_t> idx(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    std::uint64_t flat = 0;
    for (Eigen::Index a = 0; a < X.rows(); ++a) {
      const auto& e = edges[a];
      const auto b = static_cast<std::uint64_t>(std::upper_bound(e.begin(), e.end(), X(a, j)) - e.begin());
      flat = flat * static_cast<std::uint64_t>(k) + b;
    }
    idx[j] = static_cast<std::uint32_t>(flat);
  }
  return idx;
}

double half_l1(const std::vector<double>& ca, double na, const std::vector<double>& cb, double nb) {
  double s = 0.0;
  for (std::size_t i = 0; i < ca.size(); ++i) s += std::abs(ca[i] / na - cb[i] / nb);
  return 0.5 * s;
}

// Multinomial draw of `trials` over the probability vector p via conditional binomials.
void multinomial(std::uint64_t trials, const std::vector<double>& p, RngStream& rng, std::vector<double>& out) {
  out.assign(p.size(), 0.0);
  double rest = 1.0;
  std::uint64_t left = trials;
  for (std::size_t i = 0; i < p.size() && left > 0; ++i) {
    if (p[i] <= 0.0) continue;
    const double q = i + 1 == p.size() ? 1.0 : std::min(1.0, p[i] / rest);
    const std::uint64_t c = q >= 1.0 ? left : rng.binomial(left, q);
    out[i] = static_cast<double>(c);
    left -= c;
    rest -= p[i];
    if (rest <= 0.0) rest = 1e-300;
  }
}

}  // namespace

TVEstimate tv_hist(const Mat& A, const Mat& B, const HistOptions& opts) {
  if (A.cols() == 0 || B.cols() == 0) throw InvalidParameter("sample sets must be nonempty");
  if (A.rows() != B.rows()) throw DimensionMismatch("sample sets have different dimensions");
  if (opts.paired && A.cols() != B.cols()) throw DimensionMismatch("paired samples need equal sizes");
  if (!A.allFinite() || !B.allFinite()) throw InvalidParameter("samples must be finite");
  const int d = static_cast<int>(A.rows());
  const double na = static_cast<double>(A.cols());
  const double nb = static_cast<double>(B.cols());
  const double n = std::min(na, nb);
  int k = opts.bins_per_axis;
  if (k <= 0) k = std::max(1, std::min(64, static_cast<int>(std::floor(std::pow(n, 1.0 / (d + 2)) + 1e-9))));
  const double cells = std::pow(static_cast<double>(k), d);
  if (cells > 4e7) throw InvalidParameter("too many histogram cells");
  if (n < 2.0 * cells) throw InsufficientSamples("need at least 2 samples per histogram cell");

  std::vector<std::vector<double>> edges(d);
  std::vector<double> pooled(A.cols() + B.cols());
  for (int a = 0; a < d; ++a) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) pooled[j] = A(a, j);
    for (Eigen::Index j = 0; j < B.cols(); ++j) pooled[A.cols() + j] = B(a, j);
    std::sort(pooled.begin(), pooled.end());
    const std::size_t m = pooled.size();
    const auto half = static_cast<std::size_t>(std::floor(0.5 * static_cast<double>(m) / k));
    std::size_t last = 1;
    for (int i = 1; i < k; ++i) {
      const auto pos = std::min(static_cast<std::size_t>(std::floor(static_cast<double>(i) * m / k)), m - 1);
      double edge = pooled[pos];
      // An edge next to a pronounced gap moves into it so no cell straddles separated clusters.
      const std::size_t lo = std::max(last, pos > half ? pos - half : std::size_t{1});
      const std::size_t hi = std::min(m - 1, pos + half);
      if (hi > lo) {
        std::size_t best = lo;
        for (std::size_t j = lo; j <= hi; ++j) {
          if (pooled[j] - pooled[j - 1] > pooled[best] - pooled[best - 1]) best = j;
        }
        const double mean_gap = (pooled[hi] - pooled[lo - 1]) / static_cast<double>(hi - lo + 1);
        if (pooled[best] - pooled[best - 1] > kGapFactor * mean_gap) {
          edge = pooled[best];
          last = best;
        }
      }
      edges[a].push_back(edge);
    }
  }
  const auto ia = cell_indices(A, edges, k);
  const auto ib = cell_indices(B, edges, k);
  const auto ncell = static_cast<std::size_t>(cells);
  std::vector<double> ca(ncell, 0.0), cb(ncell, 0.0);
  for (auto c : ia) ca[c] += 1.0;
  for (auto c : ib) cb[c] += 1.0;

  TVEstimate est;
  est.method = "hist";
  est.raw = half_l1(ca, na, cb, nb);
  est.bias_order = cells / n;

  std::vector<double> boot;
  if (opts.bootstrap > 1) {
    RngStream rng(opts.seed, 0xB007);
    std::vector<double> pa(ncell), pb(ncell), ra, rb;
    for (std::size_t i = 0; i < ncell; ++i) {
      pa[i] = ca[i] / na;
      pb[i] = cb[i] / nb;
    }
    for (int b = 0; b < opts.bootstrap; ++b) {
      if (opts.paired) {
        ra.assign(ncell, 0.0);
        rb.assign(ncell, 0.0);
        const auto m = static_cast<std::uint64_t>(A.cols());
        for (std::uint64_t t = 0; t < m; ++t) {
          const auto i = static_cast<std::size_t>(rng.next_u64() % m);
          ra[ia[i]] += 1.0;
          rb[ib[i]] += 1.0;
        }
      } else {
        multinomial(static_cast<std::uint64_t>(na), pa, rng, ra);
        multinomial(static_cast<std::uint64_t>(nb), pb, rng, rb);
      }
      boot.push_back(half_l1(ra, na, rb, nb));
    }
    double mean = 0.0;
    for (double v : boot) mean += v;
    mean /= static_cast<double>(boot.size());
    double var = 0.0;
    for (double v : boot) var += (v - mean) * (v - mean);
    var /= static_cast<double>(boot.size() - 1);
    est.bias = mean - est.raw;
    est.ci = 1.96 * std::sqrt(var);
  }
  est.value = opts.bias_correct ? std::clamp(est.raw - est.bias, 0.0, 1.0) : est.raw;
  est.meta = {{"bins_per_axis", k}, {"cells", cells}, {"n_a", A.cols()}, {"n_b", B.cols()},
              {"bootstrap", opts.bootstrap}, {"paired", opts.paired}};
  return est;
}

std::size_t FourierGrid::size() const {
  std::size_t s = 1;
  for (int i = 0; i < dim; ++i) s *= static_cast<std::size_t>(n);
  return s;
}

Vec FourierGrid::point(std::size_t flat) const {
  Vec u(dim);
  for (int a = dim - 1; a >= 0; --a) {
    const auto k = static_cast<long>(flat % static_cast<std::size_t>(n));
    flat /= static_cast<std::size_t>(n);
    u(a) = static_cast<double>(k - n / 2) * du;
  }
  return u;
}

double FourierGrid::dx() const { return 2.0 * kPi / (n * du); }

namespace {

void check_grid(const FourierGrid& g) {
  if (g.dim < 1 || g.dim > 3) throw InvalidParameter("Fourier grids support dimensions 1 to 3");
  if (g.n < 8 || g.n % 4 != 0) throw InvalidParameter("lattice size must be a multiple of 4");
  if (!(g.du > 0.0)) throw InvalidParameter("lattice spacing must be positive");
}

// Sum of lattice parities (used for the (-1)^k centering factors).
int parity(std::size_t flat, const FourierGrid& g) {
  int s = 0;
  for (int a = 0; a < g.dim; ++a) {
    s += static_cast<int>(flat % static_cast<std::size_t>(g.n));
    flat /= static_cast<std::size_t>(g.n);
  }
  return s & 1;
}

bool on_boundary(std::size_t flat, const FourierGrid& g) {
  for (int a = 0; a < g.dim; ++a) {
    const auto k = static_cast<int>(flat % static_cast<std::size_t>(g.n));
    flat /= static_cast<std::size_t>(g.n);
    if (k == 0 || k == g.n - 1) return true;
  }
  return false;
}

}  // namespace

std::vector<double> fourier_density(const std::vector<cd>& chi, const FourierGrid& grid) {
  check_grid(grid);
  const std::size_t N = grid.size();
  if (chi.size() != N) throw DimensionMismatch("characteristic function does not match the lattice");
  fftw_complex* buf = fftw_alloc_complex(N);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    std::vector<int> dims(grid.dim, grid.n);
    plan = fftw_plan_dft(grid.dim, dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < N; ++i) {
    const cd v = parity(i, grid) ? -chi[i] : chi[i];
    buf[i][0] = v.real();
    buf[i][1] = v.imag();
  }
  fftw_execute(plan);
  const double c = std::pow(grid.du / (2.0 * kPi), grid.dim);
  std::vector<double> f(N);
  for (std::size_t i = 0; i < N; ++i) f[i] = c * (parity(i, grid) ? -buf[i][0] : buf[i][0]);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return f;
}

namespace {

// Zero-pads the lattice by factor P per axis: same du, P times finer dx on the same spatial window.
std::vector<cd> pad_lattice(const std::vector<cd>& chi, const FourierGrid& g, int P) {
  const std::size_t n = static_cast<std::size_t>(g.n), m = n * static_cast<std::size_t>(P);
  const std::size_t off = (m - n) / 2;
  std::size_t M = 1;
  for (int a = 0; a < g.dim; ++a) M *= m;
  std::vector<cd> out(M, cd(0.0, 0.0));
  for (std::size_t i = 0; i < chi.size(); ++i) {
    std::size_t rest = i, j = 0, stride = 1;
    for (int a = 0; a < g.dim; ++a) {
      j += (rest % n + off) * stride;
      rest /= n;
      stride *= m;
    }
    out[j] = chi[i];
  }
  return out;
}

int refinement_factor(const FourierGrid& g) {
  const double cap = std::max(static_cast<double>(g.size()), 2097152.0);
  for (int P : {8, 4, 2}) {
    if (std::pow(static_cast<double>(P) * g.n, g.dim) <= cap) return P;
  }
  return 1;
}

double lattice_l1(const std::vector<double>& fa, const std::vector<double>& fb, const FourierGrid& g) {
  double l1 = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) l1 += std::abs(fa[i] - fb[i]);
  return l1 * std::pow(g.dx(), g.dim);
}

}  // namespace

TVEstimate tv_fourier_ou(const std::vector<cd>& charA, const std::vector<cd>& charB, const FourierGrid& grid,
                         double boundary_tol) {
  check_grid(grid);
  const std::size_t N = grid.size();
  if (charA.size() != N || charB.size() != N) throw DimensionMismatch("characteristic functions do not match the lattice");
  double boundary = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    if (on_boundary(i, grid)) boundary = std::max({boundary, std::abs(charA[i]), std::abs(charB[i])});
  }
  if (boundary > boundary_tol) throw GridTooSmall("characteristic function has not decayed at the lattice boundary", boundary);
  const double coarse = lattice_l1(fourier_density(charA, grid), fourier_density(charB, grid), grid);
  const int P = refinement_factor(grid);
  FourierGrid fine = grid;
  fine.n = grid.n * P;
  const auto fa = P > 1 ? fourier_density(pad_lattice(charA, grid, P), fine) : fourier_density(charA, grid);
  const auto fb = P > 1 ? fourier_density(pad_lattice(charB, grid, P), fine) : fourier_density(charB, grid);
  const double cell = std::pow(fine.dx(), fine.dim);
  double mass_a = 0.0, mass_b = 0.0, neg = 0.0, edge = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    mass_a += fa[i];
    mass_b += fb[i];
    neg += std::max(0.0, -fa[i]) + std::max(0.0, -fb[i]);
    peak = std::max({peak, fa[i], fb[i]});
    if (on_boundary(i, fine)) edge = std::max({edge, std::abs(fa[i]), std::abs(fb[i])});
  }
  const double fine_l1 = lattice_l1(fa, fb, fine);
  TVEstimate est;
  est.method = "fourier";
  est.raw = 0.5 * fine_l1;
  est.value = std::clamp(est.raw, 0.0, 1.0);
  const double aliasing = peak > 0.0 ? edge / peak : 0.0;
  est.ci = std::abs(mass_a * cell - 1.0) + std::abs(mass_b * cell - 1.0) + neg * cell + boundary +
           0.5 * std::abs(fine_l1 - coarse);
  est.meta = {{"n", grid.n}, {"du", grid.du}, {"dx", fine.dx()}, {"dim", grid.dim}, {"refinement", P},
              {"boundary_charfn", boundary}, {"aliasing_indicator", aliasing},
              {"mass_a", mass_a * cell}, {"mass_b", mass_b * cell}};
  return est;
}

TVEstimate tv_fourier_ou(const std::function<cd(const Vec&)>& charA, const std::function<cd(const Vec&)>& charB,
                         const FourierGrid& grid, double boundary_tol) {
  check_grid(grid);
  const std::size_t N = grid.size();
  std::vector<cd> a(N), b(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Vec u = grid.point(i);
    a[i] = charA(u);
    b[i] = charB(u);
  }
  return tv_fourier_ou(a, b, grid, boundary_tol);
}

FourierGrid fourier_grid_for(int dim, double alpha, double scale, double spatial_extent, double tol) {
  if (!(scale > 0.0) || !(spatial_extent > 0.0)) throw InvalidParameter("scale and extent must be positive");
  const double U = std::pow(std::log(1.0 / tol) / scale, 1.0 / alpha);
  FourierGrid g;
  g.dim = dim;
  g.du = kPi / spatial_extent;
  int n = 8;
  while (0.5 * (n - 2) * g.du < U) n *= 2;
  g.n = n;
  return g;
}

double tv_shift_unimodal_1d(const std::function<double(double)>& F, double z) {
  z = std::abs(z);
  if (z == 0.0) return 0.0;
  return std::clamp(2.0 * F(0.5 * z) - 1.0, 0.0, 1.0);
}

double tv_radial_shift(const std::function<double(double)>& g, double r, int d, const QuadParams& quad) {
  if (d < 1) throw InvalidParameter("dimension must be positive");
  r = std::abs(r);
  const double R = std::max(10.0, 10.0 * r);
  double prev = g(0.0);
  for (int i = 1; i <= 400; ++i) {
    const double v = g(R * i / 400.0);
    if (v > prev * (1.0 + 1e-12) + 1e-300) throw InvalidParameter("radial profile is not monotone decreasing");
    prev = v;
  }
  if (r == 0.0) return 0.0;
  std::function<double(double)> g1;
  if (d == 1) {
    g1 = [&](double s) { return g(std::abs(s)); };
  } else {
    const double area = 2.0 * std::pow(kPi, 0.5 * (d - 1)) / std::tgamma(0.5 * (d - 1));
    g1 = [&, area](double s) {
      auto f = [&](double w) { return g(std::sqrt(s * s + w * w)) * std::pow(w, d - 2); };
      QuadResult q = integrate_to_inf(f, 0.0, quad);
      return area * q.value;
    };
  }
  QuadResult res = integrate_gk(g1, 0.0, 0.5 * r, quad);
  check_quadrature(res, quad, "radial shift");
  return std::clamp(2.0 * res.value, 0.0, 1.0);
}

OuCharFn::OuCharFn(const Mat& J, const LevyMeasureSpec& spec, double eps, double t, const QuadParams& quad)
    : J_(J), spec_(spec), eps_(eps), t_(t), quad_(quad) {
  spec.validate();
  if (J.rows() != spec.dim || J.cols() != spec.dim) throw DimensionMismatch("J does not match the noise dimension");
  if (!(t >= 0.0)) throw InvalidParameter("time must be non-negative");
  Eigen::ComplexEigenSolver<Mat> es(J);
  double dmin = INFINITY;
  for (int i = 0; i < J.rows(); ++i) dmin = std::min(dmin, es.eigenvalues()(i).real());
  if (!(dmin > 0.0)) throw DomainError("J must have eigenvalues with positive real parts");
  const int d = spec.dim;
  const double a = spec.alpha;
  if (spec.exactly_stable() && spec.symmetric()) law_ = stable_limit(spec);
  const Mat S = 0.5 * (J + J.transpose());
  const double c = S.trace() / d;
  const bool scalar_sym = (S - c * Mat::Identity(d, d)).norm() <= 1e-12 * std::max(1.0, J.norm());
  const bool skew_free = (J - S).norm() <= 1e-12 * std::max(1.0, J.norm());
  if (law_ && scalar_sym && (skew_free || law_->isotropic)) {
    closed_ = true;
    const double span = std::isinf(t) ? 1.0 : -std::expm1(-a * c * t);
    closed_coeff_ = std::pow(std::abs(eps), a) * span / (a * c);
    horizon_ = t;
    return;
  }
  horizon_ = std::isinf(t) ? 60.0 / dmin : t;
  const int panels = std::max(20, static_cast<int>(std::ceil(horizon_ * dmin / 0.25)));
  gauss_legendre_panels(0.0, horizon_, std::min(panels, 400), nodes_, weights_);
  const Mat Jt = J.transpose();
  for (double s : nodes_) propagators_.push_back(Mat((-Jt * s).exp()));
}

cd OuCharFn::operator()(const Vec& z) const {
  if (z.size() != spec_.dim) throw DimensionMismatch("frequency has wrong dimension");
  if (z.norm() == 0.0) return {1.0, 0.0};
  if (closed_) return std::exp(cd(closed_coeff_ * law_->exponent(z), 0.0));
  cd acc(0.0, 0.0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Vec w = eps_ * (propagators_[i] * z);
    const cd psi = law_ ? cd(law_->exponent(w), 0.0) : char_exponent(spec_, w, quad_);
    acc += weights_[i] * psi;
  }
  return std::exp(acc);
}

cd OuCharFn::shifted(const Vec& z, const Vec& shift) const {
  return std::exp(cd(0.0, z.dot(shift))) * (*this)(z);
}

cd ou_stationary_charfn(const Mat& J, const LevyMeasureSpec& spec, double eps, const Vec& z, const QuadParams& quad) {
  return OuCharFn(J, spec, eps, INFINITY, quad)(z);
}

cd ou_marginal_charfn(const Mat& J, const LevyMeasureSpec& spec, double eps, const Vec& x, double t, const Vec& z,
                      const QuadParams& quad) {
  const OuCharFn chi(J, spec, eps, t, quad);
  const Vec shift = Mat((-J * t).exp()) * x;
  return chi.shifted(z, shift);
}

SlutskyResult slutsky_demo(long n, double a_n) {
  if (n < 1) throw InvalidParameter("n must be positive");
  if (!(a_n > 0.0)) throw InvalidParameter("a_n must be positive");
  SlutskyResult res;
  res.n = n;
  res.a_n = a_n;
  res.n_times_an = static_cast<double>(n) * a_n;
  std::vector<double> br = {0.0, 1.0};
  br.reserve(2 * static_cast<std::size_t>(n) + 2);
  for (long j = 1; j <= n; ++j) {
    br.push_back(static_cast<double>(j) / n);
    br.push_back(static_cast<double>(j) / n + a_n);
  }
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  const double nd = static_cast<double>(n);
  double l1 = 0.0;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    const double lo = br[i], hi = br[i + 1];
    const double m = 0.5 * (lo + hi);
    const long jh = std::min(n, static_cast<long>(std::floor(m * nd)));
    const long jl = std::max(1L, static_cast<long>(std::ceil((m - a_n) * nd)));
    const double f = static_cast<double>(std::max(0L, jh - jl + 1)) / (nd * a_n);
    const double u = (m >= 0.0 && m <= 1.0) ? 1.0 : 0.0;
    l1 += std::abs(f - u) * (hi - lo);
  }
  res.tv_Xn_vs_U = std::clamp(0.5 * l1, 0.0, 1.0);
  res.tv_XnYn_vs_U = 1.0;
  res.regime = res.n_times_an > 1.0 ? "n*a_n large" : "n*a_n small";
  res.note =
      "hypothesis n*a_n -> 0 conflicts with the convergence regime n*a_n -> infinity; "
      "tv(X_n, U) -> 0 needs the latter";
  return res;
}

}  // namespace cutoff
