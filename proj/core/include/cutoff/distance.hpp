#pragma once

#include <cstdint>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cutoff/levy_model.hpp"
#include "cutoff/linalg.hpp"
#include "cutoff/quadrature.hpp"

namespace cutoff {

struct TVEstimate {
  double value = 0.0;
  // Half-width of the 95% confidence interval.
  double ci = 0.0;
  std::string method;
  // Plug-in value before bias correction and its bootstrap bias estimate (hist method).
  double raw = 0.0;
  double bias = 0.0;
  // Upward bias order cells / n reported by the hist method.
  double bias_order = 0.0;
  nlohmann::json meta = nlohmann::json::object();
};

struct HistOptions {
  // Bins per axis; 0 selects min(64, floor(n^{1/(d+2)})).
  int bins_per_axis = 0;
  int bootstrap = 200;
  // Columns of A and B are paired draws (common random numbers); resample pairs jointly.
  bool paired = false;
  bool bias_correct = true;
  std::uint64_t seed = 0x5eed0001ull;
};

// Samples are stored column-wise (dim x n).
TVEstimate tv_hist(const Mat& A, const Mat& B, const HistOptions& opts = {});

// Square lattice u_k = (k - n/2) du per axis, k = 0..n-1; n divisible by 4.
struct FourierGrid {
  int dim = 1;
  int n = 4096;
  double du = 0.01;

  std::size_t size() const;
  // Frequency point for a flat row-major lattice index.
  Vec point(std::size_t flat) const;
  double dx() const;
};

// Characteristic functions sampled on the lattice (row-major flat order).
TVEstimate tv_fourier_ou(const std::vector<cd>& charA, const std::vector<cd>& charB, const FourierGrid& grid,
                         double boundary_tol = 1e-12);
// Convenience: evaluate both characteristic functions on the lattice first.
TVEstimate tv_fourier_ou(const std::function<cd(const Vec&)>& charA, const std::function<cd(const Vec&)>& charB,
                         const FourierGrid& grid, double boundary_tol = 1e-12);
// Lattice density of a characteristic function (row-major flat order over x_j = (j - n/2) dx).
std::vector<double> fourier_density(const std::vector<cd>& chi, const FourierGrid& grid);

// Grid spacing so |chi| < tol at the boundary, given -log|chi(u)| >= scale * |u|^alpha.
FourierGrid fourier_grid_for(int dim, double alpha, double scale, double spatial_extent, double tol = 1e-12);

// Total variation between a symmetric unimodal law with cdf F and its shift by z.
double tv_shift_unimodal_1d(const std::function<double(double)>& F, double z);

// Total variation between a radial density g(|z|) on R^d and its shift by r e_1.
double tv_radial_shift(const std::function<double(double)>& g, double r, int d, const QuadParams& quad = {});

// Characteristic function of eps * Z_t started at x for dZ = -J Z dt + dL, t = inf for the stationary law:
// exp(i<z, e^{-Jt} x> + int_0^t psi(eps e^{-J^T s} z) ds).
class OuCharFn {
 public:
  OuCharFn(const Mat& J, const LevyMeasureSpec& spec, double eps, double t = INFINITY, const QuadParams& quad = {});

  cd operator()(const Vec& z) const;
  // Same law shifted by the deterministic vector shift.
  cd shifted(const Vec& z, const Vec& shift) const;
  double horizon() const { return horizon_; }

 private:
  Mat J_;
  LevyMeasureSpec spec_;
  double eps_ = 0.0;
  double t_ = 0.0;
  double horizon_ = 0.0;
  QuadParams quad_;
  bool closed_ = false;
  double closed_coeff_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<Mat> propagators_;
  std::optional<StableLaw> law_;
};

cd ou_stationary_charfn(const Mat& J, const LevyMeasureSpec& spec, double eps, const Vec& z,
                        const QuadParams& quad = {});
cd ou_marginal_charfn(const Mat& J, const LevyMeasureSpec& spec, double eps, const Vec& x, double t,
                      const Vec& z, const QuadParams& quad = {});

struct SlutskyResult {
  long n = 0;
  double a_n = 0.0;
  double tv_Xn_vs_U = 0.0;
  double tv_XnYn_vs_U = 1.0;
  double n_times_an = 0.0;
  std::string regime;
  std::string note;
};

// U_n uniform on {1/n, ..., 1}, R_n uniform on [0, a_n], X_n = U_n + R_n, Y_n = -R_n.
SlutskyResult slutsky_demo(long n, double a_n);

}  // namespace cutoff
