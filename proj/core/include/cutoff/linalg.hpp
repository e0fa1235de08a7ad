#pragma once

#include <Eigen/Dense>
#include <complex>

namespace cutoff {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using cd = std::complex<double>;

}  // namespace cutoff
