#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace consensus::detail {

// Dense matrix exponential by scaling-and-squaring with a truncated Taylor
// series: halve until ||A||_inf <= 0.5, sum 20 terms, square back up.
// Intermediates are long double so the repeated squarings keep row sums of
// stochastic results well below 1e-12.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
  using MatrixXl = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const int n = static_cast<int>(A.rows());
  const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double s = 1.0;
  while (norm * s > 0.5) {
    s *= 0.5;
    ++squarings;
  }

  MatrixXl B = (A * s).cast<long double>();
  MatrixXl result = MatrixXl::Identity(n, n);
  MatrixXl term = MatrixXl::Identity(n, n);
  for (int k = 1; k <= 20; ++k) {
    term = (term * B / static_cast<long double>(k)).eval();
    result += term;
  }
  for (int k = 0; k < squarings; ++k) {
    result = (result * result).eval();
  }
  return result.cast<double>();
}

}  // namespace consensus::detail
