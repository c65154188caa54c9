#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <utility>

#include "consensus/graph.hpp"
#include "consensus/potential.hpp"

namespace consensus {

/// Increasing scalar map with its derivative; the ingredient of divided
/// differences and state-dependent Laplacians. `diff`, when set, evaluates
/// f(a) - f(b) without cancellation (e.g. log1p for logarithms); it must be
/// exactly antisymmetric. Divided differences of nearly equal arguments are
/// then accurate to rounding instead of losing half the mantissa.
struct ScalarFunction {
  std::function<double(double)> f;
  std::function<double(double)> df;
  Interval domain;
  std::string name;
  std::function<double(double, double)> diff;
};

/// ln(a) - ln(b) via log1p of the relative gap; exactly antisymmetric.
double stable_log_difference(double a, double b);

ScalarFunction identity_function();
ScalarFunction log_function();
/// u^p on (0, inf); p must be positive so the map is increasing.
ScalarFunction power_function(double p);
/// H' with derivative H''.
ScalarFunction derivative_of(const ConvexPotential& H);

/// Relative width below which divided differences switch to the midpoint
/// derivative limit.
inline constexpr double kNearEqualRelTol = 1e-8;

/// (a - b) / (f(a) - f(b)), with the limit 1/f'((a+b)/2) at near-identical
/// arguments. Positive and symmetric in the arguments for increasing f.
double divided_difference(const ScalarFunction& f, double a, double b);

/// (a - b) / (ln a - ln b); lies between the geometric and arithmetic means.
double log_mean(double a, double b);

/// (h(a) - h(b)) / (f(a) - f(b)), limit h'/f' at the midpoint.
double difference_ratio(const ScalarFunction& h, const ScalarFunction& f,
                        double a, double b);

/// Symmetric state-dependent matrix with Laplacian structure: off-diagonal
/// -w_ij * K_f(y_i, y_j) on the generating graph's edges, rows summing to
/// zero. Positive semi-definite with kernel span{1} on connected graphs.
struct MetricMatrix {
  Eigen::MatrixXd entries;
  Eigen::VectorXd state;  ///< the x it was evaluated at
  double alpha = 1.0;

  int size() const { return static_cast<int>(entries.rows()); }
};

/// Diagonal of edge weights aligned with an IncidenceMatrix row order.
struct EdgeWeightMatrix {
  Eigen::VectorXd diagonal;
};

MetricMatrix kirchhoff_form_matrix(const LaplacianMatrix& L,
                                   const ScalarFunction& f,
                                   const Eigen::VectorXd& y);

/// The inverse metric G^{-1}(x) = alpha * K_{H'}(x / alpha) that turns the
/// linear consensus flow into a gradient descent of the normalized additive
/// potential.
MetricMatrix metric_matrix(const LaplacianMatrix& L, const ConvexPotential& H,
                           const Eigen::VectorXd& x, double alpha);

/// ||-L x + G^{-1}(x) grad V(x)||_inf / max(1, ||L x||_inf) with V the
/// normalized additive potential for H.
double gradient_identity_residual(const LaplacianMatrix& L,
                                  const ConvexPotential& H,
                                  const Eigen::VectorXd& x, double alpha);

/// Kirchhoff-Ohm factorization G^{-1}(x) = M^T W M with M the undirected
/// incidence matrix and W the positive diagonal of edge conductances
/// alpha * w_ij * K_{H'}(rho_i, rho_j).
std::pair<IncidenceMatrix, EdgeWeightMatrix> factorize(
    const LaplacianMatrix& L, const ConvexPotential& H,
    const Eigen::VectorXd& x, double alpha);

}  // namespace consensus
