#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>

#include "consensus/graph.hpp"

namespace consensus {

/// Open interval of the real line; infinite ends for unbounded domains.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double u) const { return u > lo && u < hi; }
};

/// Scalar potential H with analytic first and second derivatives on an open
/// domain. Strict convexity (H'' > 0) is a caller obligation, checkable by
/// sampling via is_strictly_convex_on; the bundle itself is passive so that
/// deliberately concave probes can reuse the same machinery.
struct ConvexPotential {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::function<double(double)> second_derivative;
  Interval domain;
  std::string name;
  /// Optional cancellation-free H'(a) - H'(b); keeps divided differences of
  /// nearly equal arguments (and shifted potentials like entropy vs gibbs)
  /// accurate to rounding. Must be exactly antisymmetric.
  std::function<double(double, double)> derivative_difference;
};

/// H(u) = (u - ref)^2 / 2 on all of R.
ConvexPotential builtin_quadratic(double ref);

/// H(u) = u ln u on (0, inf).
ConvexPotential builtin_entropy();

/// H(u) = u (ln u - 1) + 1 on (0, inf); minimum 0 at u = 1.
ConvexPotential builtin_gibbs();

/// Samples H'' at `samples` points of [lo, hi] and reports whether all are
/// strictly positive.
bool is_strictly_convex_on(const ConvexPotential& H, double lo, double hi,
                           int samples = 1000);

/// The additive functional V(x) = beta * sum_i q_i H(c x_i).
struct AdditiveLyapunov {
  double beta = 1.0;
  double c = 1.0;
  PerronVector q;
  ConvexPotential potential;

  /// Normalized form V(x) = alpha * sum_i H(x_i / alpha): beta = n*alpha,
  /// c = 1/alpha, uniform q.
  static AdditiveLyapunov normalized(ConvexPotential H, int n, double alpha);
};

double lyapunov_value(const AdditiveLyapunov& V, const Eigen::VectorXd& x);

/// Analytic gradient, component i: beta * q_i * c * H'(c x_i).
Eigen::VectorXd lyapunov_gradient(const AdditiveLyapunov& V,
                                  const Eigen::VectorXd& x);

/// sum_i q_i H(p_i / q_i) between probability vectors (KL divergence for the
/// entropy potential).
double f_divergence(const ConvexPotential& H, const Eigen::VectorXd& p,
                    const Eigen::VectorXd& q);

/// x^T L x / 2 for symmetric L.
double laplacian_potential(const LaplacianMatrix& L, const Eigen::VectorXd& x);

/// ||x - a(x) 1||^2 / 2 with a(x) = q . x.
double sum_of_squares(const PerronVector& q, const Eigen::VectorXd& x);

/// Dissipation rate Psi_V(x) = grad V(x) . L x for symmetric L; nonnegative,
/// zero exactly at consensus.
double group_disagreement(const LaplacianMatrix& L, const AdditiveLyapunov& V,
                          const Eigen::VectorXd& x);

struct DisagreementReport {
  double laplacian_potential = 0.0;  ///< V_L
  double group_disagreement = 0.0;   ///< Psi_L = 2 V_L
  double collective = 0.0;           ///< V_SoS
  double generalized = 0.0;          ///< Psi_V
};

DisagreementReport disagreement_report(const LaplacianMatrix& L,
                                       const AdditiveLyapunov& V,
                                       const Eigen::VectorXd& x);

}  // namespace consensus
