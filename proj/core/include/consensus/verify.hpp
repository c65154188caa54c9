#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "consensus/dynamics.hpp"
#include "consensus/graph.hpp"
#include "consensus/metric.hpp"
#include "consensus/potential.hpp"

namespace consensus {

/// Outcome of one named identity check. passed <=> residual <= tolerance.
struct CheckReport {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  std::string context;
};

/// Global tolerance switch: strict scales every tolerance by 0.1, lenient
/// by 10.
enum class ToleranceMode { strict, normal, lenient };

double tolerance_scale(ToleranceMode mode);

/// One-line serialization: name, pass/fail, residual, tolerance, seed,
/// context.
std::string format_report(const CheckReport& r);

/// Gradient-flow identity: -Lx = -G^{-1}(x) grad V(x), tolerance 1e-10.
CheckReport check_gradient_identity(const LaplacianMatrix& L,
                                    const ConvexPotential& H,
                                    const Eigen::VectorXd& x, double alpha,
                                    std::uint64_t seed = 0,
                                    ToleranceMode mode = ToleranceMode::normal);

/// Negative control: perturbs one metric entry by 1e-3 and passes iff the
/// gradient-flow identity check detects the corruption.
CheckReport check_gradient_identity_corrupted(
    const LaplacianMatrix& L, const ConvexPotential& H,
    const Eigen::VectorXd& x, double alpha, std::uint64_t seed = 0,
    ToleranceMode mode = ToleranceMode::normal);

/// Centered-difference dV/dt against -Psi_V along a linear trajectory,
/// tolerance max(10 dt^2, 1e-9). Needs at least 3 samples.
CheckReport check_dissipation(const LaplacianMatrix& L,
                              const AdditiveLyapunov& V, const Trajectory& traj,
                              std::uint64_t seed = 0,
                              ToleranceMode mode = ToleranceMode::normal);

/// Probe with the concave H(u) = -u^2: the additive functional must increase
/// on some sampled segment (it cannot be a Lyapunov function).
CheckReport check_concave_increase(const LaplacianMatrix& L,
                                   const Eigen::VectorXd& x0,
                                   std::uint64_t seed = 0,
                                   ToleranceMode mode = ToleranceMode::normal);

/// Rows of exp(-Lt) sum to 1 and entries are nonnegative (to -1e-12) over a
/// grid of horizons.
CheckReport check_stochastic_flow(const LaplacianMatrix& L,
                                  const std::vector<double>& t_grid,
                                  std::uint64_t seed = 0,
                                  ToleranceMode mode = ToleranceMode::normal);

/// ||P(s) P(t) - P(s+t)||_max <= 1e-10.
CheckReport check_semigroup(const LaplacianMatrix& L, double s, double t,
                            std::uint64_t seed = 0,
                            ToleranceMode mode = ToleranceMode::normal);

/// q . x(t) stays within 1e-8 (relative) of its initial value.
CheckReport check_conservation(const Trajectory& traj, const PerronVector& q,
                               std::uint64_t seed = 0,
                               ToleranceMode mode = ToleranceMode::normal);

/// Strict decrease of V between consecutive samples while the state is more
/// than 1e-6 from consensus (margin 0).
CheckReport check_monotone_decrease(const AdditiveLyapunov& V,
                                    const Trajectory& traj,
                                    std::uint64_t seed = 0,
                                    ToleranceMode mode = ToleranceMode::normal);

/// Erdos-Renyi instance with edge probability 2 ln(n)/n, weights uniform in
/// [0.5, 2], rejection-sampled for strong connectivity; symmetric graphs
/// carry each undirected edge with one weight in both directions.
WeightedDigraph random_connected_graph(int n, std::uint64_t seed,
                                       bool symmetric);

Eigen::VectorXd random_positive_state(int n, std::uint64_t seed,
                                      double lo = 0.5, double hi = 2.0);

/// Smallest real part among nonzero eigenvalues of L (algebraic connectivity
/// for symmetric L).
double spectral_gap(const LaplacianMatrix& L);

/// Runs every named check on `count` seeded random instances per size.
std::vector<CheckReport> run_verification_suite(
    std::uint64_t seed, int count, const std::vector<int>& sizes,
    ToleranceMode mode = ToleranceMode::normal);

}  // namespace consensus
