#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

#include "consensus/graph.hpp"
#include "consensus/metric.hpp"

namespace consensus {

/// Sampled solution of a consensus flow. `weights` is the left-invariant
/// functional of the flow (the Perron vector for linear dynamics, ones for
/// the Markov dual and symmetric nonlinear diffusions) and
/// `conserved = weights . x(0)` stays constant along the samples.
struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  Eigen::VectorXd weights;
  double conserved = 0.0;
  bool stopped_early = false;  ///< ||dx/dt||_inf fell below 1e-12 ||x||_inf

  const Eigen::VectorXd& terminal_state() const { return states.back(); }
  double terminal_time() const { return times.back(); }
  int sample_count() const { return static_cast<int>(times.size()); }
};

/// P(t) = exp(-L t): a stochastic matrix (rows sum to 1, entries >= 0).
struct FlowMap {
  Eigen::MatrixXd matrix;
  double horizon = 0.0;
};

/// Ingredients of the state-dependent Laplacian L_hf(x): off-diagonal
/// -w_ij (h(rho_i) - h(rho_j)) / (f(rho_i) - f(rho_j)) with rho = x / alpha.
struct NonlinearSpec {
  ScalarFunction f;
  ScalarFunction h;
  double alpha = 1.0;
};

FlowMap flow_map(const LaplacianMatrix& L, double t);

/// Step-size stability bound 1/(2 max_i L_ii) for the explicit integrator.
double linear_step_bound(const LaplacianMatrix& L);

/// Classical 4th-order fixed-step integration of dx/dt = -L x, sampled every
/// `record_stride` steps (every step by default). Errors if dt exceeds the
/// stability bound.
Trajectory integrate_linear(const LaplacianMatrix& L,
                            const Eigen::VectorXd& x0, double t_end, double dt,
                            int record_stride = 1);

/// Kolmogorov forward equation dp^T/dt = -p^T L from a probability vector;
/// converges to the Perron vector.
Trajectory markov_dual(const LaplacianMatrix& L, const Eigen::VectorXd& p0,
                       double t_end, double dt, int record_stride = 1);

Eigen::MatrixXd nonlinear_laplacian(const LaplacianMatrix& L,
                                    const NonlinearSpec& spec,
                                    const Eigen::VectorXd& x);

/// Integrates dx/dt = -L_hf(x) x with positivity-preserving step halving
/// (minimum substep 1e-9).
Trajectory integrate_nonlinear(const LaplacianMatrix& L,
                               const NonlinearSpec& spec,
                               const Eigen::VectorXd& x0, double t_end,
                               double dt, int record_stride = 1);

/// The conserved agreement value a(x0) = q . x0.
double consensus_value(const PerronVector& q, const Eigen::VectorXd& x0);

/// rho = x / a; satisfies q . rho = 1.
Eigen::VectorXd density(const Eigen::VectorXd& x, double a);

/// CSV export: header "t,x0,...,x{n-1}", one row per sample, 17 significant
/// digits.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace consensus
