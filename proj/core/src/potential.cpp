#include "consensus/potential.hpp"

#include "consensus/metric.hpp"

#include <cmath>
#include <stdexcept>

namespace consensus {

namespace {

// ln underflow guard: entropy-family potentials reject arguments below this.
constexpr double kLogGuard = 1e-300;

void check_positive_params(const AdditiveLyapunov& V) {
  if (!(V.beta > 0.0)) {
    throw std::invalid_argument("lyapunov: beta must be positive");
  }
  if (!(V.c > 0.0)) {
    throw std::invalid_argument("lyapunov: c must be positive");
  }
}

void check_in_domain(const ConvexPotential& H, double u, int index) {
  const bool guarded = (H.domain.lo == 0.0) && (u < kLogGuard);
  if (guarded || !H.domain.contains(u)) {
    throw std::domain_error("potential '" + H.name + "': argument " +
                            std::to_string(u) + " at index " +
                            std::to_string(index) + " outside domain");
  }
}

void require_symmetric(const LaplacianMatrix& L, const char* op) {
  if (!L.symmetric) {
    throw std::invalid_argument(std::string(op) +
                                ": requires a symmetric Laplacian");
  }
}

}  // namespace

ConvexPotential builtin_quadratic(double ref) {
  ConvexPotential H;
  H.value = [ref](double u) { return 0.5 * (u - ref) * (u - ref); };
  H.derivative = [ref](double u) { return u - ref; };
  H.second_derivative = [](double) { return 1.0; };
  H.domain = Interval{};
  H.name = "quadratic";
  H.derivative_difference = [](double a, double b) { return a - b; };
  return H;
}

ConvexPotential builtin_entropy() {
  ConvexPotential H;
  H.value = [](double u) { return u * std::log(u); };
  H.derivative = [](double u) { return std::log(u) + 1.0; };
  H.second_derivative = [](double u) { return 1.0 / u; };
  H.domain = Interval{0.0, std::numeric_limits<double>::infinity()};
  H.name = "entropy";
  H.derivative_difference = stable_log_difference;
  return H;
}

ConvexPotential builtin_gibbs() {
  ConvexPotential H;
  H.value = [](double u) { return u * (std::log(u) - 1.0) + 1.0; };
  H.derivative = [](double u) { return std::log(u); };
  H.second_derivative = [](double u) { return 1.0 / u; };
  H.domain = Interval{0.0, std::numeric_limits<double>::infinity()};
  H.name = "gibbs";
  H.derivative_difference = stable_log_difference;
  return H;
}

bool is_strictly_convex_on(const ConvexPotential& H, double lo, double hi,
                           int samples) {
  if (!(lo < hi) || samples < 2) {
    throw std::invalid_argument("convexity check: bad sampling interval");
  }
  for (int k = 0; k < samples; ++k) {
    const double u = lo + (hi - lo) * k / (samples - 1);
    if (!H.domain.contains(u)) return false;
    if (!(H.second_derivative(u) > 0.0)) return false;
  }
  return true;
}

AdditiveLyapunov AdditiveLyapunov::normalized(ConvexPotential H, int n,
                                              double alpha) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("lyapunov: alpha must be positive");
  }
  return AdditiveLyapunov{alpha * n, 1.0 / alpha, PerronVector::uniform(n),
                          std::move(H)};
}

double lyapunov_value(const AdditiveLyapunov& V, const Eigen::VectorXd& x) {
  check_positive_params(V);
  if (V.q.q.size() != x.size()) {
    throw std::invalid_argument("lyapunov: state/weight dimension mismatch");
  }
  double sum = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double u = V.c * x(i);
    check_in_domain(V.potential, u, i);
    sum += V.q.q(i) * V.potential.value(u);
  }
  return V.beta * sum;
}

Eigen::VectorXd lyapunov_gradient(const AdditiveLyapunov& V,
                                  const Eigen::VectorXd& x) {
  check_positive_params(V);
  if (V.q.q.size() != x.size()) {
    throw std::invalid_argument("lyapunov: state/weight dimension mismatch");
  }
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const double u = V.c * x(i);
    check_in_domain(V.potential, u, i);
    g(i) = V.beta * V.q.q(i) * V.c * V.potential.derivative(u);
  }
  return g;
}

double f_divergence(const ConvexPotential& H, const Eigen::VectorXd& p,
                    const Eigen::VectorXd& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("f-divergence: dimension mismatch");
  }
  if (p.minCoeff() <= 0.0 || q.minCoeff() <= 0.0) {
    throw std::invalid_argument("f-divergence: inputs must be positive");
  }
  if (std::abs(p.sum() - 1.0) > 1e-9 || std::abs(q.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("f-divergence: inputs must sum to 1");
  }
  double sum = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    const double r = p(i) / q(i);
    check_in_domain(H, r, i);
    sum += q(i) * H.value(r);
  }
  return sum;
}

double laplacian_potential(const LaplacianMatrix& L, const Eigen::VectorXd& x) {
  require_symmetric(L, "laplacian potential");
  return 0.5 * x.dot(L.entries * x);
}

double sum_of_squares(const PerronVector& q, const Eigen::VectorXd& x) {
  const double a = q.q.dot(x);
  return 0.5 * (x.array() - a).square().sum();
}

double group_disagreement(const LaplacianMatrix& L, const AdditiveLyapunov& V,
                          const Eigen::VectorXd& x) {
  require_symmetric(L, "group disagreement");
  return lyapunov_gradient(V, x).dot(L.entries * x);
}

DisagreementReport disagreement_report(const LaplacianMatrix& L,
                                       const AdditiveLyapunov& V,
                                       const Eigen::VectorXd& x) {
  DisagreementReport r;
  r.laplacian_potential = laplacian_potential(L, x);
  r.group_disagreement = 2.0 * r.laplacian_potential;
  r.collective = sum_of_squares(V.q, x);
  r.generalized = group_disagreement(L, V, x);
  return r;
}

}  // namespace consensus
