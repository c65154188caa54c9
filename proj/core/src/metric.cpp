#include "consensus/metric.hpp"

#include <cmath>
#include <stdexcept>

namespace consensus {

namespace {

void check_domain(const ScalarFunction& f, double u, int index) {
  if (!f.domain.contains(u)) {
    throw std::domain_error("function '" + f.name + "': argument " +
                            std::to_string(u) + " at index " +
                            std::to_string(index) + " outside domain");
  }
}

bool near_equal(double fa, double fb) {
  return std::abs(fa - fb) <=
         kNearEqualRelTol * std::max({1.0, std::abs(fa), std::abs(fb)});
}

void require_symmetric(const LaplacianMatrix& L, const char* op) {
  if (!L.symmetric) {
    throw std::invalid_argument(std::string(op) +
                                ": requires a symmetric Laplacian");
  }
}

}  // namespace

double stable_log_difference(double a, double b) {
  if (a >= b) {
    return std::log1p((a - b) / b);
  }
  return -std::log1p((b - a) / a);
}

ScalarFunction identity_function() {
  return {[](double u) { return u; }, [](double) { return 1.0; }, Interval{},
          "identity", [](double a, double b) { return a - b; }};
}

ScalarFunction log_function() {
  return {[](double u) { return std::log(u); },
          [](double u) { return 1.0 / u; },
          Interval{0.0, std::numeric_limits<double>::infinity()}, "log",
          stable_log_difference};
}

ScalarFunction power_function(double p) {
  if (!(p > 0.0)) {
    throw std::invalid_argument("power function: exponent must be positive");
  }
  return {[p](double u) { return std::pow(u, p); },
          [p](double u) { return p * std::pow(u, p - 1.0); },
          Interval{0.0, std::numeric_limits<double>::infinity()},
          "power " + std::to_string(p),
          nullptr};
}

ScalarFunction derivative_of(const ConvexPotential& H) {
  return {H.derivative, H.second_derivative, H.domain, H.name + "'",
          H.derivative_difference};
}

double divided_difference(const ScalarFunction& f, double a, double b) {
  if (!f.domain.contains(a) || !f.domain.contains(b)) {
    throw std::domain_error("divided difference: argument outside domain of " +
                            f.name);
  }
  const double fa = f.f(a);
  const double fb = f.f(b);
  if (near_equal(fa, fb)) {
    const double d = f.df(0.5 * (a + b));
    if (!(d > 0.0)) {
      throw std::runtime_error(
          "divided difference: derivative of " + f.name +
          " vanishes at the midpoint (function not strictly increasing)");
    }
    return 1.0 / d;
  }
  const double k = (a - b) / (f.diff ? f.diff(a, b) : fa - fb);
  if (!(k > 0.0)) {
    throw std::runtime_error("divided difference: nonpositive ratio; " +
                             f.name + " is not increasing on [" +
                             std::to_string(std::min(a, b)) + ", " +
                             std::to_string(std::max(a, b)) + "]");
  }
  return k;
}

double log_mean(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("log mean: arguments must be positive");
  }
  return divided_difference(log_function(), a, b);
}

double difference_ratio(const ScalarFunction& h, const ScalarFunction& f,
                        double a, double b) {
  const double fa = f.f(a);
  const double fb = f.f(b);
  if (near_equal(fa, fb)) {
    const double m = 0.5 * (a + b);
    const double fd = f.df(m);
    if (!(fd > 0.0)) {
      throw std::runtime_error("difference ratio: derivative of " + f.name +
                               " vanishes at the midpoint");
    }
    return h.df(m) / fd;
  }
  const double r = (h.diff ? h.diff(a, b) : h.f(a) - h.f(b)) /
                   (f.diff ? f.diff(a, b) : fa - fb);
  if (r < 0.0) {
    throw std::runtime_error("difference ratio: negative ratio; " + h.name +
                             " and " + f.name + " are not co-monotone");
  }
  return r;
}

MetricMatrix kirchhoff_form_matrix(const LaplacianMatrix& L,
                                   const ScalarFunction& f,
                                   const Eigen::VectorXd& y) {
  require_symmetric(L, "kirchhoff form");
  const int n = L.size();
  if (y.size() != n) {
    throw std::invalid_argument("kirchhoff form: state dimension mismatch");
  }
  for (int i = 0; i < n; ++i) {
    check_domain(f, y(i), i);
  }
  MetricMatrix K;
  K.entries = Eigen::MatrixXd::Zero(n, n);
  K.state = y;
  K.alpha = 1.0;
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i || L.entries(i, j) == 0.0) continue;
      const double w = -L.entries(i, j);
      const double k = divided_difference(f, y(i), y(j));
      K.entries(i, j) = -w * k;
      diag += w * k;
    }
    K.entries(i, i) = diag;
  }
  return K;
}

MetricMatrix metric_matrix(const LaplacianMatrix& L, const ConvexPotential& H,
                           const Eigen::VectorXd& x, double alpha) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("metric: alpha must be positive");
  }
  MetricMatrix G = kirchhoff_form_matrix(L, derivative_of(H), x / alpha);
  G.entries *= alpha;
  G.state = x;
  G.alpha = alpha;
  return G;
}

double gradient_identity_residual(const LaplacianMatrix& L,
                                  const ConvexPotential& H,
                                  const Eigen::VectorXd& x, double alpha) {
  const MetricMatrix G = metric_matrix(L, H, x, alpha);
  Eigen::VectorXd grad(x.size());
  for (int i = 0; i < x.size(); ++i) {
    grad(i) = H.derivative(x(i) / alpha);
  }
  const Eigen::VectorXd lx = L.entries * x;
  const double residual = (G.entries * grad - lx).cwiseAbs().maxCoeff();
  return residual / std::max(1.0, lx.cwiseAbs().maxCoeff());
}

std::pair<IncidenceMatrix, EdgeWeightMatrix> factorize(
    const LaplacianMatrix& L, const ConvexPotential& H,
    const Eigen::VectorXd& x, double alpha) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("factorize: alpha must be positive");
  }
  require_symmetric(L, "factorize");
  const Eigen::VectorXd rho = x / alpha;
  const ScalarFunction dH = derivative_of(H);
  for (int i = 0; i < rho.size(); ++i) {
    check_domain(dH, rho(i), i);
  }
  IncidenceMatrix M = incidence(graph_from_laplacian(L));
  EdgeWeightMatrix W;
  W.diagonal.resize(static_cast<int>(M.edge_order.size()));
  for (std::size_t e = 0; e < M.edge_order.size(); ++e) {
    const auto [i, j] = M.edge_order[e];
    const double w = -L.entries(i, j);
    W.diagonal(static_cast<int>(e)) =
        alpha * w * divided_difference(dH, rho(i), rho(j));
  }
  return {std::move(M), std::move(W)};
}

}  // namespace consensus
