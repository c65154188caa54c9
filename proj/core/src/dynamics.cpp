#include "consensus/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "detail/expm.hpp"

namespace consensus {

namespace {

constexpr double kEarlyStopRel = 1e-12;
constexpr double kMinSubstep = 1e-9;

void check_step(double t_end, double dt) {
  if (!(t_end > 0.0)) {
    throw std::invalid_argument("integrate: t_end must be positive");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("integrate: dt must be positive");
  }
}

// Fixed-step RK4 for dx/dt = A x (A constant). Records every
// record_stride-th step; stops early once ||Ax|| drops below the relative
// threshold.
Trajectory integrate_affine(const Eigen::MatrixXd& A, const Eigen::VectorXd& x0,
                            double t_end, double dt, int record_stride,
                            Eigen::VectorXd weights) {
  if (record_stride < 1) {
    throw std::invalid_argument("integrate: record stride must be >= 1");
  }
  // Full steps of dt plus one shortened step landing exactly on t_end.
  const auto full_steps = static_cast<long>(std::floor(t_end / dt + 1e-12));
  const double remainder = t_end - dt * static_cast<double>(full_steps);
  const bool has_remainder = remainder > 1e-9 * dt;
  const long steps = full_steps + (has_remainder ? 1 : 0);

  Trajectory traj;
  traj.weights = std::move(weights);
  traj.conserved = traj.weights.dot(x0);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);

  Eigen::VectorXd x = x0;
  for (long k = 0; k < steps; ++k) {
    const Eigen::VectorXd k1 = A * x;
    if (k1.cwiseAbs().maxCoeff() <
        kEarlyStopRel * x.cwiseAbs().maxCoeff()) {
      traj.stopped_early = true;
      break;
    }
    const bool last = (k + 1 == steps);
    const double h = (last && has_remainder) ? remainder : dt;
    const Eigen::VectorXd k2 = A * (x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = A * (x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = A * (x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((k + 1) % record_stride == 0 || last) {
      traj.times.push_back(last ? t_end : dt * static_cast<double>(k + 1));
      traj.states.push_back(x);
    }
  }
  return traj;
}

}  // namespace

FlowMap flow_map(const LaplacianMatrix& L, double t) {
  if (t < 0.0) {
    throw std::invalid_argument("flow map: t must be nonnegative");
  }
  return FlowMap{detail::expm(-t * L.entries), t};
}

double linear_step_bound(const LaplacianMatrix& L) {
  const double max_diag = L.entries.diagonal().maxCoeff();
  if (max_diag <= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 1.0 / (2.0 * max_diag);
}

Trajectory integrate_linear(const LaplacianMatrix& L,
                            const Eigen::VectorXd& x0, double t_end, double dt,
                            int record_stride) {
  check_step(t_end, dt);
  if (x0.size() != L.size()) {
    throw std::invalid_argument("integrate: state dimension mismatch");
  }
  const double bound = linear_step_bound(L);
  if (dt > bound) {
    throw std::invalid_argument(
        "integrate: dt " + std::to_string(dt) +
        " exceeds the stability bound; use dt <= " + std::to_string(bound));
  }
  return integrate_affine(-L.entries, x0, t_end, dt, record_stride,
                          perron_vector(L).q);
}

Trajectory markov_dual(const LaplacianMatrix& L, const Eigen::VectorXd& p0,
                       double t_end, double dt, int record_stride) {
  check_step(t_end, dt);
  if (p0.size() != L.size()) {
    throw std::invalid_argument("markov dual: dimension mismatch");
  }
  if (p0.minCoeff() <= 0.0) {
    throw std::invalid_argument("markov dual: p0 must be positive");
  }
  if (std::abs(p0.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("markov dual: p0 must sum to 1");
  }
  const double bound = linear_step_bound(L);
  if (dt > bound) {
    throw std::invalid_argument(
        "markov dual: dt " + std::to_string(dt) +
        " exceeds the stability bound; use dt <= " + std::to_string(bound));
  }
  return integrate_affine(-L.entries.transpose(), p0, t_end, dt, record_stride,
                          Eigen::VectorXd::Ones(L.size()));
}

Eigen::MatrixXd nonlinear_laplacian(const LaplacianMatrix& L,
                                    const NonlinearSpec& spec,
                                    const Eigen::VectorXd& x) {
  const int n = L.size();
  if (x.size() != n) {
    throw std::invalid_argument("nonlinear laplacian: dimension mismatch");
  }
  if (!(spec.alpha > 0.0)) {
    throw std::invalid_argument("nonlinear laplacian: alpha must be positive");
  }
  const Eigen::VectorXd rho = x / spec.alpha;
  for (int i = 0; i < n; ++i) {
    if (!spec.f.domain.contains(rho(i)) || !spec.h.domain.contains(rho(i))) {
      throw std::domain_error("nonlinear laplacian: density " +
                              std::to_string(rho(i)) + " at index " +
                              std::to_string(i) + " outside function domain");
    }
  }
  // Node values are cached so each step costs O(n) function evaluations
  // plus the edge loop.
  Eigen::VectorXd fv(n), hv(n);
  for (int i = 0; i < n; ++i) {
    fv(i) = spec.f.f(rho(i));
    hv(i) = spec.h.f(rho(i));
  }
  const auto ratio = [&](int i, int j) {
    const double scale = std::max({1.0, std::abs(fv(i)), std::abs(fv(j))});
    if (std::abs(fv(i) - fv(j)) <= kNearEqualRelTol * scale) {
      const double m = 0.5 * (rho(i) + rho(j));
      const double fd = spec.f.df(m);
      if (!(fd > 0.0)) {
        throw std::runtime_error("nonlinear laplacian: derivative of " +
                                 spec.f.name + " vanishes at the midpoint");
      }
      return spec.h.df(m) / fd;
    }
    const double hd = spec.h.diff ? spec.h.diff(rho(i), rho(j)) : hv(i) - hv(j);
    const double fd = spec.f.diff ? spec.f.diff(rho(i), rho(j)) : fv(i) - fv(j);
    const double r = hd / fd;
    if (r < 0.0) {
      throw std::runtime_error("nonlinear laplacian: " + spec.h.name + " and " +
                               spec.f.name + " are not co-monotone");
    }
    return r;
  };
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i || L.entries(i, j) == 0.0) continue;
      const double w = -L.entries(i, j);
      const double r = ratio(i, j);
      A(i, j) = -w * r;
      diag += w * r;
    }
    A(i, i) = diag;
  }
  return A;
}

Trajectory integrate_nonlinear(const LaplacianMatrix& L,
                               const NonlinearSpec& spec,
                               const Eigen::VectorXd& x0, double t_end,
                               double dt, int record_stride) {
  check_step(t_end, dt);
  if (record_stride < 1) {
    throw std::invalid_argument("integrate: record stride must be >= 1");
  }
  if (x0.size() != L.size()) {
    throw std::invalid_argument("integrate: state dimension mismatch");
  }
  if (x0.minCoeff() <= 0.0) {
    throw std::invalid_argument("integrate: x0 must be positive");
  }

  const auto in_domain = [&spec](const Eigen::VectorXd& y) {
    if (y.minCoeff() <= 0.0) return false;
    for (int i = 0; i < y.size(); ++i) {
      const double r = y(i) / spec.alpha;
      if (!spec.f.domain.contains(r) || !spec.h.domain.contains(r)) {
        return false;
      }
    }
    return true;
  };
  const auto velocity = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return -(nonlinear_laplacian(L, spec, y) * y);
  };

  // One RK4 step; false if any stage or the result leaves the domain.
  const auto try_step = [&](const Eigen::VectorXd& x, double h,
                            Eigen::VectorXd& out) {
    const Eigen::VectorXd k1 = velocity(x);
    Eigen::VectorXd y = x + 0.5 * h * k1;
    if (!in_domain(y)) return false;
    const Eigen::VectorXd k2 = velocity(y);
    y = x + 0.5 * h * k2;
    if (!in_domain(y)) return false;
    const Eigen::VectorXd k3 = velocity(y);
    y = x + h * k3;
    if (!in_domain(y)) return false;
    const Eigen::VectorXd k4 = velocity(y);
    out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return in_domain(out);
  };

  const auto full_steps = static_cast<long>(std::floor(t_end / dt + 1e-12));
  const double remainder = t_end - dt * static_cast<double>(full_steps);
  const bool has_remainder = remainder > 1e-9 * dt;
  const long steps = full_steps + (has_remainder ? 1 : 0);

  Trajectory traj;
  traj.weights = Eigen::VectorXd::Ones(L.size());
  traj.conserved = x0.sum();
  traj.times.push_back(0.0);
  traj.states.push_back(x0);

  Eigen::VectorXd x = x0;
  for (long k = 0; k < steps; ++k) {
    if (velocity(x).cwiseAbs().maxCoeff() <
        kEarlyStopRel * x.cwiseAbs().maxCoeff()) {
      traj.stopped_early = true;
      break;
    }
    const bool last = (k + 1 == steps);
    double remaining = (last && has_remainder) ? remainder : dt;
    double h = remaining;
    Eigen::VectorXd next;
    while (remaining > 0.0) {
      if (try_step(x, h, next)) {
        x = next;
        remaining -= h;
        h = std::min(h, remaining);
      } else {
        h *= 0.5;
        if (h < kMinSubstep) {
          throw std::runtime_error(
              "integrate: state left the positive orthant; substep fell "
              "below 1e-9 at t = " +
              std::to_string(dt * static_cast<double>(k)));
        }
      }
    }
    if ((k + 1) % record_stride == 0 || last) {
      traj.times.push_back(last ? t_end : dt * static_cast<double>(k + 1));
      traj.states.push_back(x);
    }
  }
  return traj;
}

double consensus_value(const PerronVector& q, const Eigen::VectorXd& x0) {
  if (q.q.size() != x0.size()) {
    throw std::invalid_argument("consensus value: dimension mismatch");
  }
  return q.q.dot(x0);
}

Eigen::VectorXd density(const Eigen::VectorXd& x, double a) {
  if (!(a > 0.0)) {
    throw std::invalid_argument("density: consensus value must be positive");
  }
  return x / a;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
  out << "t";
  for (int i = 0; i < n; ++i) {
    out << ",x" << i;
  }
  out << "\n";
  char buf[64];
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", traj.times[k]);
    out << buf;
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", traj.states[k](i));
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace consensus
