#include "consensus/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace consensus {

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Uniform double in [0,1) from the raw generator word; identical across
// standard libraries, unlike std::uniform_real_distribution.
double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * u01(rng);
}

CheckReport make_report(std::string name, double residual, double tolerance,
                        std::uint64_t seed, std::string context) {
  CheckReport r;
  r.name = std::move(name);
  r.residual = residual;
  r.tolerance = tolerance;
  r.passed = residual <= tolerance;
  r.seed = seed;
  r.context = std::move(context);
  return r;
}

std::string size_context(const LaplacianMatrix& L, const std::string& extra) {
  std::string s = "n=" + std::to_string(L.size());
  s += L.symmetric ? " symmetric" : " directed";
  if (!extra.empty()) {
    s += " " + extra;
  }
  return s;
}

// Consensus point of a trajectory: weights . x = conserved at x = c 1.
double consensus_point(const Trajectory& traj) {
  return traj.conserved / traj.weights.sum();
}

double distance_to_consensus(const Eigen::VectorXd& x, double c) {
  return (x.array() - c).abs().maxCoeff();
}

}  // namespace

double tolerance_scale(ToleranceMode mode) {
  switch (mode) {
    case ToleranceMode::strict:
      return 0.1;
    case ToleranceMode::lenient:
      return 10.0;
    default:
      return 1.0;
  }
}

std::string format_report(const CheckReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-44s %s residual=%.6e tol=%.6e seed=%llu ",
                r.name.c_str(), r.passed ? "pass" : "FAIL", r.residual,
                r.tolerance, static_cast<unsigned long long>(r.seed));
  return std::string(buf) + r.context;
}

CheckReport check_gradient_identity(const LaplacianMatrix& L,
                                    const ConvexPotential& H,
                                    const Eigen::VectorXd& x, double alpha,
                                    std::uint64_t seed, ToleranceMode mode) {
  const double residual = gradient_identity_residual(L, H, x, alpha);
  return make_report("gradient_identity[" + H.name + "]", residual,
                     1e-10 * tolerance_scale(mode), seed,
                     size_context(L, "alpha=" + std::to_string(alpha)));
}

CheckReport check_gradient_identity_corrupted(const LaplacianMatrix& L,
                                              const ConvexPotential& H,
                                              const Eigen::VectorXd& x,
                                              double alpha, std::uint64_t seed,
                                              ToleranceMode mode) {
  const MetricMatrix G = metric_matrix(L, H, x, alpha);
  Eigen::VectorXd grad(x.size());
  for (int i = 0; i < x.size(); ++i) {
    grad(i) = H.derivative(x(i) / alpha);
  }
  int j = 0;
  grad.cwiseAbs().maxCoeff(&j);
  Eigen::MatrixXd corrupted = G.entries;
  corrupted(0, j) += 1e-3;

  const Eigen::VectorXd lx = L.entries * x;
  const double corrupted_residual =
      (corrupted * grad - lx).cwiseAbs().maxCoeff() /
      std::max(1.0, lx.cwiseAbs().maxCoeff());
  const double inner_tol = 1e-10 * tolerance_scale(mode);
  // Passes iff the corrupted identity residual exceeds the inner tolerance.
  return make_report("gradient_identity_negative_control[" + H.name + "]",
                     inner_tol - corrupted_residual, 0.0, seed,
                     size_context(L, "corrupted entry (0," + std::to_string(j) +
                                         ") by 1e-3"));
}

CheckReport check_dissipation(const LaplacianMatrix& L,
                              const AdditiveLyapunov& V, const Trajectory& traj,
                              std::uint64_t seed, ToleranceMode mode) {
  if (!L.symmetric) {
    throw std::invalid_argument(
        "dissipation check: requires a symmetric Laplacian");
  }
  if (traj.sample_count() < 3) {
    throw std::invalid_argument(
        "dissipation check: trajectory needs at least 3 samples");
  }
  std::vector<double> values(traj.states.size());
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    values[k] = lyapunov_value(V, traj.states[k]);
  }
  double residual = 0.0;
  double max_spacing = 0.0;
  for (std::size_t k = 1; k + 1 < traj.states.size(); ++k) {
    const double dt_left = traj.times[k] - traj.times[k - 1];
    const double dt_right = traj.times[k + 1] - traj.times[k];
    if (std::abs(dt_left - dt_right) > 1e-12 * std::max(dt_left, dt_right)) {
      continue;  // final remainder step; the centered stencil needs uniform spacing
    }
    const double dvdt = (values[k + 1] - values[k - 1]) / (dt_left + dt_right);
    const double psi = group_disagreement(L, V, traj.states[k]);
    residual = std::max(residual, std::abs(dvdt + psi));
    max_spacing = std::max(max_spacing, dt_right);
  }
  const double tol =
      std::max(10.0 * max_spacing * max_spacing, 1e-9) * tolerance_scale(mode);
  return make_report(
      "dissipation[" + V.potential.name + "]", residual, tol, seed,
      size_context(L, "dt=" + std::to_string(max_spacing) +
                          " samples=" + std::to_string(traj.sample_count())));
}

CheckReport check_concave_increase(const LaplacianMatrix& L,
                                   const Eigen::VectorXd& x0,
                                   std::uint64_t seed, ToleranceMode mode) {
  const PerronVector q = perron_vector(L);
  const double a = consensus_value(q, x0);
  if (distance_to_consensus(x0, a) < 1e-12) {
    return make_report("concave_probe", 1.0, 0.0, seed,
                       size_context(L, "degenerate: initial state already at "
                                       "consensus, no variation"));
  }
  const double gap = spectral_gap(L);
  const double t_end = std::min(5.0 / gap, 500.0);
  const double dt = 0.5 * linear_step_bound(L);
  const int stride =
      std::max(1, static_cast<int>(t_end / dt / 400.0));
  const Trajectory traj = integrate_linear(L, x0, t_end, dt, stride);

  ConvexPotential concave;
  concave.value = [](double u) { return -u * u; };
  concave.derivative = [](double u) { return -2.0 * u; };
  concave.second_derivative = [](double) { return -2.0; };
  concave.domain = Interval{};
  concave.name = "concave(-u^2)";
  const AdditiveLyapunov probe{1.0, 1.0, q, concave};

  double max_increase = -std::numeric_limits<double>::infinity();
  double prev = lyapunov_value(probe, traj.states[0]);
  for (int k = 1; k < traj.sample_count(); ++k) {
    const double cur = lyapunov_value(probe, traj.states[k]);
    max_increase = std::max(max_increase, cur - prev);
    prev = cur;
  }
  (void)mode;  // strictness is a sign test; the scale switch does not apply
  return make_report("concave_probe", -max_increase, 0.0, seed,
                     size_context(L, "largest sampled increase " +
                                         std::to_string(max_increase)));
}

CheckReport check_stochastic_flow(const LaplacianMatrix& L,
                                  const std::vector<double>& t_grid,
                                  std::uint64_t seed, ToleranceMode mode) {
  double residual = 0.0;
  for (double t : t_grid) {
    const FlowMap P = flow_map(L, t);
    const double row_dev =
        (P.matrix.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const double negativity = std::max(0.0, -P.matrix.minCoeff());
    residual = std::max({residual, row_dev, negativity});
  }
  return make_report("stochastic_flow", residual, 1e-12 * tolerance_scale(mode),
                     seed,
                     size_context(L, "horizons=" + std::to_string(t_grid.size())));
}

CheckReport check_semigroup(const LaplacianMatrix& L, double s, double t,
                            std::uint64_t seed, ToleranceMode mode) {
  const Eigen::MatrixXd lhs = flow_map(L, s).matrix * flow_map(L, t).matrix;
  const Eigen::MatrixXd rhs = flow_map(L, s + t).matrix;
  const double residual = (lhs - rhs).cwiseAbs().maxCoeff();
  return make_report("semigroup", residual, 1e-10 * tolerance_scale(mode), seed,
                     size_context(L, "s=" + std::to_string(s) +
                                         " t=" + std::to_string(t)));
}

CheckReport check_conservation(const Trajectory& traj, const PerronVector& q,
                               std::uint64_t seed, ToleranceMode mode) {
  if (traj.sample_count() < 2) {
    throw std::invalid_argument(
        "conservation check: trajectory needs at least 2 samples");
  }
  const double initial = q.q.dot(traj.states.front());
  double residual = 0.0;
  for (const Eigen::VectorXd& x : traj.states) {
    residual = std::max(residual, std::abs(q.q.dot(x) - initial));
  }
  residual /= std::max(1.0, std::abs(initial));
  return make_report("conservation", residual, 1e-8 * tolerance_scale(mode),
                     seed,
                     "n=" + std::to_string(traj.states.front().size()) +
                         " samples=" + std::to_string(traj.sample_count()));
}

CheckReport check_monotone_decrease(const AdditiveLyapunov& V,
                                    const Trajectory& traj, std::uint64_t seed,
                                    ToleranceMode mode) {
  if (traj.sample_count() < 2) {
    throw std::invalid_argument(
        "monotone check: trajectory needs at least 2 samples");
  }
  const double c = consensus_point(traj);
  double residual = -std::numeric_limits<double>::infinity();
  int compared = 0;
  double prev = lyapunov_value(V, traj.states[0]);
  for (int k = 1; k < traj.sample_count(); ++k) {
    const double cur = lyapunov_value(V, traj.states[k]);
    if (distance_to_consensus(traj.states[k - 1], c) > 1e-6) {
      residual = std::max(residual, cur - prev);
      ++compared;
    }
    prev = cur;
  }
  (void)mode;  // margin 0 by definition
  std::string context = "potential=" + V.potential.name +
                        " compared=" + std::to_string(compared);
  if (compared == 0) {
    return make_report("lyapunov_decrease[" + V.potential.name + "]", 0.0, 0.0,
                       seed, context + " degenerate: at consensus throughout");
  }
  return make_report("lyapunov_decrease[" + V.potential.name + "]", residual,
                     0.0, seed, context);
}

WeightedDigraph random_connected_graph(int n, std::uint64_t seed,
                                       bool symmetric) {
  if (n < 2) {
    throw std::invalid_argument("random graph: need at least 2 nodes");
  }
  const double p = std::min(1.0, 2.0 * std::log(n) / n);
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<Edge> edges;
    if (symmetric) {
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (u01(rng) < p) {
            const double w = uniform_in(rng, 0.5, 2.0);
            edges.push_back({i, j, w});
            edges.push_back({j, i, w});
          }
        }
      }
    } else {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i != j && u01(rng) < p) {
            edges.push_back({i, j, uniform_in(rng, 0.5, 2.0)});
          }
        }
      }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return std::tie(a.source, a.target) < std::tie(b.source, b.target);
    });
    WeightedDigraph g(n, std::move(edges));
    if (is_strongly_connected(g)) {
      return g;
    }
  }
  throw std::runtime_error("random graph: failed to draw a strongly "
                           "connected instance");
}

Eigen::VectorXd random_positive_state(int n, std::uint64_t seed, double lo,
                                      double hi) {
  if (!(0.0 < lo && lo < hi)) {
    throw std::invalid_argument("random state: need 0 < lo < hi");
  }
  std::mt19937_64 rng(mix_seed(seed, 0x517cc1b727220a95ULL));
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) {
    x(i) = uniform_in(rng, lo, hi);
  }
  return x;
}

double spectral_gap(const LaplacianMatrix& L) {
  const int n = L.size();
  double best = std::numeric_limits<double>::infinity();
  if (L.symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L.entries);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double threshold = 1e-9 * std::max(std::abs(ev(n - 1)), 1e-300);
    for (int i = 0; i < n; ++i) {
      if (ev(i) > threshold) {
        best = std::min(best, ev(i));
      }
    }
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> es(L.entries);
    double max_re = 0.0;
    for (int i = 0; i < n; ++i) {
      max_re = std::max(max_re, es.eigenvalues()(i).real());
    }
    const double threshold = 1e-9 * std::max(max_re, 1e-300);
    for (int i = 0; i < n; ++i) {
      const double re = es.eigenvalues()(i).real();
      if (re > threshold) {
        best = std::min(best, re);
      }
    }
  }
  if (!std::isfinite(best)) {
    throw std::runtime_error("spectral gap: no nonzero eigenvalue");
  }
  return best;
}

std::vector<CheckReport> run_verification_suite(std::uint64_t seed, int count,
                                                const std::vector<int>& sizes,
                                                ToleranceMode mode) {
  if (count < 1) {
    throw std::invalid_argument("verification suite: count must be >= 1");
  }
  if (sizes.empty()) {
    throw std::invalid_argument("verification suite: sizes must be nonempty");
  }
  const std::vector<double> t_grid{0.01, 0.1, 1.0, 10.0};
  std::vector<CheckReport> reports;

  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const int n = sizes[si];
    for (int k = 0; k < count; ++k) {
      const std::uint64_t inst = mix_seed(seed, si * 100003 + k);

      const WeightedDigraph gs = random_connected_graph(n, inst, true);
      const LaplacianMatrix Ls = build_laplacian(gs);
      const Eigen::VectorXd x = random_positive_state(n, inst);
      const double alpha = x.mean();

      for (const ConvexPotential& H :
           {builtin_quadratic(0.0), builtin_entropy(), builtin_gibbs()}) {
        reports.push_back(check_gradient_identity(Ls, H, x, alpha, inst, mode));
      }
      reports.push_back(
          check_gradient_identity_corrupted(Ls, builtin_gibbs(), x, alpha,
                                            inst, mode));
      reports.push_back(check_stochastic_flow(Ls, t_grid, inst, mode));
      reports.push_back(check_semigroup(Ls, 0.3, 0.7, inst, mode));
      reports.push_back(check_concave_increase(Ls, x, inst, mode));

      // Lyapunov monotonicity and conservation along one linear run.
      {
        const PerronVector q = perron_vector(Ls);
        const double a = consensus_value(q, x);
        const double gap = spectral_gap(Ls);
        const double t_end = std::min(16.0 / gap, 400.0);
        const double dt = 0.5 * linear_step_bound(Ls);
        const int stride = std::max(1, static_cast<int>(0.5 / dt));
        const Trajectory traj = integrate_linear(Ls, x, t_end, dt, stride);
        reports.push_back(check_conservation(traj, q, inst, mode));
        for (const ConvexPotential& H :
             {builtin_quadratic(0.0), builtin_entropy(), builtin_gibbs()}) {
          const AdditiveLyapunov V{1.0, 1.0 / a, q, H};
          reports.push_back(check_monotone_decrease(V, traj, inst, mode));
        }
      }

      // Dissipation-rate identity on the time-normalized system so the
      // centered-difference truncation stays under the tolerance floor.
      {
        LaplacianMatrix Lhat = Ls;
        Lhat.entries /= 2.0 * Ls.entries.diagonal().maxCoeff();
        const PerronVector q = perron_vector(Lhat);
        const double a = consensus_value(q, x);
        const Trajectory traj = integrate_linear(Lhat, x, 0.06, 3e-6);
        const AdditiveLyapunov sos{static_cast<double>(n), 1.0, q,
                                   builtin_quadratic(a)};
        const AdditiveLyapunov gibbs =
            AdditiveLyapunov::normalized(builtin_gibbs(), n, a);
        reports.push_back(check_dissipation(Lhat, sos, traj, inst, mode));
        reports.push_back(check_dissipation(Lhat, gibbs, traj, inst, mode));
      }

      // Conservation of the weighted average on a directed instance.
      {
        const WeightedDigraph gd =
            random_connected_graph(n, mix_seed(inst, 7), false);
        const LaplacianMatrix Ld = build_laplacian(gd);
        const PerronVector qd = perron_vector(Ld);
        const double dt = 0.5 * linear_step_bound(Ld);
        const Trajectory traj =
            integrate_linear(Ld, x, 5.0, dt, std::max(1, int(0.2 / dt)));
        reports.push_back(check_conservation(traj, qd, inst, mode));
        reports.push_back(check_stochastic_flow(Ld, t_grid, inst, mode));
      }
    }
  }
  return reports;
}

}  // namespace consensus
