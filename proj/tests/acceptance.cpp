// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Usage: acceptance [path-to-cli] (defaults to the build-tree CLI).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <random>
#include <string>
#include <vector>

#include "consensus/dynamics.hpp"
#include "consensus/metric.hpp"
#include "consensus/potential.hpp"
#include "consensus/scenario.hpp"
#include "consensus/verify.hpp"

using namespace consensus;

namespace {

struct Tally {
  int failed = 0;
  void line(int num, const std::string& label, bool pass,
            const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", num,
                label.c_str(), detail.c_str());
    if (!pass) ++failed;
  }
};

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), format, a, b);
  return buf;
}

// The shared 50-instance set: symmetric strongly connected graphs cycling
// through n = 4, 8, 16.
std::vector<LaplacianMatrix> instance_set() {
  const int sizes[3] = {4, 8, 16};
  std::vector<LaplacianMatrix> out;
  for (int i = 0; i < 50; ++i) {
    out.push_back(build_laplacian(
        random_connected_graph(sizes[i % 3], 9000 + i, true)));
  }
  return out;
}

LaplacianMatrix scaled(const LaplacianMatrix& L, double factor) {
  LaplacianMatrix out = L;
  out.entries *= factor;
  return out;
}

// criterion 1: gradient-flow identity with the metric from every builtin
// potential; quadratic reduces to alpha L entrywise.
void criterion_gradient_identity(Tally& tally,
                                 const std::vector<LaplacianMatrix>& set) {
  double worst = 0.0;
  double worst_quadratic = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const LaplacianMatrix& L = set[i];
    for (int s = 0; s < 5; ++s) {
      const Eigen::VectorXd x =
          random_positive_state(L.size(), 31 * i + s + 1);
      const double alpha = x.mean();
      for (const ConvexPotential& H :
           {builtin_quadratic(0.3), builtin_entropy(), builtin_gibbs()}) {
        worst = std::max(worst, gradient_identity_residual(L, H, x, alpha));
      }
      const MetricMatrix G =
          metric_matrix(L, builtin_quadratic(0.3), x, alpha);
      worst_quadratic =
          std::max(worst_quadratic,
                   (G.entries - alpha * L.entries).cwiseAbs().maxCoeff());
    }
  }
  tally.line(1, "gradient-flow identity over 50 graphs x 5 states x 3 potentials",
             worst <= 1e-10 && worst_quadratic <= 1e-13,
             fmt("max residual %.3e, max quadratic metric gap %.3e", worst,
                 worst_quadratic));
}

// criterion 2: stochasticity of the flow map and the semigroup law.
void criterion_stochastic_flow(Tally& tally,
                               const std::vector<LaplacianMatrix>& set) {
  double worst_row = 0.0, worst_neg = 0.0, worst_semi = 0.0;
  for (const LaplacianMatrix& L : set) {
    for (double t : {0.01, 0.1, 1.0, 10.0}) {
      const FlowMap P = flow_map(L, t);
      worst_row = std::max(
          worst_row, (P.matrix.rowwise().sum().array() - 1.0).abs().maxCoeff());
      worst_neg = std::max(worst_neg, -P.matrix.minCoeff());
    }
    for (auto [s, t] : {std::pair{0.3, 0.7}, std::pair{0.05, 0.05}}) {
      const Eigen::MatrixXd lhs = flow_map(L, s).matrix * flow_map(L, t).matrix;
      worst_semi = std::max(
          worst_semi,
          (lhs - flow_map(L, s + t).matrix).cwiseAbs().maxCoeff());
    }
  }
  tally.line(2, "flow maps stochastic, semigroup law",
             worst_row <= 1e-12 && worst_neg <= 1e-12 && worst_semi <= 1e-10,
             fmt("max row-sum dev %.3e, max semigroup residual %.3e",
                 std::max(worst_row, worst_neg), worst_semi));
}

// criterion 3: conserved weighted average along linear runs (t_end 10,
// dt 1e-3) and conserved total mass along symmetric log-diffusion runs.
void criterion_conservation(Tally& tally,
                            const std::vector<LaplacianMatrix>& set) {
  double worst_linear = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const LaplacianMatrix& L = set[i];
    const Eigen::VectorXd x0 = random_positive_state(L.size(), 500 + i);
    const PerronVector q = perron_vector(L);
    const Trajectory traj = integrate_linear(L, x0, 10.0, 1e-3);
    for (const Eigen::VectorXd& x : traj.states) {
      worst_linear =
          std::max(worst_linear, std::abs(q.q.dot(x) - traj.conserved));
    }
  }
  for (int i = 0; i < 10; ++i) {
    const LaplacianMatrix L =
        build_laplacian(random_connected_graph(8, 700 + i, false));
    const Eigen::VectorXd x0 = random_positive_state(8, 800 + i);
    const PerronVector q = perron_vector(L);
    const Trajectory traj = integrate_linear(L, x0, 10.0, 1e-3);
    for (const Eigen::VectorXd& x : traj.states) {
      worst_linear =
          std::max(worst_linear, std::abs(q.q.dot(x) - traj.conserved));
    }
  }

  double worst_mass = 0.0;
  for (int i = 0; i < 10; ++i) {
    const LaplacianMatrix& L = set[static_cast<std::size_t>(i) * 5];
    const Eigen::VectorXd x0 = random_positive_state(L.size(), 900 + i);
    const NonlinearSpec spec{identity_function(), log_function(), x0.mean()};
    const Trajectory traj = integrate_nonlinear(L, spec, x0, 10.0, 1e-3);
    for (const Eigen::VectorXd& x : traj.states) {
      worst_mass = std::max(worst_mass, std::abs(x.sum() - traj.conserved));
    }
  }
  tally.line(3, "conservation along linear and log-diffusion trajectories",
             worst_linear <= 1e-8 && worst_mass <= 1e-8,
             fmt("max |q.x - q.x0| %.3e, max |sum x - sum x0| %.3e",
                 worst_linear, worst_mass));
}

// criterion 4: 2-node closed form. x(t) = (1 + e^{-2t}, 1 - e^{-2t}), which
// passes through (1.5, 0.5) when the deviation has halved (t = ln(2)/2, the
// same instant the flow map equals [[.75,.25],[.25,.75]]).
void criterion_closed_form(Tally& tally) {
  const LaplacianMatrix L =
      build_laplacian(WeightedDigraph(2, {{0, 1, 1.0}, {1, 0, 1.0}}));
  Eigen::VectorXd x0(2);
  x0 << 2.0, 0.0;

  const Trajectory half = integrate_linear(L, x0, 0.5 * std::log(2.0), 1e-5);
  const double dev_half =
      std::max(std::abs(half.terminal_state()(0) - 1.5),
               std::abs(half.terminal_state()(1) - 0.5));

  const Trajectory full = integrate_linear(L, x0, std::log(2.0), 1e-5);
  const double dev_full =
      std::max(std::abs(full.terminal_state()(0) - 1.25),
               std::abs(full.terminal_state()(1) - 0.75));

  const FlowMap P = flow_map(L, 0.5 * std::log(2.0));
  Eigen::MatrixXd expected(2, 2);
  expected << 0.75, 0.25, 0.25, 0.75;
  const double dev_map = (P.matrix - expected).cwiseAbs().maxCoeff();

  tally.line(4, "2-node closed form: states (1.5,0.5)/(1.25,0.75), flow map",
             dev_half <= 1e-9 && dev_full <= 1e-9 && dev_map <= 1e-12,
             fmt("max state dev %.3e, flow-map dev %.3e",
                 std::max(dev_half, dev_full), dev_map));
}

// criterion 5: strict decrease of every strictly convex builtin until the
// state is within 1e-6 of consensus, and the concave probe increases.
void criterion_lyapunov_both_directions(Tally& tally) {
  bool all_decreasing = true;
  bool all_probe = true;
  bool all_reached = true;
  const int sizes[3] = {4, 8, 16};
  for (int i = 0; i < 15; ++i) {
    const LaplacianMatrix L =
        build_laplacian(random_connected_graph(sizes[i % 3], 1300 + i, true));
    const int n = L.size();
    const Eigen::VectorXd x0 = random_positive_state(n, 1400 + i);
    const PerronVector q = perron_vector(L);
    const double a = consensus_value(q, x0);
    const double gap = spectral_gap(L);
    const double dt = 0.45 * linear_step_bound(L);
    const double t_end = 16.0 / gap;
    const int stride = std::max(1, static_cast<int>(0.35 / dt));
    const Trajectory traj = integrate_linear(L, x0, t_end, dt, stride);
    all_reached = all_reached &&
                  (traj.terminal_state().array() - a).abs().maxCoeff() < 1e-6;

    for (const ConvexPotential& H :
         {builtin_quadratic(0.0), builtin_entropy(), builtin_gibbs()}) {
      const AdditiveLyapunov V{1.0, 1.0 / a, q, H};
      const CheckReport r = check_monotone_decrease(V, traj);
      all_decreasing = all_decreasing && r.passed && r.residual < 0.0;
    }
    all_probe = all_probe && check_concave_increase(L, x0).passed;
  }
  tally.line(5, "convex functionals strictly decrease; concave probe increases",
             all_decreasing && all_probe && all_reached,
             std::string("decrease=") + (all_decreasing ? "yes" : "no") +
                 " probe=" + (all_probe ? "yes" : "no") +
                 " reached 1e-6: " + (all_reached ? "yes" : "no"));
}

// criterion 6: centered-difference dV/dt vs -Psi_V for the sum-of-squares
// and free-energy functionals.
void criterion_dissipation(Tally& tally) {
  bool all_pass = true;
  double worst_margin = 0.0;
  const int sizes[3] = {4, 8, 16};
  for (int i = 0; i < 9; ++i) {
    const LaplacianMatrix L0 =
        build_laplacian(random_connected_graph(sizes[i % 3], 2100 + i, true));
    // time-normalized so the finite-difference constant stays tame
    const LaplacianMatrix L =
        scaled(L0, 1.0 / (2.0 * L0.entries.diagonal().maxCoeff()));
    const int n = L.size();
    const Eigen::VectorXd x0 = random_positive_state(n, 2200 + i);
    const PerronVector q = perron_vector(L);
    const double a = consensus_value(q, x0);
    const Trajectory traj = integrate_linear(L, x0, 0.06, 3e-6);

    const AdditiveLyapunov sos{static_cast<double>(n), 1.0, q,
                               builtin_quadratic(a)};
    const AdditiveLyapunov gibbs =
        AdditiveLyapunov::normalized(builtin_gibbs(), n, a);
    for (const AdditiveLyapunov& V : {sos, gibbs}) {
      const CheckReport r = check_dissipation(L, V, traj);
      all_pass = all_pass && r.passed;
      worst_margin = std::max(worst_margin, r.residual / r.tolerance);
    }
  }
  tally.line(6, "dissipation identity dV/dt = -Psi_V (centered differences)",
             all_pass, fmt("worst residual/tolerance %.3f", worst_margin));
}

// criterion 7: entropy- and free-energy-induced metrics agree; the log mean
// sits strictly between the geometric and arithmetic means.
void criterion_metric_equality(Tally& tally) {
  double worst_gap = 0.0;
  std::mt19937_64 rng(2026);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 4 + static_cast<int>(rng() % 13);
    const LaplacianMatrix L =
        build_laplacian(random_connected_graph(n, rng(), true));
    const Eigen::VectorXd x = random_positive_state(n, rng(), 0.3, 3.0);
    const double alpha =
        0.5 + 1.5 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const MetricMatrix Ge = metric_matrix(L, builtin_entropy(), x, alpha);
    const MetricMatrix Gg = metric_matrix(L, builtin_gibbs(), x, alpha);
    worst_gap =
        std::max(worst_gap, (Ge.entries - Gg.entries).cwiseAbs().maxCoeff());
  }

  bool means_strict = true;
  int tested_pairs = 0;
  while (tested_pairs < 1000) {
    const double a = 0.01 + 9.99 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double b = 0.01 + 9.99 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (a == b) continue;
    ++tested_pairs;
    const double lm = log_mean(a, b);
    means_strict =
        means_strict && std::sqrt(a * b) < lm && lm < 0.5 * (a + b);
  }
  tally.line(7, "entropy/free-energy metrics agree; log-mean inequalities",
             worst_gap <= 1e-12 && means_strict,
             fmt("max metric gap %.3e", worst_gap) +
                 ", strict mean inequality on 1000 pairs: " +
                 (means_strict ? "yes" : "no"));
}

// criterion 8: log-diffusion reaches consensus by t = 50/lambda_2 with the
// free energy non-increasing at every sample.
void criterion_nonlinear_flow(Tally& tally) {
  bool all_reach = true;
  bool all_monotone = true;
  const int sizes[3] = {4, 8, 16};
  for (int i = 0; i < 10; ++i) {
    const LaplacianMatrix L =
        build_laplacian(random_connected_graph(sizes[i % 3], 3100 + i, true));
    const int n = L.size();
    const Eigen::VectorXd x0 = random_positive_state(n, 3200 + i);
    const double a = x0.mean();
    const double gap = spectral_gap(L);
    const NonlinearSpec spec{identity_function(), log_function(), a};
    const double dt =
        std::min(1e-2, 0.1 / L.entries.diagonal().maxCoeff());
    const double t_end = 50.0 / gap;
    const int stride = std::max(1, static_cast<int>(0.2 / gap / dt));
    const Trajectory traj = integrate_nonlinear(L, spec, x0, t_end, dt, stride);

    all_reach = all_reach &&
                (traj.terminal_state().array() - a).abs().maxCoeff() <= 1e-6;

    const AdditiveLyapunov V =
        AdditiveLyapunov::normalized(builtin_gibbs(), n, a);
    double prev = lyapunov_value(V, traj.states.front());
    const double slack = 1e-12 * std::max(1.0, std::abs(prev));
    for (int k = 1; k < traj.sample_count(); ++k) {
      const double cur = lyapunov_value(V, traj.states[k]);
      all_monotone = all_monotone && cur <= prev + slack;
      prev = cur;
    }
  }
  tally.line(8, "log-diffusion reaches consensus; free energy non-increasing",
             all_reach && all_monotone,
             std::string("reached=") + (all_reach ? "yes" : "no") +
                 " monotone=" + (all_monotone ? "yes" : "no"));
}

// criterion 9: the dual distribution flow converges to the Perron vector and
// is stationary when started there.
void criterion_markov_dual(Tally& tally) {
  double worst_dist = 0.0;
  double worst_fixed = 0.0;
  for (int i = 0; i < 10; ++i) {
    const bool symmetric = i >= 8;
    const LaplacianMatrix L =
        build_laplacian(random_connected_graph(4 + 4 * (i % 3), 4100 + i,
                                               symmetric));
    const PerronVector q = perron_vector(L);
    const double gap = spectral_gap(L);
    const double dt = 0.5 * linear_step_bound(L);
    const double t_end = 30.0 / gap;
    Eigen::VectorXd p0 = random_positive_state(L.size(), 4200 + i, 0.2, 1.0);
    p0 /= p0.sum();
    const Trajectory traj =
        markov_dual(L, p0, t_end, dt, std::max(1, int(t_end / dt / 50)));
    worst_dist =
        std::max(worst_dist, (traj.terminal_state() - q.q).lpNorm<1>());

    const Trajectory fixed = markov_dual(L, q.q, t_end, dt, 1000000);
    for (const Eigen::VectorXd& p : fixed.states) {
      worst_fixed = std::max(worst_fixed, (p - q.q).cwiseAbs().maxCoeff());
    }
  }
  tally.line(9, "dual flow converges to the Perron vector; stationarity",
             worst_dist <= 1e-6 && worst_fixed <= 1e-10,
             fmt("max ||p(T) - q||_1 %.3e, max stationary drift %.3e",
                 worst_dist, worst_fixed));
}

// criterion 10: analytic gradients against central finite differences.
void criterion_gradient_fd(Tally& tally) {
  std::mt19937_64 rng(5150);
  double worst = 0.0;
  for (const ConvexPotential& H :
       {builtin_quadratic(0.7), builtin_entropy(), builtin_gibbs()}) {
    for (int rep = 0; rep < 100; ++rep) {
      const int n = 2 + static_cast<int>(rng() % 15);
      Eigen::VectorXd x = random_positive_state(n, rng());
      Eigen::VectorXd qraw = random_positive_state(n, rng(), 0.2, 1.0);
      const PerronVector q{qraw / qraw.lpNorm<1>()};
      const double beta = 0.5 + 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const double c = 0.5 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const AdditiveLyapunov V{beta, c, q, H};
      const Eigen::VectorXd g = lyapunov_gradient(V, x);
      for (int i = 0; i < n; ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(x(i)));
        Eigen::VectorXd hi = x, lo = x;
        hi(i) += h;
        lo(i) -= h;
        const double fd =
            (lyapunov_value(V, hi) - lyapunov_value(V, lo)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - g(i)) /
                                    std::max(1.0, g.cwiseAbs().maxCoeff()));
      }
    }
  }
  tally.line(10, "analytic gradients match central finite differences", worst <= 1e-6,
             fmt("max relative error %.3e", worst));
}

// criterion 11: the CLI verification suite exits zero, and a corrupted
// metric entry is detected by the identity check.
void criterion_end_to_end(Tally& tally, const std::string& cli) {
  const std::string cmd =
      cli + " verify --seed 42 --count 10 --sizes 4,8,16 >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  const bool cli_ok = WEXITSTATUS(status) == 0;

  bool detected = true;
  for (int i = 0; i < 10; ++i) {
    const LaplacianMatrix L =
        build_laplacian(random_connected_graph(8, 6100 + i, true));
    const Eigen::VectorXd x = random_positive_state(8, 6200 + i);
    detected = detected &&
               check_gradient_identity_corrupted(L, builtin_gibbs(), x,
                                                 x.mean(), 6100 + i)
                   .passed;
  }
  tally.line(11, "CLI verify --seed 42 --count 10 --sizes 4,8,16; negative control",
             cli_ok && detected,
             std::string("cli exit ok=") + (cli_ok ? "yes" : "no") +
                 " corruption detected=" + (detected ? "yes" : "no"));
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : CONSENSUS_CLI_PATH;
  Tally tally;

  const std::vector<LaplacianMatrix> set = instance_set();
  criterion_gradient_identity(tally, set);
  criterion_stochastic_flow(tally, set);
  criterion_conservation(tally, set);
  criterion_closed_form(tally);
  criterion_lyapunov_both_directions(tally);
  criterion_dissipation(tally);
  criterion_metric_equality(tally);
  criterion_nonlinear_flow(tally);
  criterion_markov_dual(tally);
  criterion_gradient_fd(tally);
  criterion_end_to_end(tally, cli);

  std::printf("%s: %d of 11 criteria failed\n",
              tally.failed == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
              tally.failed);
  return tally.failed;
}
