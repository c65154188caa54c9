#include "consensus/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace consensus {

namespace {

using json = nlohmann::ordered_json;

void reject_unknown_keys(const json& obj, const std::string& where,
                         const std::vector<std::string>& allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw std::invalid_argument("config: unknown key \"" + key + "\" in " +
                                  where);
    }
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

WeightedDigraph make_generated_graph(const ScenarioConfig& cfg) {
  if (cfg.generator == "erdos") {
    return random_connected_graph(cfg.nodes, cfg.graph_seed, cfg.symmetric);
  }
  std::vector<Edge> edges;
  const auto undirected = [&edges](int i, int j) {
    edges.push_back({i, j, 1.0});
    edges.push_back({j, i, 1.0});
  };
  if (cfg.generator == "path") {
    for (int i = 0; i + 1 < cfg.nodes; ++i) undirected(i, i + 1);
  } else if (cfg.generator == "cycle") {
    for (int i = 0; i + 1 < cfg.nodes; ++i) undirected(i, i + 1);
    if (cfg.nodes > 2) undirected(cfg.nodes - 1, 0);
  } else if (cfg.generator == "complete") {
    for (int i = 0; i < cfg.nodes; ++i) {
      for (int j = i + 1; j < cfg.nodes; ++j) undirected(i, j);
    }
  } else {
    throw std::invalid_argument("config: unknown generator \"" +
                                cfg.generator + "\"");
  }
  return WeightedDigraph(cfg.nodes, std::move(edges));
}

Eigen::VectorXd make_initial_state(const ScenarioConfig& cfg, int n) {
  if (!cfg.x0.empty()) {
    if (static_cast<int>(cfg.x0.size()) != n) {
      throw std::invalid_argument(
          "config: initial state has " + std::to_string(cfg.x0.size()) +
          " entries for a graph on " + std::to_string(n) + " nodes");
    }
    return Eigen::Map<const Eigen::VectorXd>(cfg.x0.data(), n);
  }
  if (cfg.pattern == "spike") {
    if (cfg.spike_node < 0 || cfg.spike_node >= n) {
      throw std::invalid_argument("config: spike node out of range");
    }
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, cfg.spike_low);
    x(cfg.spike_node) = cfg.spike_high;
    return x;
  }
  if (cfg.pattern == "uniform-random") {
    return random_positive_state(n, cfg.state_seed, cfg.state_lo, cfg.state_hi);
  }
  throw std::invalid_argument("config: unknown initial-state pattern \"" +
                              cfg.pattern + "\"");
}

void series_from_common(SeriesTable& s, const Trajectory& traj,
                        const AdditiveLyapunov& V) {
  const double c = traj.conserved / traj.weights.sum();
  s.t = traj.times;
  s.value.reserve(traj.times.size());
  s.distance.reserve(traj.times.size());
  for (const Eigen::VectorXd& x : traj.states) {
    s.value.push_back(lyapunov_value(V, x));
    s.distance.push_back((x.array() - c).abs().maxCoeff());
  }
}

bool non_increasing(const std::vector<double>& v) {
  if (v.empty()) return true;
  const double slack = 1e-12 * std::max(1.0, std::abs(v.front()));
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[k - 1] + slack) return false;
  }
  return true;
}

void finish_series(SeriesTable& s) {
  s.value_monotone = non_increasing(s.value);
  s.dissipation_monotone = non_increasing(s.dissipation);
  s.distance_monotone = non_increasing(s.distance);
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text,
                              const std::string& default_name) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") +
                                e.what());
  }
  ScenarioConfig cfg;
  cfg.raw_json = root.dump(2);
  reject_unknown_keys(root, "scenario",
                      {"name", "graph", "initial_state", "potential",
                       "dynamics", "alpha", "integration", "outputs"});
  cfg.name = root.value("name", default_name);

  if (!root.contains("graph")) {
    throw std::invalid_argument("config: missing \"graph\"");
  }
  const json& g = root.at("graph");
  reject_unknown_keys(g, "graph",
                      {"file", "generator", "nodes", "seed", "symmetric"});
  if (g.contains("file") == g.contains("generator")) {
    throw std::invalid_argument(
        "config: graph needs exactly one of \"file\" or \"generator\"");
  }
  if (g.contains("file")) {
    cfg.graph_file = g.at("file").get<std::string>();
  } else {
    cfg.generator = g.at("generator").get<std::string>();
    cfg.nodes = g.value("nodes", 0);
    if (cfg.nodes < 2) {
      throw std::invalid_argument("config: generator needs \"nodes\" >= 2");
    }
    cfg.graph_seed = g.value("seed", 0ULL);
    cfg.symmetric = g.value("symmetric", true);
  }

  if (!root.contains("initial_state")) {
    throw std::invalid_argument("config: missing \"initial_state\"");
  }
  const json& s = root.at("initial_state");
  reject_unknown_keys(s, "initial_state",
                      {"vector", "pattern", "node", "high", "low", "lo", "hi",
                       "seed"});
  if (s.contains("vector")) {
    cfg.x0 = s.at("vector").get<std::vector<double>>();
  } else if (s.contains("pattern")) {
    cfg.pattern = s.at("pattern").get<std::string>();
    cfg.spike_node = s.value("node", 0);
    cfg.spike_high = s.value("high", 2.0);
    cfg.spike_low = s.value("low", 0.5);
    cfg.state_lo = s.value("lo", 0.5);
    cfg.state_hi = s.value("hi", 2.0);
    cfg.state_seed = s.value("seed", 0ULL);
  } else {
    throw std::invalid_argument(
        "config: initial_state needs \"vector\" or \"pattern\"");
  }

  if (root.contains("potential")) {
    const json& p = root.at("potential");
    reject_unknown_keys(p, "potential", {"name", "beta", "c", "ref"});
    cfg.potential = p.value("name", std::string("quadratic"));
    if (p.contains("beta")) cfg.beta = p.at("beta").get<double>();
    if (p.contains("c")) cfg.c = p.at("c").get<double>();
    cfg.quadratic_ref = p.value("ref", 1.0);
  }
  if (root.contains("dynamics")) {
    const json& d = root.at("dynamics");
    reject_unknown_keys(d, "dynamics", {"type", "f", "h"});
    cfg.dynamics = d.value("type", std::string("linear"));
    cfg.f_name = d.value("f", std::string("identity"));
    cfg.h_name = d.value("h", std::string("log"));
    if (cfg.dynamics != "linear" && cfg.dynamics != "nonlinear") {
      throw std::invalid_argument("config: dynamics type must be \"linear\" "
                                  "or \"nonlinear\"");
    }
  }
  if (root.contains("alpha")) {
    cfg.alpha = root.at("alpha").get<double>();
    if (!(*cfg.alpha > 0.0)) {
      throw std::invalid_argument("config: alpha must be positive");
    }
  }

  if (!root.contains("integration")) {
    throw std::invalid_argument("config: missing \"integration\"");
  }
  const json& it = root.at("integration");
  reject_unknown_keys(it, "integration", {"t_end", "dt", "record_stride"});
  cfg.t_end = it.value("t_end", 0.0);
  cfg.dt = it.value("dt", 0.0);
  cfg.record_stride = it.value("record_stride", 1);
  if (!(cfg.t_end > 0.0) || !(cfg.dt > 0.0)) {
    throw std::invalid_argument("config: integration needs t_end > 0, dt > 0");
  }
  if (cfg.record_stride < 1) {
    throw std::invalid_argument("config: record_stride must be >= 1");
  }

  if (root.contains("outputs")) {
    cfg.outputs = root.at("outputs").get<std::vector<std::string>>();
    for (const std::string& o : cfg.outputs) {
      if (o != "trajectory" && o != "series" && o != "report") {
        throw std::invalid_argument("config: unknown output \"" + o + "\"");
      }
    }
  }

  // Validate names eagerly so a typo fails before any computation.
  potential_by_name(cfg.potential, cfg.quadratic_ref);
  if (cfg.dynamics == "nonlinear") {
    scalar_function_by_name(cfg.f_name);
    scalar_function_by_name(cfg.h_name);
  }
  return cfg;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(),
                        std::filesystem::path(path).stem().string());
}

ConvexPotential potential_by_name(const std::string& name,
                                  double quadratic_ref) {
  if (name == "quadratic") return builtin_quadratic(quadratic_ref);
  if (name == "entropy") return builtin_entropy();
  if (name == "gibbs") return builtin_gibbs();
  throw std::invalid_argument("config: unknown potential \"" + name + "\"");
}

ScalarFunction scalar_function_by_name(const std::string& name) {
  if (name == "identity") return identity_function();
  if (name == "log") return log_function();
  if (name.rfind("power ", 0) == 0) {
    const double p = std::stod(name.substr(6));
    return power_function(p);
  }
  throw std::invalid_argument("config: unknown function \"" + name + "\"");
}

SeriesTable emit_series(const Trajectory& traj, const AdditiveLyapunov& V,
                        const LaplacianMatrix& L) {
  SeriesTable s;
  series_from_common(s, traj, V);
  s.dissipation.reserve(traj.times.size());
  for (const Eigen::VectorXd& x : traj.states) {
    s.dissipation.push_back(lyapunov_gradient(V, x).dot(L.entries * x));
  }
  finish_series(s);
  return s;
}

SeriesTable emit_series(const Trajectory& traj, const AdditiveLyapunov& V,
                        const LaplacianMatrix& L, const NonlinearSpec& spec) {
  SeriesTable s;
  series_from_common(s, traj, V);
  s.dissipation.reserve(traj.times.size());
  for (const Eigen::VectorXd& x : traj.states) {
    s.dissipation.push_back(
        lyapunov_gradient(V, x).dot(nonlinear_laplacian(L, spec, x) * x));
  }
  finish_series(s);
  return s;
}

void write_series_csv(const SeriesTable& series, std::ostream& out) {
  out << "t,V,Psi_V,dist_consensus_inf\n";
  for (std::size_t k = 0; k < series.t.size(); ++k) {
    out << fmt(series.t[k]) << "," << fmt(series.value[k]) << ","
        << fmt(series.dissipation[k]) << "," << fmt(series.distance[k])
        << "\n";
  }
}

bool RunReport::all_checks_passed() const {
  for (const CheckReport& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write " + tmp);
    }
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

RunReport run_scenario(const ScenarioConfig& cfg, const std::string& out_dir) {
  const WeightedDigraph g = cfg.graph_file.empty()
                                ? make_generated_graph(cfg)
                                : read_edge_list_file(cfg.graph_file);
  const LaplacianMatrix L = build_laplacian(g);
  const PerronVector q = perron_vector(L);
  const Eigen::VectorXd x0 = make_initial_state(cfg, g.node_count());
  const double a = consensus_value(q, x0);
  const double alpha = cfg.alpha.value_or(a);
  if (!(alpha > 0.0)) {
    throw std::invalid_argument(
        "scenario: consensus value is not positive; set \"alpha\" explicitly");
  }

  AdditiveLyapunov V{1.0, 1.0 / alpha, q,
                     potential_by_name(cfg.potential, cfg.quadratic_ref)};
  if (cfg.beta) V.beta = *cfg.beta;
  if (cfg.c) V.c = *cfg.c;

  RunReport report;
  report.name = cfg.name;
  report.consensus_value = a;
  report.alpha = alpha;

  Trajectory traj;
  NonlinearSpec spec;
  if (cfg.dynamics == "linear") {
    traj = integrate_linear(L, x0, cfg.t_end, cfg.dt, cfg.record_stride);
    report.series = emit_series(traj, V, L);
  } else {
    spec = NonlinearSpec{scalar_function_by_name(cfg.f_name),
                         scalar_function_by_name(cfg.h_name), alpha};
    traj = integrate_nonlinear(L, spec, x0, cfg.t_end, cfg.dt,
                               cfg.record_stride);
    report.series = emit_series(traj, V, L, spec);
  }
  report.terminal_time = traj.terminal_time();
  report.terminal_distance = report.series.distance.back();
  report.stopped_early = traj.stopped_early;

  // Conservation holds for every linear run (q . x) and for symmetric
  // nonlinear diffusions (sum x); directed nonlinear flows conserve neither.
  if (cfg.dynamics == "linear") {
    report.checks.push_back(check_conservation(traj, q));
  } else if (L.symmetric) {
    report.checks.push_back(
        check_conservation(traj, PerronVector::uniform(g.node_count())));
  }
  report.checks.push_back(check_monotone_decrease(V, traj));
  if (L.symmetric && cfg.dynamics == "linear" &&
      (V.potential.domain.lo < 0.0 || x0.minCoeff() > 0.0)) {
    report.checks.push_back(
        check_gradient_identity(L, V.potential, x0, alpha));
  }

  std::filesystem::create_directories(out_dir);
  const auto artifact_path = [&](const std::string& kind,
                                 const std::string& ext) {
    return (std::filesystem::path(out_dir) / (cfg.name + "_" + kind + ext))
        .string();
  };
  for (const std::string& o : cfg.outputs) {
    if (o == "trajectory") {
      std::ostringstream body;
      write_trajectory_csv(traj, body);
      const std::string path = artifact_path("trajectory", ".csv");
      write_file_atomic(path, body.str());
      report.artifacts.push_back(path);
    } else if (o == "series") {
      std::ostringstream body;
      write_series_csv(report.series, body);
      const std::string path = artifact_path("series", ".csv");
      write_file_atomic(path, body.str());
      report.artifacts.push_back(path);
    }
  }
  // The report artifact is written last so it can list the others.
  for (const std::string& o : cfg.outputs) {
    if (o == "report") {
      const std::string path = artifact_path("report", ".json");
      report.artifacts.push_back(path);
      write_file_atomic(path, run_report_json(report, cfg.raw_json));
    }
  }
  return report;
}

std::string run_report_json(const RunReport& report,
                            const std::string& raw_config) {
  json j;
  j["name"] = report.name;
  j["scenario"] = raw_config.empty() ? json::object() : json::parse(raw_config);
  j["consensus_value"] = report.consensus_value;
  j["alpha"] = report.alpha;
  j["terminal_time"] = report.terminal_time;
  j["terminal_distance"] = report.terminal_distance;
  j["stopped_early"] = report.stopped_early;
  j["monotone"] = {{"V", report.series.value_monotone},
                   {"Psi_V", report.series.dissipation_monotone},
                   {"dist", report.series.distance_monotone}};
  j["checks"] = json::array();
  for (const CheckReport& c : report.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"residual", c.residual},
                           {"tolerance", c.tolerance},
                           {"seed", c.seed},
                           {"context", c.context}});
  }
  // names only, so identical configs give byte-identical reports no matter
  // where they are written
  j["artifacts"] = json::array();
  for (const std::string& path : report.artifacts) {
    j["artifacts"].push_back(
        std::filesystem::path(path).filename().string());
  }
  return j.dump(2) + "\n";
}

}  // namespace consensus
