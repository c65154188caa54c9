#pragma once

#include <optional>
#include <string>
#include <vector>

#include "consensus/dynamics.hpp"
#include "consensus/potential.hpp"
#include "consensus/verify.hpp"

namespace consensus {

/// Parsed simulation scenario. See docs/scenario-schema.md for the JSON
/// layout; unknown keys are rejected at parse time.
struct ScenarioConfig {
  std::string name;

  // graph: either an edge-list file or a named generator
  std::string graph_file;
  std::string generator;  // "erdos" | "path" | "cycle" | "complete"
  int nodes = 0;
  std::uint64_t graph_seed = 0;
  bool symmetric = true;

  // initial state: explicit vector or named pattern
  std::vector<double> x0;
  std::string pattern;  // "spike" | "uniform-random"
  int spike_node = 0;
  double spike_high = 2.0;
  double spike_low = 0.5;
  double state_lo = 0.5;
  double state_hi = 2.0;
  std::uint64_t state_seed = 0;

  // potential (by name) with optional parameter overrides
  std::string potential = "quadratic";
  std::optional<double> beta;
  std::optional<double> c;
  double quadratic_ref = 1.0;

  // dynamics
  std::string dynamics = "linear";
  std::string f_name = "identity";
  std::string h_name = "log";

  std::optional<double> alpha;

  double t_end = 0.0;
  double dt = 0.0;
  int record_stride = 1;

  std::vector<std::string> outputs{"trajectory", "series", "report"};

  std::string raw_json;  // scenario echo for the run report
};

ScenarioConfig parse_scenario(const std::string& json_text,
                              const std::string& default_name);
ScenarioConfig parse_scenario_file(const std::string& path);

/// Plot-ready series along a trajectory: V(t), the dissipation rate
/// Psi_V(t) = grad V . (generator * x), and the sup-distance to consensus.
struct SeriesTable {
  std::vector<double> t;
  std::vector<double> value;
  std::vector<double> dissipation;
  std::vector<double> distance;

  bool value_monotone = false;
  bool dissipation_monotone = false;
  bool distance_monotone = false;
};

SeriesTable emit_series(const Trajectory& traj, const AdditiveLyapunov& V,
                        const LaplacianMatrix& L);
SeriesTable emit_series(const Trajectory& traj, const AdditiveLyapunov& V,
                        const LaplacianMatrix& L, const NonlinearSpec& spec);

void write_series_csv(const SeriesTable& series, std::ostream& out);

struct RunReport {
  std::string name;
  double consensus_value = 0.0;
  double alpha = 0.0;
  double terminal_time = 0.0;
  double terminal_distance = 0.0;
  bool stopped_early = false;
  std::vector<CheckReport> checks;
  std::vector<std::string> artifacts;  // paths of emitted files
  SeriesTable series;

  bool all_checks_passed() const;
};

/// Runs one scenario, writing requested artifacts into out_dir (atomically:
/// write-temp-then-rename). Deterministic for fixed seeds.
RunReport run_scenario(const ScenarioConfig& cfg, const std::string& out_dir);

/// Serializes the run report (scenario echo, consensus value, terminal
/// distance, checks, artifact paths) as JSON.
std::string run_report_json(const RunReport& report, const std::string& raw_config);

ConvexPotential potential_by_name(const std::string& name, double quadratic_ref);
ScalarFunction scalar_function_by_name(const std::string& name);

/// Atomic file write used for all artifacts.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace consensus
