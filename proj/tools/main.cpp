// Command-line front end: simulate scenarios, run the verification suite,
// print flow maps, and summarize run reports.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "consensus/dynamics.hpp"
#include "consensus/graph.hpp"
#include "consensus/scenario.hpp"
#include "consensus/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDomain = 3;
constexpr int kExitVerification = 4;

std::string resolve_out_dir(const std::string& flag_value) {
  if (const char* env = std::getenv("CONSENSUS_OUT_DIR")) {
    if (*env) return env;
  }
  return flag_value.empty() ? "." : flag_value;
}

int run_simulate(const std::vector<std::string>& configs,
                 const std::string& out_flag) {
  const std::string out_dir = resolve_out_dir(out_flag);
  std::vector<std::future<consensus::RunReport>> jobs;
  std::vector<consensus::ScenarioConfig> cfgs;
  for (const std::string& path : configs) {
    cfgs.push_back(consensus::parse_scenario_file(path));
  }
  for (const consensus::ScenarioConfig& cfg : cfgs) {
    jobs.push_back(std::async(std::launch::async, [&cfg, &out_dir] {
      return consensus::run_scenario(cfg, out_dir);
    }));
  }
  bool all_passed = true;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const consensus::RunReport report = jobs[i].get();
    std::printf("scenario %-24s a(x0)=%.12g terminal_dist=%.3e %s\n",
                report.name.c_str(), report.consensus_value,
                report.terminal_distance,
                report.stopped_early ? "(stopped early)" : "");
    for (const consensus::CheckReport& c : report.checks) {
      std::printf("  %s\n", consensus::format_report(c).c_str());
      all_passed = all_passed && c.passed;
    }
    for (const std::string& artifact : report.artifacts) {
      std::printf("  wrote %s\n", artifact.c_str());
    }
  }
  return all_passed ? kExitOk : kExitVerification;
}

int run_verify(std::uint64_t seed, int count, const std::string& sizes_csv,
               bool strict, bool lenient) {
  std::vector<int> sizes;
  std::stringstream ss(sizes_csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) sizes.push_back(std::stoi(item));
  }
  auto mode = consensus::ToleranceMode::normal;
  if (strict) mode = consensus::ToleranceMode::strict;
  if (lenient) mode = consensus::ToleranceMode::lenient;

  const auto reports = consensus::run_verification_suite(seed, count, sizes, mode);
  int failures = 0;
  for (const consensus::CheckReport& r : reports) {
    std::printf("%s\n", consensus::format_report(r).c_str());
    if (!r.passed) ++failures;
  }
  std::printf("%zu checks, %d failed (seed=%llu count=%d)\n", reports.size(),
              failures, static_cast<unsigned long long>(seed), count);
  return failures == 0 ? kExitOk : kExitVerification;
}

int run_flowmap(const std::string& graph_path, double t,
                const std::string& out_flag) {
  const consensus::WeightedDigraph g =
      consensus::read_edge_list_file(graph_path);
  const consensus::FlowMap P =
      consensus::flow_map(consensus::build_laplacian(g), t);
  std::ostringstream body;
  char buf[64];
  for (int i = 0; i < P.matrix.rows(); ++i) {
    for (int j = 0; j < P.matrix.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", P.matrix(i, j));
      body << (j ? "," : "") << buf;
    }
    body << "\n";
  }
  if (!out_flag.empty()) {
    consensus::write_file_atomic(out_flag, body.str());
    std::printf("wrote %s\n", out_flag.c_str());
  } else {
    std::fputs(body.str().c_str(), stdout);
  }
  return kExitOk;
}

int run_report(const std::string& run_dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> reports;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() >= 12 &&
        name.substr(name.size() - 12) == "_report.json") {
      reports.push_back(entry.path());
    }
  }
  std::sort(reports.begin(), reports.end());
  for (const fs::path& path : reports) {
    const std::string name = path.filename().string();
    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    std::printf("%s\n", name.c_str());
    std::printf("  consensus value  %.12g\n", j.value("consensus_value", 0.0));
    std::printf("  terminal dist    %.3e at t=%.6g%s\n",
                j.value("terminal_distance", 0.0), j.value("terminal_time", 0.0),
                j.value("stopped_early", false) ? " (stopped early)" : "");
    if (j.contains("monotone")) {
      std::printf("  monotone         V=%s Psi_V=%s dist=%s\n",
                  j["monotone"].value("V", false) ? "yes" : "no",
                  j["monotone"].value("Psi_V", false) ? "yes" : "no",
                  j["monotone"].value("dist", false) ? "yes" : "no");
    }
    for (const auto& c : j.value("checks", nlohmann::json::array())) {
      std::printf("  %-44s %s residual=%.6e tol=%.6e\n",
                  c.value("name", std::string()).c_str(),
                  c.value("passed", false) ? "pass" : "FAIL",
                  c.value("residual", 0.0), c.value("tolerance", 0.0));
    }
    for (const auto& a : j.value("artifacts", nlohmann::json::array())) {
      std::printf("  artifact %s\n", a.get<std::string>().c_str());
    }
  }
  if (reports.empty()) {
    std::fprintf(stderr, "no *_report.json found in %s\n", run_dir.c_str());
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"consensus flows: simulation and machine verification of "
               "Laplacian consensus dynamics"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "run scenario config file(s)");
  std::vector<std::string> sim_configs;
  std::string sim_out;
  sim->add_option("config", sim_configs, "scenario JSON file(s)")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out,
                  "output directory (env CONSENSUS_OUT_DIR overrides)");

  auto* ver = app.add_subcommand("verify", "run the verification suite");
  std::uint64_t seed = 0;
  int count = 1;
  std::string sizes = "4,8,16";
  bool strict = false;
  bool lenient = false;
  ver->add_option("--seed", seed, "base seed")->required();
  ver->add_option("--count", count, "instances per size")->required();
  ver->add_option("--sizes", sizes, "comma-separated node counts");
  auto* strict_flag = ver->add_flag("--strict", strict, "scale tolerances by 0.1");
  ver->add_flag("--lenient", lenient, "scale tolerances by 10")
      ->excludes(strict_flag);

  auto* fm = app.add_subcommand("flowmap", "print exp(-L t) for a graph");
  std::string fm_graph;
  double fm_t = 1.0;
  std::string fm_out;
  fm->add_option("graph", fm_graph, "edge-list file")
      ->required()
      ->check(CLI::ExistingFile);
  fm->add_option("--t", fm_t, "horizon t >= 0")->required();
  fm->add_option("--out", fm_out, "write CSV here instead of stdout");

  auto* rep = app.add_subcommand("report", "summarize run reports in a directory");
  std::string rep_dir;
  rep->add_option("run-dir", rep_dir, "directory with *_report.json")
      ->required()
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_configs, sim_out);
    if (ver->parsed()) return run_verify(seed, count, sizes, strict, lenient);
    if (fm->parsed()) return run_flowmap(fm_graph, fm_t, fm_out);
    if (rep->parsed()) return run_report(rep_dir);
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return kExitDomain;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitOk;
}
