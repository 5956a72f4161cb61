// etmpc: batch front-end. Runs scenario files under one or more trigger
// modes and writes CSV series, metrics and a comparison table.

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "etmpc/analysis.hpp"
#include "etmpc/config.hpp"
#include "etmpc/controller.hpp"
#include "etmpc/errors.hpp"
#include "etmpc/report.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitGolden = 4;

struct RunManifest {
  std::string scenario;
  std::string out = "results";
  std::string modes;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::optional<double> zeta;
  std::optional<double> sample_time;
  bool dump_sdp = false;
  std::optional<bool> audit;
  std::string golden;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream OpenOut(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw IoError("cannot write '" + p.string() + "'");
  return f;
}

struct ModeResult {
  etmpc::TriggerMode mode;
  etmpc::Trajectory trajectory;
  etmpc::RunMetrics metrics;
};

void WriteArtifacts(const fs::path& dir, const etmpc::ScenarioConfig& cfg,
                    const etmpc::Scenario& scenario, const ModeResult& r, bool dump_sdp) {
  fs::create_directories(dir);
  {
    auto f = OpenOut(dir / "trajectory.csv");
    etmpc::write_trajectory_csv(f, r.trajectory);
  }
  {
    auto f = OpenOut(dir / "triggers.csv");
    etmpc::write_triggers_csv(f, r.trajectory);
  }
  {
    auto f = OpenOut(dir / "beta.csv");
    etmpc::write_beta_csv(f, r.trajectory);
  }
  {
    auto f = OpenOut(dir / "gamma.csv");
    etmpc::write_gamma_csv(f, r.trajectory);
  }
  {
    auto f = OpenOut(dir / "gain_norms.csv");
    etmpc::write_gain_norms_csv(f, r.trajectory);
  }
  {
    auto f = OpenOut(dir / "interval_histogram.csv");
    etmpc::write_histogram_csv(f, r.metrics.stats);
  }
  {
    auto f = OpenOut(dir / "metrics.txt");
    etmpc::write_metrics(f, etmpc::to_string(r.mode), r.metrics);
  }
  {
    auto f = OpenOut(dir / "scenario.cfg");
    etmpc::write_scenario(f, cfg);
  }
  if (dump_sdp) {
    fs::create_directories(dir / "sdp");
    for (const auto& t : r.trajectory.triggers) {
      const auto problem =
          etmpc::assemble_problem(scenario.model, scenario.cost, scenario.synthesis(),
                                  r.trajectory.buffer_at(t.k), r.trajectory.beta_at(t.k));
      auto f = OpenOut(dir / "sdp" / ("k" + std::to_string(t.k) + ".sdp"));
      etmpc::sdp::write_sparse_text(f, problem.program);
    }
  }
}

int CompareGolden(const fs::path& golden, const std::vector<ModeResult>& results) {
  int mismatches = 0;
  for (const auto& r : results) {
    const std::string mode = etmpc::to_string(r.mode);
    const fs::path path = golden / mode / "metrics.txt";
    std::ifstream in(path);
    if (!in) {
      std::cerr << "golden: no reference for mode " << mode << " (" << path.string() << ")\n";
      ++mismatches;
      continue;
    }
    const auto expected = etmpc::read_metrics(in);
    std::ostringstream buf;
    etmpc::write_metrics(buf, mode, r.metrics);
    std::istringstream actual_in(buf.str());
    const auto diff = etmpc::compare_metrics(expected, etmpc::read_metrics(actual_in));
    for (const auto& d : diff) {
      std::cerr << "golden: " << mode << "." << d.key << " expected " << d.expected << ", got "
                << d.actual << "\n";
    }
    mismatches += static_cast<int>(diff.size());
    if (diff.empty()) std::cout << "golden: " << mode << " matches\n";
  }
  return mismatches;
}

int RunCommand(const RunManifest& m) {
  auto cfg = etmpc::load_scenario(m.scenario);
  if (m.seed) cfg.seed = *m.seed;
  if (m.steps) cfg.steps = *m.steps;
  if (m.zeta) cfg.zeta = *m.zeta;
  if (m.sample_time) cfg.sample_time = *m.sample_time;
  if (m.audit) cfg.audit_feasibility = *m.audit;
  if (!m.modes.empty()) cfg.modes = etmpc::parse_mode_list(m.modes);

  std::vector<etmpc::Scenario> scenarios;
  for (auto mode : cfg.modes) scenarios.push_back(cfg.build(mode));

  std::vector<std::future<ModeResult>> jobs;
  for (const auto& s : scenarios) {
    jobs.push_back(std::async(std::launch::async, [&s, &cfg] {
      ModeResult r{s.mode, etmpc::run(s), {}};
      r.metrics = etmpc::compute_metrics(r.trajectory, cfg.zeta, cfg.sample_time);
      return r;
    }));
  }
  std::vector<ModeResult> results;
  for (auto& j : jobs) results.push_back(j.get());

  const fs::path out(m.out);
  std::vector<std::pair<std::string, etmpc::RunMetrics>> table;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    WriteArtifacts(out / etmpc::to_string(r.mode), cfg, scenarios[i], r, m.dump_sdp);
    table.emplace_back(etmpc::to_string(r.mode), r.metrics);
    for (const auto& w : r.trajectory.warnings) {
      std::cerr << "warning (" << etmpc::to_string(r.mode) << "): " << w << "\n";
    }
  }
  {
    auto f = OpenOut(out / "summary.txt");
    etmpc::write_summary(f, table);
  }
  etmpc::write_summary(std::cout, table);

  if (!m.golden.empty() && CompareGolden(m.golden, results) > 0) return kExitGolden;
  return kExitOk;
}

int ValidateCommand(const std::string& path) {
  const auto cfg = etmpc::load_scenario(path);
  bool ok = true;
  for (const auto& c : etmpc::validate_scenario(cfg)) {
    std::cout << (c.passed ? "PASS  " : "FAIL  ") << c.name;
    if (!c.detail.empty()) std::cout << "  [" << c.detail << "]";
    std::cout << "\n";
    ok = ok && c.passed;
  }
  return ok ? kExitOk : kExitConfig;
}

int SdpCommand(const std::string& path, bool verbose) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  const auto program = etmpc::sdp::read_sparse_text(in);
  etmpc::sdp::SdpOptions opt;
  opt.verbose = verbose;
  const auto sol = etmpc::sdp::solve(program, opt);
  std::cout << "status = " << etmpc::sdp::to_string(sol.status) << "\n";
  std::cout.precision(12);
  std::cout << "objective = " << sol.objective << "\n";
  std::cout << "iterations = " << sol.diagnostics.iterations << "\n";
  std::cout << "relative_gap = " << sol.diagnostics.relative_gap << "\n";
  std::cout << "min_block_eigenvalue = " << sol.diagnostics.min_block_eigenvalue << "\n";
  return sol.status == etmpc::sdp::SdpStatus::kOptimal ? kExitOk : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered robust MPC for delayed polytopic systems"};
  app.require_subcommand(1);

  RunManifest manifest;
  auto* run = app.add_subcommand("run", "Simulate a scenario under one or more trigger modes");
  run->add_option("--scenario", manifest.scenario, "Scenario file")->required();
  run->add_option("--mode", manifest.modes,
                  "Comma-separated modes: adaptive, static, periodic (default: from file)");
  run->add_option("--out", manifest.out, "Output directory")->capture_default_str();
  run->add_option("--seed", manifest.seed, "Seed for random scheduling/disturbance");
  run->add_option("--steps", manifest.steps, "Number of simulated steps");
  run->add_option("--zeta", manifest.zeta, "Steady-state threshold");
  run->add_option("--sample-time", manifest.sample_time, "Seconds per step in reports");
  run->add_flag("--dump-sdp", manifest.dump_sdp, "Write each trigger's SDP in sparse text");
  run->add_flag("--audit-feasibility,!--no-audit-feasibility", manifest.audit,
                "Re-check the previous solution at every trigger");
  run->add_option("--golden-compare", manifest.golden,
                  "Directory with <mode>/metrics.txt references");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a scenario file's parameters");
  validate->add_option("scenario,--scenario", validate_path, "Scenario file")->required();

  std::string sdp_path;
  bool sdp_verbose = false;
  auto* sdp = app.add_subcommand("sdp", "Solve a dumped sparse SDP file");
  sdp->add_option("file", sdp_path, "Sparse SDP file")->required();
  sdp->add_flag("-v,--verbose", sdp_verbose, "Print the iteration log");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) {
      if (run->count("--mode") > 0 && manifest.modes.find_first_not_of(" ,") == std::string::npos) {
        std::cerr << "usage error: --mode needs at least one mode\n";
        return kExitUsage;
      }
      return RunCommand(manifest);
    }
    if (*validate) return ValidateCommand(validate_path);
    if (*sdp) return SdpCommand(sdp_path, sdp_verbose);
  } catch (const etmpc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const etmpc::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const etmpc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitUsage;
}
