#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "etmpc/analysis.hpp"
#include "etmpc/trajectory.hpp"

namespace etmpc {

/// Columns: k, x_1..x_n, u_1..u_m, sat_u_1..sat_u_m, beta, trigger, gamma,
/// normF, normPhi.
void write_trajectory_csv(std::ostream& out, const Trajectory& tr);
/// k, gamma, iterations, relative_gap, min_eigenvalue, audited, audit_passed,
/// audit_min_eigenvalue.
void write_triggers_csv(std::ostream& out, const Trajectory& tr);
/// k, beta for k = 0..N.
void write_beta_csv(std::ostream& out, const Trajectory& tr);
/// k, gamma of the solution in force at k.
void write_gamma_csv(std::ostream& out, const Trajectory& tr);
/// k, normF, normPhi at trigger instants.
void write_gain_norms_csv(std::ostream& out, const Trajectory& tr);
/// interval, count.
void write_histogram_csv(std::ostream& out, const TriggerStatistics& stats);

/// key = value lines.
void write_metrics(std::ostream& out, const std::string& mode, const RunMetrics& m);
std::map<std::string, std::string> read_metrics(std::istream& in);

/// Table with one column per mode: triggering ratio, average interval,
/// steps per trigger, trigger count and settling step.
void write_summary(std::ostream& out,
                   const std::vector<std::pair<std::string, RunMetrics>>& runs);

struct GoldenMismatch {
  std::string key;
  std::string expected;
  std::string actual;
};

/// Compares the keys present in `golden`. Integer-valued keys must match
/// exactly, real-valued keys to `rel_tol` relative (plus 1e-9 absolute).
std::vector<GoldenMismatch> compare_metrics(const std::map<std::string, std::string>& golden,
                                            const std::map<std::string, std::string>& actual,
                                            double rel_tol = 1e-6);

}  // namespace etmpc
