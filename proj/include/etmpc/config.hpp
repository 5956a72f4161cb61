#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "etmpc/controller.hpp"
#include "etmpc/etm.hpp"
#include "etmpc/lmi.hpp"

namespace etmpc {

struct DisturbanceSpec {
  std::string kind = "zero";  // zero | sinusoid | random | table
  double amplitude = 0.0;
  double frequency = 1.0;
  double phase = 0.0;
  std::vector<Eigen::VectorXd> table;
};

struct SchedulingSpec {
  std::string kind = "random";  // random | constant | sinusoid
  Eigen::VectorXd weights;      // constant only
  double frequency = 0.3;       // sinusoid only
};

/**
 * Scenario file contents, unchecked beyond shapes. Layout:
 *
 *   [model]    n_x n_u n_w delays vertices A<v> Ad<v>_<ρ> B<v> D u_sat d_sq
 *   [cost]     Q R varphi delta invariance_form
 *   [etm]      mode mu theta epsilon beta0
 *   [scenario] x0 pre_history steps disturbance* scheduling* seed
 *              sample_time zeta warm_start audit_feasibility
 *
 * Matrices: "1 2; 3 4", "[[1, 2], [3, 4]]", eye(n), zeros(r, c), ones(r, c),
 * diag(a b ...), products/sums of those with scalars, names of matrices
 * defined earlier in the same section, and @file.csv (relative to the
 * scenario file).
 */
struct ScenarioConfig {
  int n_x = 0;
  int n_u = 0;
  int n_w = 0;
  std::vector<int> delays;
  std::vector<Eigen::MatrixXd> A;
  std::vector<std::vector<Eigen::MatrixXd>> A_delay;  // [vertex][channel]
  std::vector<Eigen::MatrixXd> B;
  Eigen::MatrixXd D;
  double u_sat = 0.0;
  double d_sq = 0.0;

  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  double varphi = 0.0;
  double delta = 0.0;
  InvarianceForm invariance_form = InvarianceForm::kContractive;

  std::vector<TriggerMode> modes{TriggerMode::kAdaptive, TriggerMode::kStatic};
  double mu = 0.0;
  double theta = 0.0;
  double epsilon = 0.0;
  double beta0 = 0.0;

  Eigen::VectorXd x0;
  std::vector<Eigen::VectorXd> pre_history;  // x_{-1}, ..., x_{-τ}
  int steps = 50;
  DisturbanceSpec disturbance;
  SchedulingSpec scheduling;
  std::uint64_t seed = 0;
  double sample_time = 1.0;
  double zeta = 0.05;
  bool warm_start = false;
  bool audit_feasibility = true;

  int num_vertices() const { return static_cast<int>(A.size()); }

  /// Runs validate_scenario and throws ConfigError listing the failed
  /// checks, then assembles the runtime objects.
  Scenario build(TriggerMode mode) const;
};

/// `source_dir` resolves @file references.
ScenarioConfig parse_scenario(std::istream& in, const std::string& source_dir = ".");
ScenarioConfig load_scenario(const std::string& path);
/// Fully resolved, inline matrices, %.17g; parse_scenario reads it back
/// unchanged.
void write_scenario(std::ostream& out, const ScenarioConfig& cfg);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Parameter ranges, dimensions, disturbance budget and SPD of Q, R. Never
/// throws.
std::vector<ValidationCheck> validate_scenario(const ScenarioConfig& cfg);

/// "adaptive,static" -> modes. Throws ConfigError on unknown or empty lists.
std::vector<TriggerMode> parse_mode_list(const std::string& text);

}  // namespace etmpc
