#pragma once

#include <limits>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "etmpc/model.hpp"
#include "etmpc/trajectory.hpp"

namespace etmpc {

struct VFunctionValue {
  double total = 0.0;
  double quadratic = 0.0;  // z̄ᵀP̄z̄
  double beta = 0.0;
};

/// V = xᵀPx + Σ_{ρ=1}^{τ} x_{-ρ}ᵀP_τx_{-ρ} + β over the whole buffer.
/// Throws ParameterError unless P and P_τ are symmetric positive definite.
VFunctionValue lyapunov_value(const DelayBuffer& buffer, const Eigen::MatrixXd& P,
                              const Eigen::MatrixXd& P_tau, double beta);

/// V_k with the matrices of the trigger in force at step k (0 ≤ k ≤ N;
/// k = N uses the solution active at N - 1).
VFunctionValue lyapunov_value_at(const Trajectory& tr, int k);

struct DecreaseReport {
  /// r_k = V_{k+1} − V_k + ‖x_k‖²_Q + ‖σ(u_k)‖²_R − φ‖ω_k‖², both V with the
  /// matrices active at k.
  std::vector<double> residuals;
  std::vector<double> tolerances;  // 1e-6·(1 + V_k)
  double max_relative = -std::numeric_limits<double>::infinity();  // max r_k/(1+V_k)
  int violations = 0;
  bool passed = true;
};

/// Steps [begin, end) of the run; end < 0 means the last step.
DecreaseReport check_decrease_condition(const Trajectory& tr, int begin = 0, int end = -1);

struct InvarianceReport {
  std::vector<double> values;  // V_k
  std::vector<double> bounds;  // γ* of the active solution
  int violations = 0;
  double max_ratio = 0.0;  // max V_k/γ*
  bool passed = true;
};

/// V_k ≤ γ*(1 + rel_tol) for every k = 0..N-1.
InvarianceReport check_invariant_set(const Trajectory& tr, double rel_tol = 1e-6);

/// Smallest k with max_{j ≥ k, i} |x_{i,j}| ≤ ζ, via one reverse scan.
std::optional<int> steady_state_time(const std::vector<Eigen::VectorXd>& states, double zeta);
/// Over the recorded steps x_0..x_{N-1}.
std::optional<int> steady_state_time(const Trajectory& tr, double zeta);

struct TriggerStatistics {
  int triggers = 0;
  int steps = 0;
  double ratio = 0.0;               // |S| / steps
  double average_interval = 0.0;    // mean of consecutive differences (NaN if |S| < 2)
  double steps_per_trigger = 0.0;   // steps / |S|
  std::map<int, int> histogram;     // interval -> count
};

TriggerStatistics trigger_statistics(const std::vector<int>& instants, int steps);
TriggerStatistics trigger_statistics(const Trajectory& tr);

struct GainNorm {
  int k = 0;
  double F = 0.0;    // Frobenius norms
  double Phi = 0.0;
};

std::vector<GainNorm> gain_norm_series(const Trajectory& tr);

/// Fraction of steps k ≥ 1 at which the adaptive rule with `epsilon` and the
/// static rule take the same decision on this trajectory's (gap, β) values.
double trigger_rule_agreement(const Trajectory& tr, double epsilon);

/// Summary of one run, written as key = value by the report module.
struct RunMetrics {
  TriggerStatistics stats;
  std::optional<int> settling_step;
  double settling_time = 0.0;  // settling_step · sample_time
  double max_decrease_relative = 0.0;
  int decrease_violations = 0;
  int invariance_violations = 0;
  double max_invariance_ratio = 0.0;
  int audits = 0;
  int audits_passed = 0;
  double min_beta = 0.0;
  double min_block_eigenvalue = 0.0;
  double max_relative_gap = 0.0;
  double max_saturation_ratio = 0.0;
  double first_gamma = 0.0;
  double last_gamma = 0.0;
  int failed_solves = 0;
  bool certified = true;
};

RunMetrics compute_metrics(const Trajectory& tr, double zeta, double sample_time = 1.0);

}  // namespace etmpc
