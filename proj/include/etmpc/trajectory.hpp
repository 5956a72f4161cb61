#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "etmpc/etm.hpp"
#include "etmpc/lmi.hpp"
#include "etmpc/model.hpp"
#include "etmpc/sdp.hpp"

namespace etmpc {

/// One closed-loop step k.
struct StepRecord {
  int k = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd u;      // held input before saturation
  Eigen::VectorXd u_sat;  // σ(u), what the plant receives
  Eigen::VectorXd omega;
  Eigen::VectorXd alpha;
  double beta = 0.0;       // β_k, before this step's update
  /// ‖e‖²_Φ − θ‖x‖²_Φ seen by the trigger test, i.e. with the Φ in force
  /// before any trigger at k. Zero at k = 0.
  double gap = 0.0;
  bool triggered = false;  // the ETM fired (or k = 0)
  bool solve_failed = false;
  int active = -1;  // index into Trajectory::triggers of the solution in force
};

/// One successful solve.
struct TriggerRecord {
  int k = 0;
  double gamma = 0.0;
  Eigen::VectorXd values;
  DecisionVars vars;
  ControllerGains gains;
  sdp::SdpDiagnostics diagnostics;
  double min_block_eigenvalue = 0.0;  // check_feasibility of the new solution
  /// Previous solution re-checked against this trigger's problem. Not set
  /// for the first trigger.
  bool audited = false;
  bool audit_passed = false;
  double audit_min_eigenvalue = 0.0;
};

/**
 * Recorded run. `steps` holds k = 0..N-1, `final_state` is x_N and
 * `initial_history` is (x_0, x_{-1}, ..., x_{-τ}).
 */
struct Trajectory {
  TriggerMode mode = TriggerMode::kAdaptive;
  std::vector<Eigen::VectorXd> initial_history;
  std::vector<StepRecord> steps;
  Eigen::VectorXd final_state;
  double final_beta = 0.0;
  std::vector<TriggerRecord> triggers;

  // Data the certificates need.
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  double varphi = 0.0;
  double theta = 0.0;
  double u_sat = 0.0;

  bool certified = true;
  double max_saturation_ratio = 0.0;  // max_k,i |h_iᵀx_k| / u_sat
  std::vector<std::string> warnings;

  int num_steps() const { return static_cast<int>(steps.size()); }
  int max_delay() const { return static_cast<int>(initial_history.size()) - 1; }
  /// x_k for -τ ≤ k ≤ N.
  const Eigen::VectorXd& state_at(int k) const;
  /// β_k for 0 ≤ k ≤ N.
  double beta_at(int k) const;
  /// (x_k, ..., x_{k-τ}) for 0 ≤ k ≤ N.
  DelayBuffer buffer_at(int k) const;
  const TriggerRecord& active_at(int k) const { return triggers.at(steps.at(k).active); }
  std::vector<int> trigger_instants() const;
};

}  // namespace etmpc
