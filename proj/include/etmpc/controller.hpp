#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "etmpc/etm.hpp"
#include "etmpc/lmi.hpp"
#include "etmpc/model.hpp"
#include "etmpc/sdp.hpp"
#include "etmpc/trajectory.hpp"

namespace etmpc {

/// Everything one closed-loop run needs.
struct Scenario {
  Scenario(PolytopicModel model, CostConfig cost, EtmConfig etm, Eigen::VectorXd x0);

  PolytopicModel model;
  CostConfig cost;
  EtmConfig etm;
  Eigen::VectorXd x0;
  /// x_{-1}, ..., x_{-τ}; empty means x0 is replicated.
  std::vector<Eigen::VectorXd> pre_history;
  int steps = 50;
  TriggerMode mode = TriggerMode::kAdaptive;
  DisturbanceSignal disturbance;
  SchedulingSignal scheduling;
  InvarianceForm invariance_form = InvarianceForm::kContractive;
  bool warm_start = false;
  /// Re-check the previous solution at every later trigger.
  bool audit_feasibility = true;
  sdp::SdpOptions solver;

  /// Throws ParameterError/DimensionError on inconsistent settings
  /// (dimensions, δ < 1 − μ, disturbance budget, single delay).
  void validate() const;
  DelayBuffer initial_buffer() const;
  SynthesisSettings synthesis() const;
};

struct TriggerSolution {
  sdp::SdpStatus status = sdp::SdpStatus::kNumericalFailure;
  sdp::SdpDiagnostics diagnostics;
  Eigen::VectorXd values;
  DecisionVars vars;
  ControllerGains gains;
  double gamma = 0.0;
  double min_block_eigenvalue = 0.0;
};

/// Assembles and solves the synthesis problem for the current history and
/// β. On a non-optimal status only `status` and `diagnostics` are set.
TriggerSolution solve_at_trigger(const Scenario& scenario, const DelayBuffer& buffer,
                                 double beta,
                                 const std::optional<Eigen::VectorXd>& warm_start = {});

/// Checks a previous solution against the problem of the current state.
sdp::FeasibilityReport audit_recursive_feasibility(const Scenario& scenario,
                                                   const DelayBuffer& buffer, double beta,
                                                   const Eigen::VectorXd& previous,
                                                   double tolerance = 1e-6);

/**
 * Closed loop: forced trigger at k = 0, trigger test with β_k then the β
 * update with the Φ in force after any trigger at k, zero-order hold of
 * u = F x_{k_t} between triggers, true saturation in the plant.
 *
 * Throws SolverError if the first solve fails. A later failed solve keeps
 * the previous gains and input and marks the run non-certified.
 */
Trajectory run(const Scenario& scenario);

}  // namespace etmpc
