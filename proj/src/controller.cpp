#include "etmpc/controller.hpp"

#include <cmath>
#include <sstream>

#include "etmpc/errors.hpp"

namespace etmpc {

Scenario::Scenario(PolytopicModel model_in, CostConfig cost_in, EtmConfig etm_in,
                   Eigen::VectorXd x0_in)
    : model(std::move(model_in)),
      cost(std::move(cost_in)),
      etm(etm_in),
      x0(std::move(x0_in)),
      disturbance(DisturbanceSignal::Zero(model.disturbance_dim())),
      scheduling(SchedulingSignal::Random(model.num_vertices(), 0)) {}

void Scenario::validate() const {
  const int nx = model.state_dim();
  if (model.num_delays() != 1) {
    throw ParameterError("synthesis supports a single delay channel only (got " +
                         std::to_string(model.num_delays()) + ")");
  }
  if (x0.size() != nx) throw DimensionError("x0 has the wrong dimension");
  if (!pre_history.empty()) {
    if (static_cast<int>(pre_history.size()) != model.max_delay()) {
      throw DimensionError("pre-initial history needs exactly " +
                           std::to_string(model.max_delay()) + " states");
    }
    for (const auto& x : pre_history) {
      if (x.size() != nx) throw DimensionError("pre-initial state has the wrong dimension");
    }
  }
  if (cost.Q().rows() != nx || cost.R().rows() != model.input_dim()) {
    throw DimensionError("Q/R do not match the model dimensions");
  }
  if (std::abs(cost.d_sq() - model.d_sq()) > 1e-12 * std::max(1.0, model.d_sq())) {
    throw ParameterError("cost d_sq differs from the model disturbance bound");
  }
  check_delta(cost.delta(), etm.mu());
  if (steps < 1) throw ParameterError("steps must be >= 1");
  if (disturbance.dim() != model.disturbance_dim()) {
    throw DimensionError("disturbance signal dimension differs from n_w");
  }
  if (scheduling.num_vertices() != model.num_vertices()) {
    throw DimensionError("scheduling signal vertex count differs from the model");
  }
  const auto budget = validate_disturbance_budget(disturbance, model, steps);
  if (!budget.within_bound) {
    std::ostringstream msg;
    msg << "disturbance exceeds the bound: sup |w|^2 = " << budget.worst_sq_norm
        << " > d^2 = " << model.d_sq();
    throw ParameterError(msg.str());
  }
}

DelayBuffer Scenario::initial_buffer() const {
  if (pre_history.empty()) return DelayBuffer::Replicate(x0, model.max_delay());
  std::vector<Eigen::VectorXd> h{x0};
  h.insert(h.end(), pre_history.begin(), pre_history.end());
  return DelayBuffer(std::move(h));
}

SynthesisSettings Scenario::synthesis() const {
  SynthesisSettings s;
  s.theta = etm.theta();
  s.mu = etm.mu();
  s.form = invariance_form;
  return s;
}

TriggerSolution solve_at_trigger(const Scenario& scenario, const DelayBuffer& buffer,
                                 double beta, const std::optional<Eigen::VectorXd>& warm_start) {
  if (!(beta >= 0.0)) throw ParameterError("solve_at_trigger needs beta >= 0");
  const LmiProblem problem =
      assemble_problem(scenario.model, scenario.cost, scenario.synthesis(), buffer, beta);
  const sdp::SdpSolution sol = sdp::solve(problem.program, scenario.solver, warm_start);
  TriggerSolution out;
  out.status = sol.status;
  out.diagnostics = sol.diagnostics;
  if (sol.status != sdp::SdpStatus::kOptimal) return out;
  out.values = sol.values;
  out.vars = problem.layout.unpack(sol.values);
  out.gamma = out.vars.gamma;
  try {
    out.gains = recover_controller(out.vars);
  } catch (const ParameterError& e) {
    out.status = sdp::SdpStatus::kNumericalFailure;
    out.diagnostics.message = std::string("gain recovery failed: ") + e.what();
    return out;
  }
  out.min_block_eigenvalue = sdp::check_feasibility(problem.program, sol.values, 0.0).worst;
  return out;
}

sdp::FeasibilityReport audit_recursive_feasibility(const Scenario& scenario,
                                                   const DelayBuffer& buffer, double beta,
                                                   const Eigen::VectorXd& previous,
                                                   double tolerance) {
  const LmiProblem problem = assemble_problem(scenario.model, scenario.cost,
                                              scenario.synthesis(), buffer, std::max(beta, 0.0));
  return sdp::check_feasibility(problem.program, previous, tolerance);
}

Trajectory run(const Scenario& scenario) {
  scenario.validate();
  const PolytopicModel& model = scenario.model;
  const EtmConfig& cfg = scenario.etm;
  const int nu = model.input_dim();

  Trajectory tr;
  tr.mode = scenario.mode;
  tr.Q = scenario.cost.Q();
  tr.R = scenario.cost.R();
  tr.varphi = scenario.cost.varphi();
  tr.theta = cfg.theta();
  tr.u_sat = model.u_sat();

  DelayBuffer buffer = scenario.initial_buffer();
  for (int i = 0; i < buffer.size(); ++i) tr.initial_history.push_back(buffer.lag(i));

  EtmState etm;
  etm.beta = cfg.beta0();
  Eigen::VectorXd u_held = Eigen::VectorXd::Zero(nu);
  std::optional<Eigen::VectorXd> previous;

  for (int k = 0; k < scenario.steps; ++k) {
    const Eigen::VectorXd x = buffer.current();
    StepRecord rec;
    rec.k = k;
    rec.x = x;
    rec.beta = etm.beta;

    bool fire = true;
    if (k > 0) {
      rec.gap = trigger_gap(etm, cfg.theta(), x);
      switch (scenario.mode) {
        case TriggerMode::kAdaptive:
          fire = should_trigger(etm, cfg, x);
          break;
        case TriggerMode::kStatic:
          fire = static_should_trigger(etm, cfg, x);
          break;
        case TriggerMode::kPeriodic:
          fire = true;
          break;
      }
    }

    if (fire) {
      rec.triggered = true;
      TriggerRecord trig;
      trig.k = k;
      if (previous && scenario.audit_feasibility) {
        const auto report = audit_recursive_feasibility(scenario, buffer, etm.beta, *previous);
        trig.audited = true;
        trig.audit_passed = report.feasible;
        trig.audit_min_eigenvalue = report.worst;
      }
      const std::optional<Eigen::VectorXd> warm =
          scenario.warm_start ? previous : std::optional<Eigen::VectorXd>{};
      const TriggerSolution sol = solve_at_trigger(scenario, buffer, std::max(etm.beta, 0.0), warm);
      if (sol.status == sdp::SdpStatus::kOptimal) {
        trig.gamma = sol.gamma;
        trig.values = sol.values;
        trig.vars = sol.vars;
        trig.gains = sol.gains;
        trig.diagnostics = sol.diagnostics;
        trig.min_block_eigenvalue = sol.min_block_eigenvalue;
        tr.triggers.push_back(std::move(trig));
        etm.phi = sol.gains.Phi;
        etm.last_trigger_state = x;
        etm.last_trigger_time = k;
        u_held = sol.gains.F * x;
        previous = sol.values;
      } else {
        const std::string msg = "solve " + sdp::to_string(sol.status) + ": " +
                                sol.diagnostics.message;
        if (tr.triggers.empty()) throw SolverError(msg, k);
        rec.solve_failed = true;
        tr.certified = false;
        tr.warnings.push_back("step " + std::to_string(k) + ": " + msg +
                              "; holding the previous input");
      }
    }
    rec.active = static_cast<int>(tr.triggers.size()) - 1;

    const auto& gains = tr.triggers.back().gains;
    const double sat_ratio = (gains.H * x).cwiseAbs().maxCoeff() / model.u_sat();
    tr.max_saturation_ratio = std::max(tr.max_saturation_ratio, sat_ratio);
    if (sat_ratio > 1.0 + 1e-6) {
      tr.warnings.push_back("step " + std::to_string(k) +
                            ": auxiliary gain leaves the saturation region (ratio " +
                            std::to_string(sat_ratio) + ")");
    }

    const double beta_next = update_beta(etm, cfg, x);
    rec.u = u_held;
    rec.u_sat = saturate(u_held, model.u_sat());
    rec.omega = scenario.disturbance.at(k);
    const SchedulingWeights alpha = scenario.scheduling.at(k);
    rec.alpha = alpha.values();
    buffer = step(model, buffer, u_held, rec.omega, alpha);
    if (beta_next < -1e-12) {
      tr.warnings.push_back("step " + std::to_string(k) + ": beta became negative (" +
                            std::to_string(beta_next) + ")");
    }
    etm.beta = beta_next;
    tr.steps.push_back(std::move(rec));
  }
  tr.final_state = buffer.current();
  tr.final_beta = etm.beta;
  return tr;
}

const Eigen::VectorXd& Trajectory::state_at(int k) const {
  if (k < 0) {
    if (-k > max_delay()) throw DimensionError("state index before the recorded history");
    return initial_history[-k];
  }
  if (k < num_steps()) return steps[k].x;
  if (k == num_steps()) return final_state;
  throw DimensionError("state index after the end of the run");
}

double Trajectory::beta_at(int k) const {
  if (k >= 0 && k < num_steps()) return steps[k].beta;
  if (k == num_steps()) return final_beta;
  throw DimensionError("beta index out of range");
}

DelayBuffer Trajectory::buffer_at(int k) const {
  std::vector<Eigen::VectorXd> h;
  for (int i = 0; i <= max_delay(); ++i) h.push_back(state_at(k - i));
  return DelayBuffer(std::move(h));
}

std::vector<int> Trajectory::trigger_instants() const {
  std::vector<int> out;
  for (const auto& s : steps) {
    if (s.triggered) out.push_back(s.k);
  }
  return out;
}

}  // namespace etmpc
