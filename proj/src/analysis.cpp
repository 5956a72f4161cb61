#include "etmpc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "etmpc/errors.hpp"
#include "etmpc/etm.hpp"

namespace etmpc {

VFunctionValue lyapunov_value(const DelayBuffer& buffer, const Eigen::MatrixXd& P,
                              const Eigen::MatrixXd& P_tau, double beta) {
  require_positive_definite(P, "P");
  require_positive_definite(P_tau, "P_tau");
  if (P.rows() != buffer.state_dim() || P_tau.rows() != buffer.state_dim()) {
    throw DimensionError("lyapunov_value: matrix size differs from the state size");
  }
  VFunctionValue v;
  v.quadratic = weighted_sq_norm(buffer.current(), P);
  for (int i = 1; i < buffer.size(); ++i) v.quadratic += weighted_sq_norm(buffer.lag(i), P_tau);
  v.beta = beta;
  v.total = v.quadratic + beta;
  return v;
}

VFunctionValue lyapunov_value_at(const Trajectory& tr, int k) {
  const int idx = std::min(k, tr.num_steps() - 1);
  const auto& g = tr.active_at(idx).gains;
  return lyapunov_value(tr.buffer_at(k), g.P, g.P_tau, tr.beta_at(k));
}

DecreaseReport check_decrease_condition(const Trajectory& tr, int begin, int end) {
  if (end < 0) end = tr.num_steps();
  if (begin < 0 || begin > end || end > tr.num_steps()) {
    throw DimensionError("decrease window out of range");
  }
  DecreaseReport rep;
  for (int k = begin; k < end; ++k) {
    const auto& s = tr.steps[k];
    const auto& g = tr.active_at(k).gains;
    const double v0 = lyapunov_value(tr.buffer_at(k), g.P, g.P_tau, tr.beta_at(k)).total;
    const double v1 = lyapunov_value(tr.buffer_at(k + 1), g.P, g.P_tau, tr.beta_at(k + 1)).total;
    const double r = v1 - v0 + weighted_sq_norm(s.x, tr.Q) + weighted_sq_norm(s.u_sat, tr.R) -
                     tr.varphi * s.omega.squaredNorm();
    const double tol = 1e-6 * (1.0 + v0);
    rep.residuals.push_back(r);
    rep.tolerances.push_back(tol);
    rep.max_relative = std::max(rep.max_relative, r / (1.0 + v0));
    if (r > tol) ++rep.violations;
  }
  rep.passed = rep.violations == 0;
  return rep;
}

InvarianceReport check_invariant_set(const Trajectory& tr, double rel_tol) {
  InvarianceReport rep;
  for (int k = 0; k < tr.num_steps(); ++k) {
    const double v = lyapunov_value_at(tr, k).total;
    const double gamma = tr.active_at(k).gamma;
    rep.values.push_back(v);
    rep.bounds.push_back(gamma);
    rep.max_ratio = std::max(rep.max_ratio, v / gamma);
    if (v > gamma * (1.0 + rel_tol)) ++rep.violations;
  }
  rep.passed = rep.violations == 0;
  return rep;
}

std::optional<int> steady_state_time(const std::vector<Eigen::VectorXd>& states, double zeta) {
  if (!(zeta > 0.0)) throw ParameterError("zeta must be > 0");
  std::optional<int> ks;
  for (int k = static_cast<int>(states.size()) - 1; k >= 0; --k) {
    const double m = states[k].size() == 0 ? 0.0 : states[k].cwiseAbs().maxCoeff();
    if (m > zeta) break;
    ks = k;
  }
  return ks;
}

std::optional<int> steady_state_time(const Trajectory& tr, double zeta) {
  std::vector<Eigen::VectorXd> xs;
  xs.reserve(tr.steps.size());
  for (const auto& s : tr.steps) xs.push_back(s.x);
  return steady_state_time(xs, zeta);
}

TriggerStatistics trigger_statistics(const std::vector<int>& instants, int steps) {
  if (instants.empty()) throw ParameterError("trigger statistics need at least one trigger");
  if (steps < 1) throw ParameterError("trigger statistics need steps >= 1");
  TriggerStatistics st;
  st.triggers = static_cast<int>(instants.size());
  st.steps = steps;
  st.ratio = static_cast<double>(st.triggers) / steps;
  st.steps_per_trigger = static_cast<double>(steps) / st.triggers;
  double sum = 0.0;
  for (std::size_t i = 1; i < instants.size(); ++i) {
    const int d = instants[i] - instants[i - 1];
    if (d <= 0) throw ParameterError("trigger instants must be strictly increasing");
    ++st.histogram[d];
    sum += d;
  }
  st.average_interval = instants.size() < 2 ? std::numeric_limits<double>::quiet_NaN()
                                            : sum / static_cast<double>(instants.size() - 1);
  return st;
}

TriggerStatistics trigger_statistics(const Trajectory& tr) {
  return trigger_statistics(tr.trigger_instants(), tr.num_steps());
}

std::vector<GainNorm> gain_norm_series(const Trajectory& tr) {
  std::vector<GainNorm> out;
  for (const auto& t : tr.triggers) out.push_back({t.k, t.gains.F.norm(), t.gains.Phi.norm()});
  return out;
}

double trigger_rule_agreement(const Trajectory& tr, double epsilon) {
  int same = 0;
  int total = 0;
  for (int k = 1; k < tr.num_steps(); ++k) {
    const auto& s = tr.steps[k];
    const bool adaptive = epsilon * s.gap > s.beta;
    const bool fixed = s.gap > 0.0;
    same += adaptive == fixed;
    ++total;
  }
  return total == 0 ? 1.0 : static_cast<double>(same) / total;
}

RunMetrics compute_metrics(const Trajectory& tr, double zeta, double sample_time) {
  RunMetrics m;
  m.stats = trigger_statistics(tr);
  m.settling_step = steady_state_time(tr, zeta);
  m.settling_time = m.settling_step ? *m.settling_step * sample_time : 0.0;
  const auto dec = check_decrease_condition(tr);
  m.max_decrease_relative = dec.max_relative;
  m.decrease_violations = dec.violations;
  const auto inv = check_invariant_set(tr);
  m.invariance_violations = inv.violations;
  m.max_invariance_ratio = inv.max_ratio;
  m.min_beta = tr.final_beta;
  for (const auto& s : tr.steps) {
    m.min_beta = std::min(m.min_beta, s.beta);
    m.failed_solves += s.solve_failed;
  }
  m.min_block_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& t : tr.triggers) {
    if (t.audited) {
      ++m.audits;
      m.audits_passed += t.audit_passed;
    }
    m.min_block_eigenvalue = std::min(m.min_block_eigenvalue, t.min_block_eigenvalue);
    m.max_relative_gap = std::max(m.max_relative_gap, t.diagnostics.relative_gap);
  }
  m.max_saturation_ratio = tr.max_saturation_ratio;
  m.first_gamma = tr.triggers.front().gamma;
  m.last_gamma = tr.triggers.back().gamma;
  m.certified = tr.certified && dec.passed && inv.passed && m.audits == m.audits_passed;
  return m;
}

}  // namespace etmpc
