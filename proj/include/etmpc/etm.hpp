#pragma once

#include <string>

#include <Eigen/Dense>

namespace etmpc {

/// Parameters of the adaptive event-triggering rule. Construction enforces
/// 0 < μ < 1, 0 < θ < 1, ε ≥ 1/μ and β₀ ≥ 0.
class EtmConfig {
 public:
  EtmConfig(double mu, double theta, double epsilon, double beta0);

  double mu() const { return mu_; }
  double theta() const { return theta_; }
  double epsilon() const { return epsilon_; }
  double beta0() const { return beta0_; }

 private:
  double mu_;
  double theta_;
  double epsilon_;
  double beta0_;
};

enum class TriggerMode { kAdaptive, kStatic, kPeriodic };

std::string to_string(TriggerMode mode);
TriggerMode parse_trigger_mode(const std::string& name);

/// Mutable ETM memory. `phi` is the triggering matrix of the current
/// inter-event interval.
struct EtmState {
  double beta = 0.0;
  Eigen::VectorXd last_trigger_state;
  int last_trigger_time = 0;
  Eigen::MatrixXd phi;
};

/// ‖v‖²_M = vᵀMv.
double weighted_sq_norm(const Eigen::VectorXd& v, const Eigen::MatrixXd& M);

/// e_k = x_{k_t} − x_k.
Eigen::VectorXd error_vector(const EtmState& state, const Eigen::VectorXd& x);

/// ‖e_k‖²_Φ − θ‖x_k‖²_Φ, the quantity both triggering rules compare.
double trigger_gap(const EtmState& state, double theta, const Eigen::VectorXd& x);

/// Adaptive rule: ε(‖e‖²_Φ − θ‖x‖²_Φ) > β. Ties do not trigger.
/// Throws ParameterError when Φ is not symmetric positive definite.
bool should_trigger(const EtmState& state, const EtmConfig& cfg, const Eigen::VectorXd& x);

/// β_{k+1} = μβ_k − (‖e_k‖²_Φ − θ‖x_k‖²_Φ). May be negative if a mandated
/// trigger was skipped; the caller decides how to report that.
double update_beta(const EtmState& state, const EtmConfig& cfg, const Eigen::VectorXd& x);

/// Static baseline: ‖e‖²_Φ − θ‖x‖²_Φ > 0.
bool static_should_trigger(const EtmState& state, const EtmConfig& cfg,
                           const Eigen::VectorXd& x);

/// Throws ParameterError unless `phi` is symmetric with λ_min > 0.
void require_positive_definite(const Eigen::MatrixXd& phi, const std::string& what);

}  // namespace etmpc
