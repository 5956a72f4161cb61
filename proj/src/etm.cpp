#include "etmpc/etm.hpp"

#include <cmath>

#include "etmpc/errors.hpp"

namespace etmpc {

EtmConfig::EtmConfig(double mu, double theta, double epsilon, double beta0)
    : mu_(mu), theta_(theta), epsilon_(epsilon), beta0_(beta0) {
  if (!(mu > 0.0 && mu < 1.0)) throw ParameterError("mu must satisfy 0 < mu < 1");
  if (!(theta > 0.0 && theta < 1.0)) {
    throw ParameterError("theta must satisfy 0 < theta < 1");
  }
  if (!(epsilon >= 1.0 / mu)) {
    throw ParameterError("epsilon must satisfy epsilon >= 1/mu (got " +
                         std::to_string(epsilon) + " < " + std::to_string(1.0 / mu) + ")");
  }
  if (!(beta0 >= 0.0)) throw ParameterError("beta0 must be >= 0");
}

std::string to_string(TriggerMode mode) {
  switch (mode) {
    case TriggerMode::kAdaptive:
      return "adaptive";
    case TriggerMode::kStatic:
      return "static";
    case TriggerMode::kPeriodic:
      return "periodic";
  }
  return "unknown";
}

TriggerMode parse_trigger_mode(const std::string& name) {
  if (name == "adaptive") return TriggerMode::kAdaptive;
  if (name == "static") return TriggerMode::kStatic;
  if (name == "periodic") return TriggerMode::kPeriodic;
  throw ParameterError("unknown trigger mode '" + name +
                       "' (expected adaptive, static or periodic)");
}

double weighted_sq_norm(const Eigen::VectorXd& v, const Eigen::MatrixXd& M) {
  if (M.rows() != v.size() || M.cols() != v.size()) {
    throw DimensionError("weighted norm: matrix/vector size mismatch");
  }
  return v.dot(M * v);
}

Eigen::VectorXd error_vector(const EtmState& state, const Eigen::VectorXd& x) {
  if (state.last_trigger_state.size() != x.size()) {
    throw DimensionError("error vector: state size mismatch");
  }
  return state.last_trigger_state - x;
}

void require_positive_definite(const Eigen::MatrixXd& phi, const std::string& what) {
  if (phi.rows() == 0 || phi.rows() != phi.cols()) {
    throw ParameterError(what + " is not a square matrix");
  }
  const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
  if ((phi - phi.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ParameterError(what + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(phi, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw ParameterError(what + " is not positive definite");
  }
}

double trigger_gap(const EtmState& state, double theta, const Eigen::VectorXd& x) {
  const Eigen::VectorXd e = error_vector(state, x);
  return weighted_sq_norm(e, state.phi) - theta * weighted_sq_norm(x, state.phi);
}

bool should_trigger(const EtmState& state, const EtmConfig& cfg, const Eigen::VectorXd& x) {
  require_positive_definite(state.phi, "triggering matrix Phi");
  return cfg.epsilon() * trigger_gap(state, cfg.theta(), x) > state.beta;
}

double update_beta(const EtmState& state, const EtmConfig& cfg, const Eigen::VectorXd& x) {
  require_positive_definite(state.phi, "triggering matrix Phi");
  return cfg.mu() * state.beta - trigger_gap(state, cfg.theta(), x);
}

bool static_should_trigger(const EtmState& state, const EtmConfig& cfg,
                           const Eigen::VectorXd& x) {
  require_positive_definite(state.phi, "triggering matrix Phi");
  return trigger_gap(state, cfg.theta(), x) > 0.0;
}

}  // namespace etmpc
