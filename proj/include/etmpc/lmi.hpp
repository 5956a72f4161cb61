#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "etmpc/model.hpp"
#include "etmpc/sdp.hpp"

namespace etmpc {

/// Decision variables of the synthesis problem. Y1..Y3 are symmetric.
struct DecisionVars {
  double gamma = 0.0;
  Eigen::MatrixXd W;
  Eigen::MatrixXd W_tau;
  Eigen::MatrixXd Y1;
  Eigen::MatrixXd Y2;
  Eigen::MatrixXd Y3;
  Eigen::MatrixXd Y4;  // n_u × n_x
  Eigen::MatrixXd Y5;  // n_u × n_x
};

/**
 * Scalar variable numbering: γ, vec W, vec W_τ, vec Y4, vec Y5 (column-major),
 * then the upper triangles of Y1, Y2, Y3 (column by column). Total
 * 1 + 2n_x² + 2n_u·n_x + 3·n_x(n_x+1)/2.
 */
class VariableLayout {
 public:
  VariableLayout(int n_x, int n_u);

  int n_x() const { return n_x_; }
  int n_u() const { return n_u_; }
  int size() const { return size_; }

  int gamma() const { return 0; }
  int W(int r, int c) const { return w_ + r + c * n_x_; }
  int W_tau(int r, int c) const { return wt_ + r + c * n_x_; }
  int Y4(int r, int c) const { return y4_ + r + c * n_u_; }
  int Y5(int r, int c) const { return y5_ + r + c * n_u_; }
  /// Symmetric: Y1(r, c) == Y1(c, r).
  int Y1(int r, int c) const { return sym_index(y1_, r, c); }
  int Y2(int r, int c) const { return sym_index(y2_, r, c); }
  int Y3(int r, int c) const { return sym_index(y3_, r, c); }

  Eigen::VectorXd pack(const DecisionVars& v) const;
  /// Y1..Y3 are rebuilt symmetric from their upper triangles.
  DecisionVars unpack(const Eigen::VectorXd& y) const;
  /// Human-readable name, e.g. "W[1,2]" (1-based).
  std::string name(int var) const;

 private:
  int sym_index(int base, int r, int c) const;

  int n_x_;
  int n_u_;
  int w_, wt_, y4_, y5_, y1_, y2_, y3_;
  int size_;
};

/// Stage cost weights and invariance parameters. Checks Q, R ≻ 0, φ > 0,
/// 0 < δ < 1 and d² > 0; the sharper δ < 1 − μ is checked where μ is known.
class CostConfig {
 public:
  CostConfig(Eigen::MatrixXd Q, Eigen::MatrixXd R, double varphi, double delta, double d_sq);

  const Eigen::MatrixXd& Q() const { return Q_; }
  const Eigen::MatrixXd& R() const { return R_; }
  double varphi() const { return varphi_; }
  double delta() const { return delta_; }
  double d_sq() const { return d_sq_; }

 private:
  Eigen::MatrixXd Q_;
  Eigen::MatrixXd R_;
  double varphi_;
  double delta_;
  double d_sq_;
};

/// Throws ParameterError unless 0 < δ < 1 − μ.
void check_delta(double delta, double mu);

struct SaturationVertex {
  Eigen::MatrixXd E;
  Eigen::MatrixXd E_minus;
};

/// All 2^{n_u} diagonal 0/1 selectors in binary counting order (first
/// input is the most significant bit). n_u ≤ 12; a warning is printed to
/// std::clog above 8.
std::vector<SaturationVertex> enumerate_saturation_vertices(int n_u);

/**
 * Which invariance block to assemble. kContractive scales the first two
 * diagonal blocks of the leading part by (1 − δ), which is what the
 * contraction V⁺ ≤ (1 − δ)V + δγ‖ω‖²/d² needs. kPublished omits the factor.
 */
enum class InvarianceForm { kContractive, kPublished };

std::string to_string(InvarianceForm form);
InvarianceForm parse_invariance_form(const std::string& name);

/// Symmetric square root of a positive semidefinite matrix.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& M);

/// One block per (vertex, saturation vertex), each of side 7n_x + n_u + n_w.
/// Requires a single delay channel.
std::vector<sdp::AffineBlock> assemble_lmi_cost_decrease(const VariableLayout& layout,
                                                         const PolytopicModel& model,
                                                         const CostConfig& cost, double theta);

/// Ellipsoid membership of the current augmented state: one block of side
/// 1 + n_x(τ₁ + 1) + 1. The buffer depth fixes τ₁.
sdp::AffineBlock assemble_lmi_state_bound(const VariableLayout& layout,
                                          const DelayBuffer& buffer, double beta);

/// One (1 + n_x)-block per input channel bounding the auxiliary gain row.
std::vector<sdp::AffineBlock> assemble_lmi_saturation_rows(const VariableLayout& layout,
                                                           double u_sat);

/// One block per (vertex, saturation vertex), each of side 6n_x + n_w.
/// Throws ParameterError unless 0 < δ < 1 − μ.
std::vector<sdp::AffineBlock> assemble_lmi_invariance(
    const VariableLayout& layout, const PolytopicModel& model, const CostConfig& cost,
    double theta, double mu, InvarianceForm form = InvarianceForm::kContractive);

/// Y1, Y2, Y3 ⪰ eps·I.
std::vector<sdp::AffineBlock> assemble_positivity(const VariableLayout& layout,
                                                  double eps = 1e-9);

struct SynthesisSettings {
  double theta = 0.1;
  double mu = 0.9;
  InvarianceForm form = InvarianceForm::kContractive;
  double positivity_margin = 1e-9;
};

/// Full problem "minimize γ" at one trigger instant. Block order: cost
/// decrease, state bound, saturation rows, invariance, positivity.
struct LmiProblem {
  VariableLayout layout;
  sdp::ConicProgram program;
};

LmiProblem assemble_problem(const PolytopicModel& model, const CostConfig& cost,
                            const SynthesisSettings& settings, const DelayBuffer& buffer,
                            double beta);

struct ControllerGains {
  Eigen::MatrixXd F;
  Eigen::MatrixXd H;
  Eigen::MatrixXd Phi;
  Eigen::MatrixXd P;
  Eigen::MatrixXd P_tau;
  double W_condition = 0.0;
};

/// F = Y4W⁻¹, H = Y5W⁻¹, Φ = γY3⁻¹, P = γY1⁻¹, P_τ = γY2⁻¹. Throws
/// ParameterError if cond(W) > 1e12 or Y1..Y3 are not positive definite.
ControllerGains recover_controller(const DecisionVars& vars);

}  // namespace etmpc
