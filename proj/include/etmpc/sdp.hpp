#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace etmpc::sdp {

/// One nonzero of a symmetric coefficient matrix. Both (r, c) and (c, r)
/// are stored for off-diagonal entries.
struct SparseEntry {
  int row;
  int col;
  double value;
};

struct VarCoefficient {
  int var;
  std::vector<SparseEntry> entries;
};

/**
 * Symmetric affine matrix function F(y) = F₀ + Σᵢ yᵢ Fᵢ required to be
 * positive semidefinite. Only variables with a nonzero Fᵢ are listed,
 * sorted by index.
 */
struct AffineBlock {
  std::string tag;
  int size = 0;
  Eigen::MatrixXd constant;
  std::vector<VarCoefficient> coefficients;

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& y) const;
};

/// minimize cᵀy subject to F_j(y) ⪰ 0 for every block j.
struct ConicProgram {
  int num_vars = 0;
  Eigen::VectorXd objective;
  std::vector<AffineBlock> blocks;

  /// Throws DimensionError on malformed data (asymmetric coefficients,
  /// out-of-range indices, unsorted variables).
  void validate() const;
};

struct SdpOptions {
  double primal_tol = 1e-7;
  double dual_tol = 1e-7;
  double gap_tol = 1e-6;
  int max_iterations = 200;
  /// Upper bound on the fraction of the step to the boundary of the cone;
  /// short steps use a smaller fraction (down to 0.9).
  double step_fraction = 0.98;
  bool verbose = false;
};

enum class SdpStatus { kOptimal, kInfeasible, kMaxIterations, kNumericalFailure };

std::string to_string(SdpStatus status);

struct SdpDiagnostics {
  int iterations = 0;
  double primal_residual = 0.0;  // relative, of the equality side
  double dual_residual = 0.0;    // relative, ‖F(y) − S‖
  double relative_gap = 0.0;
  double min_block_eigenvalue = 0.0;  // min over blocks of λ_min(F_j(y))
  double infeasibility_measure = 0.0;
  bool warm_started = false;
  std::string message;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::kNumericalFailure;
  Eigen::VectorXd values;
  double objective = 0.0;
  SdpDiagnostics diagnostics;
};

/**
 * Dense primal-dual path-following interior-point method with
 * Nesterov–Todd scaling and Mehrotra predictor-corrector steps.
 *
 * The LMI program is treated as the dual of a standard-form SDP; the start
 * may be infeasible. A warm start is used only when F(warm) is strictly
 * positive definite in every block, otherwise the solver cold-starts.
 *
 * Reentrant and deterministic: identical inputs give bit-identical output.
 */
SdpSolution solve(const ConicProgram& program, const SdpOptions& options = {},
                  const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

struct FeasibilityReport {
  std::vector<double> min_eigenvalues;
  bool feasible = true;
  double worst = 0.0;
  int worst_block = -1;
};

/// λ_min of every block at `values`; feasible iff all ≥ −tolerance.
FeasibilityReport check_feasibility(const ConicProgram& program,
                                    const Eigen::VectorXd& values, double tolerance);

/**
 * Sparse text exchange format. Comment lines start with '#'. Header lines:
 *
 *   vars <m>
 *   objective <var-id> <value>       (var-id 1-based, one line per nonzero)
 *   block <block-id> <size> <tag>    (block-id 1-based)
 *
 * followed by one line per affine coefficient of the upper triangle:
 *
 *   <block-id> <row> <col> <var-id> <value>
 *
 * with 1-based row/col and var-id 0 for the constant term F₀.
 */
void write_sparse_text(std::ostream& out, const ConicProgram& program);
ConicProgram read_sparse_text(std::istream& in);

}  // namespace etmpc::sdp
