#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "etmpc/sdp.hpp"

namespace etmpc::testing {

/// Block F0 + Σ y_i F_i from dense symmetric matrices (one per variable).
inline sdp::AffineBlock DenseBlock(const std::string& tag, const Eigen::MatrixXd& F0,
                                   const std::vector<Eigen::MatrixXd>& Fi) {
  sdp::AffineBlock b;
  b.tag = tag;
  b.size = static_cast<int>(F0.rows());
  b.constant = F0;
  for (int v = 0; v < static_cast<int>(Fi.size()); ++v) {
    sdp::VarCoefficient c{v, {}};
    for (int j = 0; j < b.size; ++j) {
      for (int i = 0; i < b.size; ++i) {
        if (Fi[v](i, j) != 0.0) c.entries.push_back({i, j, Fi[v](i, j)});
      }
    }
    if (!c.entries.empty()) b.coefficients.push_back(std::move(c));
  }
  return b;
}

/// minimize γ s.t. [[γ, c], [c, 1]] ⪰ 0, optimum c².
inline sdp::ConicProgram SchurScalar(double c) {
  Eigen::Matrix2d F0, F1;
  F0 << 0, c, c, 1;
  F1 << 1, 0, 0, 0;
  sdp::ConicProgram p;
  p.num_vars = 1;
  p.objective = Eigen::VectorXd::Ones(1);
  p.blocks.push_back(DenseBlock("schur", F0, {F1}));
  return p;
}

/// Bisection on the PSD predicate of a one-variable program over [lo, hi].
inline double BisectScalar(const sdp::ConicProgram& p, double lo, double hi) {
  auto feasible = [&](double g) {
    for (const auto& b : p.blocks) {
      const Eigen::MatrixXd m = b.evaluate(Eigen::VectorXd::Constant(1, g));
      if (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly)
              .eigenvalues()
              .minCoeff() < 0.0) {
        return false;
      }
    }
    return true;
  };
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace etmpc::testing
