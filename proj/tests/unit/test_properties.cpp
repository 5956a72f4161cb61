// Matrix facts the synthesis relies on, checked on random data.

#include <gtest/gtest.h>

#include "etmpc/lmi.hpp"
#include "etmpc/model.hpp"
#include "support/generators.hpp"

namespace etmpc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using testing::Gen;
using testing::MinEig;

TEST(SchurComplement, BlockIsPsdIffComplementIs) {
  Gen g(11);
  int agree = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const int p = g.Int(1, 4), q = g.Int(1, 4);
    const MatrixXd C = g.Spd(q);
    const MatrixXd B = g.Matrix(p, q);
    // A near the boundary so both outcomes occur.
    const MatrixXd A = B * C.inverse() * B.transpose() + g.Symmetric(p, 0.3);
    MatrixXd M(p + q, p + q);
    M << A, B, B.transpose(), C;
    const double block = MinEig(M);
    const double comp = MinEig(A - B * C.inverse() * B.transpose());
    if (std::abs(block) < 1e-9 || std::abs(comp) < 1e-9) {
      ++agree;
      continue;
    }
    agree += (block > 0) == (comp > 0);
  }
  EXPECT_EQ(agree, n);
}

TEST(ScalingInequality, HoldsForRandomData) {
  // W + Wᵀ − γP⁻¹ ⪯ γ⁻¹WᵀPW, i.e. (W − γP⁻¹)ᵀ P (W − γP⁻¹)/γ ⪰ 0.
  Gen g(12);
  for (int i = 0; i < 1000; ++i) {
    const int n = g.Int(1, 5);
    const MatrixXd P = g.Spd(n, 0.05, 5);
    const MatrixXd W = g.Matrix(n, n, 2.0);
    const double gamma = g.Uniform(0.01, 10);
    const MatrixXd lhs = W + W.transpose() - gamma * P.inverse();
    const MatrixXd rhs = W.transpose() * P * W / gamma;
    EXPECT_GE(MinEig(rhs - lhs), -1e-9 * (1 + rhs.norm())) << "trial " << i;
  }
}

/// Weights λ_s ≥ 0, Σλ_s = 1 with Σ λ_s (E_s u + E_s⁻ v) = σ(u), built one
/// coordinate at a time, or empty if a coordinate of σ(u) lies outside
/// [min(u_i, v_i), max(u_i, v_i)].
std::vector<double> HullWeights(const VectorXd& u, const VectorXd& v, double u_sat) {
  const VectorXd s = saturate(u, u_sat);
  const int m = static_cast<int>(u.size());
  VectorXd t(m);  // weight on u_i
  for (int i = 0; i < m; ++i) {
    if (std::abs(u(i) - v(i)) < 1e-15) {
      t(i) = 1.0;
      if (std::abs(s(i) - u(i)) > 1e-12) return {};
      continue;
    }
    t(i) = (s(i) - v(i)) / (u(i) - v(i));
    if (t(i) < -1e-12 || t(i) > 1 + 1e-12) return {};
  }
  std::vector<double> lambda;
  for (int mask = 0; mask < (1 << m); ++mask) {
    double w = 1.0;
    for (int i = 0; i < m; ++i) {
      const bool pick_u = mask & (1 << (m - 1 - i));
      w *= pick_u ? t(i) : 1 - t(i);
    }
    lambda.push_back(w);
  }
  return lambda;
}

TEST(SaturationHull, SaturatedInputLiesInTheVertexHull) {
  Gen g(13);
  for (int i = 0; i < 500; ++i) {
    const int m = g.Int(1, 3);
    const double u_sat = g.Uniform(0.1, 2);
    const VectorXd u = g.Vector(m, 5.0);
    const VectorXd v = g.Vector(m, u_sat);  // |v_i| ≤ u_sat
    const auto lambda = HullWeights(u, v, u_sat);
    ASSERT_EQ(static_cast<int>(lambda.size()), 1 << m) << "trial " << i;
    const auto verts = enumerate_saturation_vertices(m);
    VectorXd combo = VectorXd::Zero(m);
    double total = 0;
    for (std::size_t s = 0; s < verts.size(); ++s) {
      EXPECT_GE(lambda[s], -1e-12);
      total += lambda[s];
      combo += lambda[s] * (verts[s].E * u + verts[s].E_minus * v);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_LE((combo - saturate(u, u_sat)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(SaturationHull, FailsWhenTheAuxiliaryInputLeavesTheBox) {
  const VectorXd u = VectorXd::Constant(1, 3.0);
  const VectorXd v = VectorXd::Constant(1, 2.0);
  EXPECT_TRUE(HullWeights(u, v, 1.0).empty());
}

TEST(SymmetricSqrt, SquaresBack) {
  Gen g(14);
  for (int i = 0; i < 200; ++i) {
    const int n = g.Int(1, 6);
    const MatrixXd Q = g.Spd(n, 1e-3, 10);
    const MatrixXd S = symmetric_sqrt(Q);
    EXPECT_LE((S - S.transpose()).norm(), 1e-12);
    EXPECT_LE((S * S - Q).norm(), 1e-10 * (1 + Q.norm()));
    EXPECT_GE(MinEig(S), 0.0);
  }
}

}  // namespace
}  // namespace etmpc
