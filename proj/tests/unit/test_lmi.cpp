#include <gtest/gtest.h>

#include "etmpc/errors.hpp"
#include "etmpc/lmi.hpp"
#include "support/generators.hpp"

namespace etmpc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using testing::Gen;
using testing::MinEig;

MatrixXd I(int n) { return MatrixXd::Identity(n, n); }

DecisionVars RandomVars(Gen& g, int nx, int nu) {
  DecisionVars v;
  v.gamma = g.Uniform(0.1, 3);
  v.W = g.Matrix(nx, nx);
  v.W_tau = g.Matrix(nx, nx);
  v.Y1 = g.Symmetric(nx);
  v.Y2 = g.Symmetric(nx);
  v.Y3 = g.Symmetric(nx);
  v.Y4 = g.Matrix(nu, nx);
  v.Y5 = g.Matrix(nu, nx);
  return v;
}

DecisionVars UnitVars(int nx, int nu) {
  return {1.0, I(nx), I(nx), I(nx), I(nx), I(nx), MatrixXd::Zero(nu, nx), MatrixXd::Zero(nu, nx)};
}

PolytopicModel RandomModel(Gen& g, int nx, int nu, int nw, int L) {
  std::vector<VertexMatrices> vs;
  for (int v = 0; v < L; ++v) vs.push_back({g.Matrix(nx, nx), {g.Matrix(nx, nx)}, g.Matrix(nx, nu)});
  return PolytopicModel({1}, vs, g.Matrix(nx, nw), 0.5, 0.1);
}

PolytopicModel ZeroModel(int nx, int nu, int nw, int tau = 1) {
  return PolytopicModel({tau},
                        {{MatrixXd::Zero(nx, nx), {MatrixXd::Zero(nx, nx)}, MatrixXd::Zero(nx, nu)}},
                        MatrixXd::Zero(nx, nw), 0.4, std::sqrt(0.0018));
}

// Places blocks by hand from the published block layout.
class Dense {
 public:
  explicit Dense(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    int n = 0;
    for (int s : sizes_) {
      offsets_.push_back(n);
      n += s;
    }
    m_ = MatrixXd::Zero(n, n);
  }
  void Set(int i, int j, const MatrixXd& b) {
    m_.block(offsets_[i], offsets_[j], b.rows(), b.cols()) = b;
    if (i != j) m_.block(offsets_[j], offsets_[i], b.cols(), b.rows()) = b.transpose();
  }
  const MatrixXd& m() const { return m_; }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  MatrixXd m_;
};

MatrixXd ReferenceCost(const DecisionVars& x, const VertexMatrices& vm, const MatrixXd& D,
                       const CostConfig& c, double theta, const SaturationVertex& sv) {
  const int nx = x.W.rows(), nu = x.Y4.rows(), nw = D.cols();
  const MatrixXd N = sv.E * x.Y4 + sv.E_minus * x.Y5;
  const MatrixXd Qh = symmetric_sqrt(c.Q()), Rh = symmetric_sqrt(c.R());
  Dense d({nx, nx, nx, nw, nx, nx, nx, nu, nx});
  d.Set(0, 0, x.W + x.W.transpose() - x.Y1);
  d.Set(1, 1, x.W_tau + x.W_tau.transpose() - x.Y2);
  d.Set(2, 2, x.W + x.W.transpose() - x.Y3);
  d.Set(3, 3, c.varphi() * x.gamma * I(nw));
  d.Set(4, 0, vm.A * x.W + vm.B * N);
  d.Set(4, 1, vm.A_delay[0] * x.W_tau);
  d.Set(4, 2, vm.B * N);
  d.Set(4, 3, x.gamma * D);
  d.Set(5, 0, x.W);
  d.Set(6, 0, Qh * x.W);
  d.Set(7, 0, Rh * N);
  d.Set(7, 2, Rh * N);
  d.Set(8, 0, std::sqrt(theta) * x.W);
  d.Set(4, 4, x.Y1);
  d.Set(5, 5, x.Y2);
  d.Set(6, 6, x.gamma * I(nx));
  d.Set(7, 7, x.gamma * I(nu));
  d.Set(8, 8, x.Y3);
  return d.m();
}

MatrixXd ReferenceInvariance(const DecisionVars& x, const VertexMatrices& vm, const MatrixXd& D,
                             const CostConfig& c, double theta, const SaturationVertex& sv,
                             double f) {
  const int nx = x.W.rows(), nw = D.cols();
  const MatrixXd N = sv.E * x.Y4 + sv.E_minus * x.Y5;
  Dense d({nx, nx, nx, nw, nx, nx, nx});
  d.Set(0, 0, f * (x.W + x.W.transpose() - x.Y1));
  d.Set(1, 1, f * (x.W_tau + x.W_tau.transpose() - x.Y2));
  d.Set(2, 2, x.W + x.W.transpose() - x.Y3);
  d.Set(3, 3, c.delta() / c.d_sq() * I(nw));
  d.Set(4, 0, vm.A * x.W + vm.B * N);
  d.Set(4, 1, vm.A_delay[0] * x.W_tau);
  d.Set(4, 2, vm.B * N);
  d.Set(4, 3, D);
  d.Set(5, 0, x.W);
  d.Set(6, 0, std::sqrt(theta) * x.W);
  d.Set(4, 4, x.Y1);
  d.Set(5, 5, x.Y2);
  d.Set(6, 6, x.Y3);
  return d.m();
}

TEST(SaturationVertices, SmallCounts) {
  const auto one = enumerate_saturation_vertices(1);
  ASSERT_EQ(one.size(), 2u);
  EXPECT_EQ(one[0].E(0, 0), 0.0);
  EXPECT_EQ(one[1].E(0, 0), 1.0);
  const auto two = enumerate_saturation_vertices(2);
  ASSERT_EQ(two.size(), 4u);
  const double expect[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(two[i].E(0, 0), expect[i][0]);
    EXPECT_EQ(two[i].E(1, 1), expect[i][1]);
    EXPECT_EQ(two[i].E + two[i].E_minus, I(2));
  }
  EXPECT_EQ(enumerate_saturation_vertices(5).size(), 32u);
  EXPECT_THROW(enumerate_saturation_vertices(13), ParameterError);
  EXPECT_THROW(enumerate_saturation_vertices(0), ParameterError);
}

TEST(VariableLayoutTest, CountAndRoundTrip) {
  Gen g(1);
  for (int nx = 1; nx <= 5; ++nx) {
    for (int nu = 1; nu <= 3; ++nu) {
      const VariableLayout L(nx, nu);
      EXPECT_EQ(L.size(), 1 + 2 * nx * nx + 2 * nu * nx + 3 * nx * (nx + 1) / 2);
      const DecisionVars v = RandomVars(g, nx, nu);
      const DecisionVars w = L.unpack(L.pack(v));
      EXPECT_EQ(w.W, v.W);
      EXPECT_EQ(w.Y5, v.Y5);
      EXPECT_TRUE(w.Y3.isApprox(v.Y3, 0));
      EXPECT_EQ(L.Y1(0, nx - 1), L.Y1(nx - 1, 0));
    }
  }
  EXPECT_EQ(VariableLayout(2, 1).name(VariableLayout(2, 1).W(0, 1)), "W[1,2]");
}

TEST(CostDecrease, HeaterDimensions) {
  const auto m = ZeroModel(5, 5, 5, 1);
  const PolytopicModel two({1}, {m.vertex(0), m.vertex(0)}, m.D(), 0.4, m.d());
  const CostConfig c(I(5), I(5), 10, 0.09, 0.0018);
  const auto blocks = assemble_lmi_cost_decrease(VariableLayout(5, 5), two, c, 0.1);
  ASSERT_EQ(blocks.size(), 64u);
  for (const auto& b : blocks) EXPECT_EQ(b.size, 45);
}

TEST(CostDecrease, ScalarDimensions) {
  const CostConfig c(I(1), I(1), 10, 0.09, 0.0018);
  const auto blocks = assemble_lmi_cost_decrease(VariableLayout(1, 1), ZeroModel(1, 1, 1), c, 0.1);
  ASSERT_EQ(blocks.size(), 2u);
  for (const auto& b : blocks) EXPECT_EQ(b.size, 9);
}

TEST(CostDecrease, UnitVarsOnZeroDynamicsGiveSymmetricBlocks) {
  const CostConfig c(1e-6 * I(2), 1e-6 * I(1), 10, 0.09, 0.0018);
  const VariableLayout L(2, 1);
  for (const auto& b : assemble_lmi_cost_decrease(L, ZeroModel(2, 1, 2), c, 0.1)) {
    const MatrixXd m = b.evaluate(L.pack(UnitVars(2, 1)));
    EXPECT_EQ(m, m.transpose());
  }
}

TEST(CostDecrease, MatchesHandPlacedReference) {
  Gen g(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int nx = g.Int(1, 3), nu = g.Int(1, 2), nw = g.Int(1, 2), L = g.Int(1, 2);
    const auto m = RandomModel(g, nx, nu, nw, L);
    const CostConfig c(g.Spd(nx), g.Spd(nu), g.Uniform(1, 10), 0.05, 0.01);
    const double theta = g.Uniform(0.01, 0.9);
    const VariableLayout layout(nx, nu);
    const auto blocks = assemble_lmi_cost_decrease(layout, m, c, theta);
    const auto sat = enumerate_saturation_vertices(nu);
    const DecisionVars x = RandomVars(g, nx, nu);
    const VectorXd y = layout.pack(x);
    for (int v = 0; v < L; ++v) {
      for (std::size_t e = 0; e < sat.size(); ++e) {
        const auto& b = blocks[v * sat.size() + e];
        const MatrixXd ref = ReferenceCost(x, m.vertex(v), m.D(), c, theta, sat[e]);
        EXPECT_LT((b.evaluate(y) - ref).cwiseAbs().maxCoeff(), 1e-12) << b.tag;
      }
    }
  }
}

TEST(Invariance, MatchesHandPlacedReferenceBothForms) {
  Gen g(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int nx = g.Int(1, 3), nu = g.Int(1, 2), nw = g.Int(1, 2), L = g.Int(1, 2);
    const auto m = RandomModel(g, nx, nu, nw, L);
    const CostConfig c(g.Spd(nx), g.Spd(nu), 10, 0.07, 0.02);
    const VariableLayout layout(nx, nu);
    const DecisionVars x = RandomVars(g, nx, nu);
    const VectorXd y = layout.pack(x);
    const auto sat = enumerate_saturation_vertices(nu);
    for (auto form : {InvarianceForm::kContractive, InvarianceForm::kPublished}) {
      const double f = form == InvarianceForm::kContractive ? 1 - c.delta() : 1.0;
      const auto blocks = assemble_lmi_invariance(layout, m, c, 0.1, 0.9, form);
      for (int v = 0; v < L; ++v) {
        for (std::size_t e = 0; e < sat.size(); ++e) {
          const MatrixXd ref = ReferenceInvariance(x, m.vertex(v), m.D(), c, 0.1, sat[e], f);
          EXPECT_LT((blocks[v * sat.size() + e].evaluate(y) - ref).cwiseAbs().maxCoeff(), 1e-12);
        }
      }
    }
  }
}

TEST(Invariance, HeaterDimensionsAndDeltaRange) {
  const auto m = ZeroModel(5, 5, 5);
  const PolytopicModel two({1}, {m.vertex(0), m.vertex(0)}, m.D(), 0.4, m.d());
  const CostConfig c(I(5), I(5), 10, 0.09, 0.0018);
  const auto blocks = assemble_lmi_invariance(VariableLayout(5, 5), two, c, 0.1, 0.9);
  ASSERT_EQ(blocks.size(), 64u);
  for (const auto& b : blocks) EXPECT_EQ(b.size, 35);
  EXPECT_NO_THROW(check_delta(0.09, 0.9));
  EXPECT_THROW(check_delta(0.15, 0.9), ParameterError);
  const CostConfig wide(I(5), I(5), 10, 0.15, 0.0018);
  EXPECT_THROW(assemble_lmi_invariance(VariableLayout(5, 5), two, wide, 0.1, 0.9),
               ParameterError);
}

TEST(StateBound, HeaterDimensions) {
  const auto b = assemble_lmi_state_bound(VariableLayout(5, 5),
                                          DelayBuffer::Replicate(VectorXd::Ones(5), 2), 10.0);
  EXPECT_EQ(b.size, 17);
}

TEST(StateBound, OriginFeasibleForAnyPositiveVars) {
  Gen g(4);
  const VariableLayout L(3, 1);
  const auto b = assemble_lmi_state_bound(L, DelayBuffer::Replicate(VectorXd::Zero(3), 1), 0.0);
  for (int i = 0; i < 100; ++i) {
    DecisionVars v = RandomVars(g, 3, 1);
    v.Y1 = g.Spd(3);
    v.Y2 = g.Spd(3);
    EXPECT_GE(MinEig(b.evaluate(L.pack(v))), -1e-12);
  }
}

TEST(StateBound, ScalarBoundaryExample) {
  const VariableLayout L(1, 1);
  const auto b = assemble_lmi_state_bound(
      L, DelayBuffer({VectorXd::Constant(1, 1), VectorXd::Constant(1, 0)}), 0.0);
  const MatrixXd m = b.evaluate(L.pack(UnitVars(1, 1)));
  MatrixXd expect(4, 4);
  expect << 1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_EQ(m, expect);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m);
  EXPECT_NEAR(eig.eigenvalues()(0), 0.0, 1e-14);
  EXPECT_NEAR(eig.eigenvalues()(3), 2.0, 1e-14);
  sdp::ConicProgram p;
  p.num_vars = L.size();
  p.objective = VectorXd::Zero(L.size());
  p.blocks = {b};
  EXPECT_TRUE(sdp::check_feasibility(p, L.pack(UnitVars(1, 1)), 1e-8).feasible);
}

TEST(StateBound, RejectsNegativeBeta) {
  EXPECT_THROW(assemble_lmi_state_bound(VariableLayout(1, 1),
                                        DelayBuffer::Replicate(VectorXd::Ones(1), 1), -1.0),
               ParameterError);
}

TEST(SaturationRows, Examples) {
  const auto heater = assemble_lmi_saturation_rows(VariableLayout(5, 5), 0.4);
  ASSERT_EQ(heater.size(), 5u);
  for (const auto& b : heater) EXPECT_EQ(b.size, 6);

  const VariableLayout L(1, 1);
  DecisionVars v = UnitVars(1, 1);
  v.Y5(0, 0) = 0.4;
  const MatrixXd m = assemble_lmi_saturation_rows(L, 0.4)[0].evaluate(L.pack(v));
  EXPECT_NEAR(m(0, 0), 0.16, 1e-15);
  EXPECT_NEAR(m(0, 1), 0.4, 1e-15);
  EXPECT_NEAR(m.determinant(), 0.0, 1e-15);

  v.Y5(0, 0) = 0.0;
  v.W(0, 0) = 2.0;
  const MatrixXd z = assemble_lmi_saturation_rows(L, 0.4)[0].evaluate(L.pack(v));
  EXPECT_EQ(z(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(z(1, 1), 3.0);
}

TEST(Recovery, Examples) {
  DecisionVars v = UnitVars(2, 2);
  v.W << 2, 1, 0, 3;
  v.Y4 = v.W;
  EXPECT_TRUE(recover_controller(v).F.isApprox(I(2), 1e-14));

  DecisionVars p = UnitVars(2, 1);
  p.gamma = 2;
  p.Y3 = 2 * I(2);
  EXPECT_TRUE(recover_controller(p).Phi.isApprox(I(2), 1e-14));

  DecisionVars s = UnitVars(1, 1);
  s.W(0, 0) = 2;
  s.Y4(0, 0) = 1;
  EXPECT_NEAR(recover_controller(s).F(0, 0), 0.5, 1e-15);

  DecisionVars bad = UnitVars(2, 1);
  bad.W << 1, 1, 1, 1 + 1e-15;
  EXPECT_THROW(recover_controller(bad), ParameterError);
}

TEST(LmiProperties, BlocksAreAffineInTheVariables) {
  Gen g(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int nx = g.Int(1, 3), nu = g.Int(1, 2);
    const auto m = RandomModel(g, nx, nu, 1, 2);
    const CostConfig c(g.Spd(nx), g.Spd(nu), 10, 0.05, 0.01);
    const auto prob =
        assemble_problem(m, c, {}, DelayBuffer::Replicate(g.Vector(nx), 1), g.Uniform(0, 5));
    const VectorXd y1 = prob.layout.pack(RandomVars(g, nx, nu));
    const VectorXd y2 = prob.layout.pack(RandomVars(g, nx, nu));
    const double t = g.Uniform(0, 1);
    for (const auto& b : prob.program.blocks) {
      const MatrixXd lhs = b.evaluate(t * y1 + (1 - t) * y2);
      const MatrixXd rhs = t * b.evaluate(y1) + (1 - t) * b.evaluate(y2);
      EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12) << b.tag;
    }
  }
}

TEST(LmiProperties, BlocksAreExactlySymmetric) {
  Gen g(6);
  for (int trial = 0; trial < 50; ++trial) {
    const int nx = g.Int(1, 4), nu = g.Int(1, 3);
    const auto m = RandomModel(g, nx, nu, g.Int(1, 3), g.Int(1, 2));
    const CostConfig c(g.Spd(nx), g.Spd(nu), 10, 0.05, 0.01);
    const auto prob =
        assemble_problem(m, c, {}, DelayBuffer::Replicate(g.Vector(nx), 1), g.Uniform(0, 5));
    const VectorXd y = prob.layout.pack(RandomVars(g, nx, nu));
    for (const auto& b : prob.program.blocks) {
      const MatrixXd e = b.evaluate(y);
      EXPECT_EQ(e, e.transpose()) << b.tag;
    }
    EXPECT_NO_THROW(prob.program.validate());
  }
}

TEST(AssembleProblem, BlockOrderAndTags) {
  Gen g(7);
  const auto m = RandomModel(g, 2, 1, 2, 2);
  const CostConfig c(I(2), I(1), 10, 0.05, 0.01);
  const auto p = assemble_problem(m, c, {}, DelayBuffer::Replicate(g.Vector(2), 1), 1.0);
  std::vector<std::string> tags;
  for (const auto& b : p.program.blocks) tags.push_back(b.tag);
  const std::vector<std::string> expect{"cost:v1:s1", "cost:v1:s2", "cost:v2:s1", "cost:v2:s2",
                                        "state",      "sat:r1",     "inv:v1:s1",  "inv:v1:s2",
                                        "inv:v2:s1",  "inv:v2:s2",  "pos:Y1",     "pos:Y2",
                                        "pos:Y3"};
  EXPECT_EQ(tags, expect);
  EXPECT_EQ(p.program.objective(0), 1.0);
  EXPECT_EQ(p.program.objective.tail(p.program.num_vars - 1).cwiseAbs().sum(), 0.0);
}

TEST(AssembleProblem, RejectsMultipleDelayChannels) {
  const PolytopicModel m({1, 2}, {{I(1), {I(1), I(1)}, I(1)}}, I(1), 1, 1);
  const CostConfig c(I(1), I(1), 10, 0.05, 1);
  EXPECT_THROW(assemble_lmi_cost_decrease(VariableLayout(1, 1), m, c, 0.1), ParameterError);
}

TEST(Names, InvarianceFormRoundTrip) {
  for (auto f : {InvarianceForm::kContractive, InvarianceForm::kPublished}) {
    EXPECT_EQ(parse_invariance_form(to_string(f)), f);
  }
  EXPECT_THROW(parse_invariance_form("loose"), ParameterError);
}

}  // namespace
}  // namespace etmpc
