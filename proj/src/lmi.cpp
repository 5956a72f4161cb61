#include "etmpc/lmi.hpp"

#include <cmath>
#include <iostream>

#include "affine_expr.hpp"
#include "etmpc/errors.hpp"

namespace etmpc {
namespace {

using detail::AffineExpr;
using detail::BlockBuilder;
using Eigen::MatrixXd;

constexpr int kMaxInputs = 12;
constexpr int kWarnInputs = 8;
constexpr double kMaxWCondition = 1e12;

struct SymbolicVars {
  AffineExpr gamma_scalar;  // 1×1
  AffineExpr W, W_tau, Y1, Y2, Y3, Y4, Y5;
};

SymbolicVars MakeSymbols(const VariableLayout& L) {
  const int nx = L.n_x();
  const int nu = L.n_u();
  return SymbolicVars{
      AffineExpr::ScaledIdentity(L.gamma(), 1),
      AffineExpr::Variable(nx, nx, [&](int r, int c) { return L.W(r, c); }),
      AffineExpr::Variable(nx, nx, [&](int r, int c) { return L.W_tau(r, c); }),
      AffineExpr::Variable(nx, nx, [&](int r, int c) { return L.Y1(r, c); }),
      AffineExpr::Variable(nx, nx, [&](int r, int c) { return L.Y2(r, c); }),
      AffineExpr::Variable(nx, nx, [&](int r, int c) { return L.Y3(r, c); }),
      AffineExpr::Variable(nu, nx, [&](int r, int c) { return L.Y4(r, c); }),
      AffineExpr::Variable(nu, nx, [&](int r, int c) { return L.Y5(r, c); }),
  };
}

AffineExpr Sym(const AffineExpr& W) { return W + W.transpose(); }

void RequireSingleDelay(const PolytopicModel& model) {
  if (model.num_delays() != 1) {
    throw ParameterError(
        "LMI synthesis supports a single delay channel only (model has " +
        std::to_string(model.num_delays()) + " delays)");
  }
}

void RequireLayoutMatches(const VariableLayout& layout, const PolytopicModel& model) {
  if (layout.n_x() != model.state_dim() || layout.n_u() != model.input_dim()) {
    throw DimensionError("variable layout does not match the model dimensions");
  }
}

void RequireCostMatches(const CostConfig& cost, const PolytopicModel& model) {
  if (cost.Q().rows() != model.state_dim() || cost.R().rows() != model.input_dim()) {
    throw DimensionError("Q/R do not match the model dimensions");
  }
}

void RequireSpd(const MatrixXd& M, const std::string& what) {
  if (M.rows() == 0 || M.rows() != M.cols() || !M.isApprox(M.transpose(), 1e-12)) {
    throw ParameterError(what + " must be square and symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(M, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw ParameterError(what + " must be positive definite");
  }
}

std::string Tag(const std::string& family, int v, int eta) {
  return family + ":v" + std::to_string(v + 1) + ":s" + std::to_string(eta + 1);
}

}  // namespace

VariableLayout::VariableLayout(int n_x, int n_u) : n_x_(n_x), n_u_(n_u) {
  if (n_x < 1 || n_u < 1) throw DimensionError("layout needs n_x, n_u >= 1");
  const int sym = n_x * (n_x + 1) / 2;
  w_ = 1;
  wt_ = w_ + n_x * n_x;
  y4_ = wt_ + n_x * n_x;
  y5_ = y4_ + n_u * n_x;
  y1_ = y5_ + n_u * n_x;
  y2_ = y1_ + sym;
  y3_ = y2_ + sym;
  size_ = y3_ + sym;
}

int VariableLayout::sym_index(int base, int r, int c) const {
  if (r > c) std::swap(r, c);
  return base + c * (c + 1) / 2 + r;
}

Eigen::VectorXd VariableLayout::pack(const DecisionVars& v) const {
  auto check = [](const MatrixXd& m, int r, int c, const char* what) {
    if (m.rows() != r || m.cols() != c) {
      throw DimensionError(std::string("DecisionVars::") + what + " has the wrong size");
    }
  };
  check(v.W, n_x_, n_x_, "W");
  check(v.W_tau, n_x_, n_x_, "W_tau");
  check(v.Y1, n_x_, n_x_, "Y1");
  check(v.Y2, n_x_, n_x_, "Y2");
  check(v.Y3, n_x_, n_x_, "Y3");
  check(v.Y4, n_u_, n_x_, "Y4");
  check(v.Y5, n_u_, n_x_, "Y5");
  Eigen::VectorXd y(size_);
  y(0) = v.gamma;
  for (int c = 0; c < n_x_; ++c) {
    for (int r = 0; r < n_x_; ++r) {
      y(W(r, c)) = v.W(r, c);
      y(W_tau(r, c)) = v.W_tau(r, c);
    }
    for (int r = 0; r < n_u_; ++r) {
      y(Y4(r, c)) = v.Y4(r, c);
      y(Y5(r, c)) = v.Y5(r, c);
    }
    for (int r = 0; r <= c; ++r) {
      y(Y1(r, c)) = v.Y1(r, c);
      y(Y2(r, c)) = v.Y2(r, c);
      y(Y3(r, c)) = v.Y3(r, c);
    }
  }
  return y;
}

DecisionVars VariableLayout::unpack(const Eigen::VectorXd& y) const {
  if (y.size() != size_) throw DimensionError("variable vector has the wrong length");
  DecisionVars v;
  v.gamma = y(0);
  v.W.resize(n_x_, n_x_);
  v.W_tau.resize(n_x_, n_x_);
  v.Y1.resize(n_x_, n_x_);
  v.Y2.resize(n_x_, n_x_);
  v.Y3.resize(n_x_, n_x_);
  v.Y4.resize(n_u_, n_x_);
  v.Y5.resize(n_u_, n_x_);
  for (int c = 0; c < n_x_; ++c) {
    for (int r = 0; r < n_x_; ++r) {
      v.W(r, c) = y(W(r, c));
      v.W_tau(r, c) = y(W_tau(r, c));
      v.Y1(r, c) = y(Y1(r, c));
      v.Y2(r, c) = y(Y2(r, c));
      v.Y3(r, c) = y(Y3(r, c));
    }
    for (int r = 0; r < n_u_; ++r) {
      v.Y4(r, c) = y(Y4(r, c));
      v.Y5(r, c) = y(Y5(r, c));
    }
  }
  return v;
}

std::string VariableLayout::name(int var) const {
  if (var < 0 || var >= size_) throw DimensionError("variable index out of range");
  auto rc = [](const std::string& n, int r, int c) {
    return n + "[" + std::to_string(r + 1) + "," + std::to_string(c + 1) + "]";
  };
  if (var == 0) return "gamma";
  if (var < wt_) return rc("W", (var - w_) % n_x_, (var - w_) / n_x_);
  if (var < y4_) return rc("W_tau", (var - wt_) % n_x_, (var - wt_) / n_x_);
  if (var < y5_) return rc("Y4", (var - y4_) % n_u_, (var - y4_) / n_u_);
  if (var < y1_) return rc("Y5", (var - y5_) % n_u_, (var - y5_) / n_u_);
  const int sym = n_x_ * (n_x_ + 1) / 2;
  const int which = (var - y1_) / sym;
  int k = (var - y1_) % sym;
  int c = 0;
  while (k > c) {
    k -= c + 1;
    ++c;
  }
  return rc("Y" + std::to_string(which + 1), k, c);
}

CostConfig::CostConfig(MatrixXd Q, MatrixXd R, double varphi, double delta, double d_sq)
    : Q_(std::move(Q)), R_(std::move(R)), varphi_(varphi), delta_(delta), d_sq_(d_sq) {
  RequireSpd(Q_, "Q");
  RequireSpd(R_, "R");
  if (!(varphi_ > 0.0)) throw ParameterError("varphi must be > 0");
  if (!(delta_ > 0.0 && delta_ < 1.0)) throw ParameterError("delta must satisfy 0 < delta < 1");
  if (!(d_sq_ > 0.0)) throw ParameterError("d_sq must be > 0");
}

void check_delta(double delta, double mu) {
  if (!(delta > 0.0 && delta < 1.0 - mu)) {
    throw ParameterError("delta must satisfy 0 < delta < 1 - mu (delta = " +
                         std::to_string(delta) + ", 1 - mu = " + std::to_string(1.0 - mu) +
                         ")");
  }
}

std::vector<SaturationVertex> enumerate_saturation_vertices(int n_u) {
  if (n_u < 1 || n_u > kMaxInputs) {
    throw ParameterError("saturation vertex enumeration needs 1 <= n_u <= " +
                         std::to_string(kMaxInputs) + " (got " + std::to_string(n_u) + ")");
  }
  if (n_u > kWarnInputs) {
    std::clog << "warning: " << (1 << n_u) << " saturation vertices for n_u = " << n_u << "\n";
  }
  std::vector<SaturationVertex> out;
  out.reserve(std::size_t{1} << n_u);
  for (int eta = 0; eta < (1 << n_u); ++eta) {
    SaturationVertex s{MatrixXd::Zero(n_u, n_u), MatrixXd::Zero(n_u, n_u)};
    for (int i = 0; i < n_u; ++i) {
      const bool bit = (eta >> (n_u - 1 - i)) & 1;
      s.E(i, i) = bit ? 1.0 : 0.0;
      s.E_minus(i, i) = bit ? 0.0 : 1.0;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string to_string(InvarianceForm form) {
  return form == InvarianceForm::kContractive ? "contractive" : "published";
}

InvarianceForm parse_invariance_form(const std::string& name) {
  if (name == "contractive") return InvarianceForm::kContractive;
  if (name == "published") return InvarianceForm::kPublished;
  throw ParameterError("unknown invariance form '" + name +
                       "' (expected contractive or published)");
}

MatrixXd symmetric_sqrt(const MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (M + M.transpose()));
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < 0.0) {
    throw ParameterError("square root of a matrix that is not positive semidefinite");
  }
  return eig.operatorSqrt();
}

std::vector<sdp::AffineBlock> assemble_lmi_cost_decrease(const VariableLayout& layout,
                                                         const PolytopicModel& model,
                                                         const CostConfig& cost, double theta) {
  RequireSingleDelay(model);
  RequireLayoutMatches(layout, model);
  RequireCostMatches(cost, model);
  const int nx = model.state_dim();
  const int nu = model.input_dim();
  const int nw = model.disturbance_dim();
  const SymbolicVars s = MakeSymbols(layout);
  const MatrixXd Qh = symmetric_sqrt(cost.Q());
  const MatrixXd Rh = symmetric_sqrt(cost.R());
  const double th = std::sqrt(theta);
  const int g = layout.gamma();

  std::vector<sdp::AffineBlock> out;
  const auto sat = enumerate_saturation_vertices(nu);
  for (int v = 0; v < model.num_vertices(); ++v) {
    const auto& vm = model.vertex(v);
    for (std::size_t eta = 0; eta < sat.size(); ++eta) {
      const AffineExpr N = sat[eta].E * s.Y4 + sat[eta].E_minus * s.Y5;
      BlockBuilder b({nx, nx, nx, nw, nx, nx, nx, nu, nx});
      b.set(0, 0, Sym(s.W) - s.Y1);
      b.set(1, 1, Sym(s.W_tau) - s.Y2);
      b.set(2, 2, Sym(s.W) - s.Y3);
      b.set(3, 3, AffineExpr::ScaledIdentity(g, nw, cost.varphi()));
      b.set(4, 0, vm.A * s.W + vm.B * N);
      b.set(4, 1, vm.A_delay[0] * s.W_tau);
      b.set(4, 2, vm.B * N);
      b.set(4, 3, model.D() * AffineExpr::ScaledIdentity(g, nw));
      b.set(5, 0, s.W);
      b.set(6, 0, Qh * s.W);
      b.set(7, 0, Rh * N);
      b.set(7, 2, Rh * N);
      b.set(8, 0, th * s.W);
      b.set(4, 4, s.Y1);
      b.set(5, 5, s.Y2);
      b.set(6, 6, AffineExpr::ScaledIdentity(g, nx));
      b.set(7, 7, AffineExpr::ScaledIdentity(g, nu));
      b.set(8, 8, s.Y3);
      out.push_back(b.build(Tag("cost", v, static_cast<int>(eta))));
    }
  }
  return out;
}

sdp::AffineBlock assemble_lmi_state_bound(const VariableLayout& layout,
                                          const DelayBuffer& buffer, double beta) {
  if (!(beta >= 0.0)) throw ParameterError("state bound needs beta >= 0");
  if (buffer.state_dim() != layout.n_x()) {
    throw DimensionError("buffer state size does not match the layout");
  }
  const int nx = layout.n_x();
  const int tau = buffer.size() - 1;
  if (tau < 1) throw DimensionError("state bound needs a buffer with at least one delay");
  const SymbolicVars s = MakeSymbols(layout);

  std::vector<int> sizes{1};
  for (int i = 0; i <= tau; ++i) sizes.push_back(nx);
  sizes.push_back(1);
  BlockBuilder b(sizes);
  b.set(0, 0, AffineExpr::Constant(MatrixXd::Ones(1, 1)));
  for (int i = 0; i <= tau; ++i) {
    b.set(1 + i, 0, AffineExpr::Constant(buffer.lag(i)));
    b.set(1 + i, 1 + i, i == 0 ? s.Y1 : s.Y2);
  }
  b.set(tau + 2, 0, AffineExpr::Constant(MatrixXd::Constant(1, 1, std::sqrt(beta))));
  b.set(tau + 2, tau + 2, s.gamma_scalar);
  return b.build("state");
}

std::vector<sdp::AffineBlock> assemble_lmi_saturation_rows(const VariableLayout& layout,
                                                           double u_sat) {
  if (!(u_sat > 0.0)) throw ParameterError("u_sat must be > 0");
  const int nx = layout.n_x();
  const SymbolicVars s = MakeSymbols(layout);
  std::vector<sdp::AffineBlock> out;
  for (int i = 0; i < layout.n_u(); ++i) {
    MatrixXd pick = MatrixXd::Zero(1, layout.n_u());
    pick(0, i) = 1.0;
    BlockBuilder b({1, nx});
    b.set(0, 0, AffineExpr::Constant(MatrixXd::Constant(1, 1, u_sat * u_sat)));
    b.set(1, 0, (pick * s.Y5).transpose());
    b.set(1, 1, Sym(s.W) - s.Y1);
    out.push_back(b.build("sat:r" + std::to_string(i + 1)));
  }
  return out;
}

std::vector<sdp::AffineBlock> assemble_lmi_invariance(const VariableLayout& layout,
                                                      const PolytopicModel& model,
                                                      const CostConfig& cost, double theta,
                                                      double mu, InvarianceForm form) {
  RequireSingleDelay(model);
  RequireLayoutMatches(layout, model);
  check_delta(cost.delta(), mu);
  const int nx = model.state_dim();
  const int nu = model.input_dim();
  const int nw = model.disturbance_dim();
  const SymbolicVars s = MakeSymbols(layout);
  const double th = std::sqrt(theta);
  const double f = form == InvarianceForm::kContractive ? 1.0 - cost.delta() : 1.0;

  std::vector<sdp::AffineBlock> out;
  const auto sat = enumerate_saturation_vertices(nu);
  for (int v = 0; v < model.num_vertices(); ++v) {
    const auto& vm = model.vertex(v);
    for (std::size_t eta = 0; eta < sat.size(); ++eta) {
      const AffineExpr N = sat[eta].E * s.Y4 + sat[eta].E_minus * s.Y5;
      BlockBuilder b({nx, nx, nx, nw, nx, nx, nx});
      b.set(0, 0, f * (Sym(s.W) - s.Y1));
      b.set(1, 1, f * (Sym(s.W_tau) - s.Y2));
      b.set(2, 2, Sym(s.W) - s.Y3);
      b.set(3, 3, AffineExpr::Constant(cost.delta() / cost.d_sq() * MatrixXd::Identity(nw, nw)));
      b.set(4, 0, vm.A * s.W + vm.B * N);
      b.set(4, 1, vm.A_delay[0] * s.W_tau);
      b.set(4, 2, vm.B * N);
      b.set(4, 3, AffineExpr::Constant(model.D()));
      b.set(5, 0, s.W);
      b.set(6, 0, th * s.W);
      b.set(4, 4, s.Y1);
      b.set(5, 5, s.Y2);
      b.set(6, 6, s.Y3);
      out.push_back(b.build(Tag("inv", v, static_cast<int>(eta))));
    }
  }
  return out;
}

std::vector<sdp::AffineBlock> assemble_positivity(const VariableLayout& layout, double eps) {
  const SymbolicVars s = MakeSymbols(layout);
  const MatrixXd shift = eps * MatrixXd::Identity(layout.n_x(), layout.n_x());
  std::vector<sdp::AffineBlock> out;
  const AffineExpr* ys[] = {&s.Y1, &s.Y2, &s.Y3};
  for (int i = 0; i < 3; ++i) {
    BlockBuilder b({layout.n_x()});
    b.set(0, 0, *ys[i] - AffineExpr::Constant(shift));
    out.push_back(b.build("pos:Y" + std::to_string(i + 1)));
  }
  return out;
}

LmiProblem assemble_problem(const PolytopicModel& model, const CostConfig& cost,
                            const SynthesisSettings& settings, const DelayBuffer& buffer,
                            double beta) {
  RequireSingleDelay(model);
  if (buffer.size() != model.max_delay() + 1) {
    throw DimensionError("buffer depth does not match the model delay");
  }
  LmiProblem p{VariableLayout(model.state_dim(), model.input_dim()), {}};
  auto& prog = p.program;
  prog.num_vars = p.layout.size();
  prog.objective = Eigen::VectorXd::Zero(prog.num_vars);
  prog.objective(p.layout.gamma()) = 1.0;
  auto append = [&](std::vector<sdp::AffineBlock> blocks) {
    for (auto& b : blocks) prog.blocks.push_back(std::move(b));
  };
  append(assemble_lmi_cost_decrease(p.layout, model, cost, settings.theta));
  prog.blocks.push_back(assemble_lmi_state_bound(p.layout, buffer, beta));
  append(assemble_lmi_saturation_rows(p.layout, model.u_sat()));
  append(assemble_lmi_invariance(p.layout, model, cost, settings.theta, settings.mu,
                                 settings.form));
  append(assemble_positivity(p.layout, settings.positivity_margin));
  return p;
}

ControllerGains recover_controller(const DecisionVars& vars) {
  const int nx = static_cast<int>(vars.W.rows());
  if (vars.W.cols() != nx || vars.Y4.cols() != nx || vars.Y5.cols() != nx) {
    throw DimensionError("recover_controller: inconsistent variable sizes");
  }
  Eigen::JacobiSVD<MatrixXd> svd(vars.W);
  const auto sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                              : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxWCondition)) {
    throw ParameterError("W is numerically singular (condition number " +
                         std::to_string(cond) + ")");
  }
  if (!(vars.gamma > 0.0)) throw ParameterError("gamma must be > 0");
  auto inverse_spd = [&](const MatrixXd& Y, const char* what) {
    Eigen::LLT<MatrixXd> llt(0.5 * (Y + Y.transpose()));
    if (llt.info() != Eigen::Success) {
      throw ParameterError(std::string(what) + " is not positive definite");
    }
    const MatrixXd inv = llt.solve(MatrixXd::Identity(nx, nx));
    return MatrixXd(vars.gamma * 0.5 * (inv + inv.transpose()));
  };
  ControllerGains g;
  const auto lu = vars.W.transpose().partialPivLu();
  g.F = lu.solve(vars.Y4.transpose()).transpose();
  g.H = lu.solve(vars.Y5.transpose()).transpose();
  g.P = inverse_spd(vars.Y1, "Y1");
  g.P_tau = inverse_spd(vars.Y2, "Y2");
  g.Phi = inverse_spd(vars.Y3, "Y3");
  g.W_condition = cond;
  return g;
}

}  // namespace etmpc
