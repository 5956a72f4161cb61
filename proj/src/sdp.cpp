#include "etmpc/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "etmpc/errors.hpp"

namespace etmpc::sdp {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Blocks = std::vector<MatrixXd>;

constexpr double kInfeasibilityTol = 1e-8;
constexpr double kUnboundedObjective = 1e12;

double Inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].cwiseProduct(b[i]).sum();
  return s;
}

double FrobeniusNorm(const Blocks& a) {
  double s = 0.0;
  for (const auto& m : a) s += m.squaredNorm();
  return std::sqrt(s);
}

MatrixXd Symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Largest α with M + αΔ ⪰ 0 given the Cholesky factor L of M (M = LLᵀ).
double MaxStep(const Eigen::LLT<MatrixXd>& chol, const MatrixXd& delta) {
  const auto L = chol.matrixL();
  const MatrixXd half = L.solve(delta);
  const MatrixXd tmp = L.solve(half.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Symmetrize(tmp), Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double MinEigenvalue(const MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double SpectralNorm(const MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

// NT scaling of one block: G = TTᵀ with G S G = X and TᵀST = T⁻¹XT⁻ᵀ = diag(λ).
struct Scaling {
  Eigen::LLT<MatrixXd> chol_x;
  Eigen::LLT<MatrixXd> chol_s;
  MatrixXd T;
  MatrixXd T_inv;
  MatrixXd G;
  VectorXd lambda;
};

// Fᵢ = Σ_t (u_t e_{k_t}ᵀ + e_{k_t} u_tᵀ), so that G Fᵢ G is a short sum of
// outer products.
struct OwnerColumn {
  int col;
  std::vector<std::pair<int, double>> u;
};

std::vector<OwnerColumn> Decompose(const VarCoefficient& vc, int n) {
  MatrixXd F = MatrixXd::Zero(n, n);
  for (const auto& e : vc.entries) F(e.row, e.col) += e.value;
  std::vector<OwnerColumn> out;
  for (;;) {
    int best = -1;
    int best_count = 0;
    for (int c = 0; c < n; ++c) {
      int count = 0;
      for (int r = 0; r < n; ++r) count += F(r, c) != 0.0;
      if (count > best_count) {
        best_count = count;
        best = c;
      }
    }
    if (best < 0) break;
    OwnerColumn oc{best, {}};
    for (int r = 0; r < n; ++r) {
      const double v = F(r, best);
      if (v == 0.0) continue;
      oc.u.emplace_back(r, r == best ? 0.5 * v : v);
      F(r, best) = 0.0;
      F(best, r) = 0.0;
    }
    out.push_back(std::move(oc));
  }
  return out;
}

class InteriorPoint {
 public:
  InteriorPoint(const ConicProgram& program, const SdpOptions& options)
      : prog_(program), opt_(options), m_(program.num_vars) {
    total_dim_ = 0;
    for (const auto& b : prog_.blocks) total_dim_ += b.size;
    used_.assign(m_, false);
    for (const auto& b : prog_.blocks) {
      for (const auto& vc : b.coefficients) used_[vc.var] = true;
    }
    owners_.resize(prog_.blocks.size());
    for (std::size_t b = 0; b < prog_.blocks.size(); ++b) {
      for (const auto& vc : prog_.blocks[b].coefficients) {
        owners_[b].push_back(Decompose(vc, prog_.blocks[b].size));
      }
    }
  }

  SdpSolution Run(const std::optional<VectorXd>& warm_start) {
    SdpSolution sol;
    for (int i = 0; i < m_; ++i) {
      if (!used_[i] && prog_.objective(i) != 0.0) {
        sol.status = SdpStatus::kNumericalFailure;
        sol.diagnostics.message = "unbounded: objective variable " + std::to_string(i) +
                                  " appears in no constraint";
        sol.values = VectorXd::Zero(m_);
        return sol;
      }
    }
    Initialize(warm_start, &sol.diagnostics);

    const double c_norm = prog_.objective.norm();
    double f0_norm_sq = 0.0;
    for (const auto& b : prog_.blocks) f0_norm_sq += b.constant.squaredNorm();
    const double f0_norm = std::sqrt(f0_norm_sq);

    for (int iter = 0;; ++iter) {
      const VectorXd rp = ApplyF(X_) - prog_.objective;
      Blocks Rd = EvaluateF(y_);
      for (std::size_t b = 0; b < Rd.size(); ++b) Rd[b] -= S_[b];

      const double pobj = -ConstantInner(X_);
      const double dobj = prog_.objective.dot(y_);
      const double xs = Inner(X_, S_);
      const double mu = xs / std::max(1, total_dim_);
      const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
      const double relgap = std::max(std::abs(dobj - pobj), std::max(xs, 0.0)) / denom;
      const double pinf = rp.norm() / (1.0 + c_norm);
      const double dinf = FrobeniusNorm(Rd) / (1.0 + f0_norm);

      auto& diag = sol.diagnostics;
      diag.iterations = iter;
      diag.primal_residual = pinf;
      diag.dual_residual = dinf;
      diag.relative_gap = relgap;

      if (opt_.verbose) {
        std::cerr << "sdp it " << iter << " pobj " << pobj << " dobj " << dobj << " pinf "
                  << pinf << " dinf " << dinf << " gap " << relgap << "\n";
      }

      if (pinf <= opt_.primal_tol && dinf <= opt_.dual_tol && relgap <= opt_.gap_tol) {
        return Finish(SdpStatus::kOptimal, "converged", &sol);
      }

      // Farkas certificate for an empty LMI: X ⪰ 0 with ⟨Fᵢ, X⟩ = 0 and
      // ⟨F₀, X⟩ < 0.
      const double f0x = ConstantInner(X_);
      if (f0x < 0.0) {
        const double measure = ApplyF(X_).norm() / (-f0x);
        diag.infeasibility_measure = measure;
        if (measure < kInfeasibilityTol && dinf > opt_.dual_tol) {
          return Finish(SdpStatus::kInfeasible, "infeasible: Farkas certificate found", &sol);
        }
      }
      if (dobj < -kUnboundedObjective * (1.0 + c_norm)) {
        return Finish(SdpStatus::kNumericalFailure, "unbounded objective", &sol);
      }
      if (iter >= opt_.max_iterations) {
        return Finish(SdpStatus::kMaxIterations, "iteration limit reached", &sol);
      }

      std::vector<Scaling> scal;
      scal.reserve(prog_.blocks.size());
      for (std::size_t b = 0; b < prog_.blocks.size(); ++b) {
        auto s = ComputeScaling(X_[b], S_[b]);
        if (!s) return Finish(SdpStatus::kNumericalFailure, "loss of positive definiteness", &sol);
        scal.push_back(std::move(*s));
      }
      MatrixXd M = SchurMatrix(scal);
      for (int i = 0; i < m_; ++i) {
        if (!used_[i]) M(i, i) = 1.0;
      }
      Eigen::LLT<MatrixXd> llt(M);
      Eigen::LDLT<MatrixXd> ldlt;
      bool use_llt = llt.info() == Eigen::Success;
      if (!use_llt) {
        ldlt.compute(M);
        if (ldlt.info() != Eigen::Success) {
          return Finish(SdpStatus::kNumericalFailure, "Schur complement factorization failed",
                        &sol);
        }
      }
      auto solve_schur = [&](const VectorXd& rhs) -> VectorXd {
        VectorXd out = use_llt ? VectorXd(llt.solve(rhs)) : VectorXd(ldlt.solve(rhs));
        for (int i = 0; i < m_; ++i) {
          if (!used_[i]) out(i) = 0.0;
        }
        return out;
      };

      // G R_d G is shared by predictor and corrector.
      Blocks GRdG(prog_.blocks.size());
      for (std::size_t b = 0; b < GRdG.size(); ++b) {
        GRdG[b] = scal[b].G * Rd[b] * scal[b].G;
      }

      auto direction = [&](const Blocks& H, VectorXd* dy, Blocks* dX, Blocks* dS) {
        Blocks rhs_blocks(H.size());
        for (std::size_t b = 0; b < H.size(); ++b) rhs_blocks[b] = H[b] - GRdG[b];
        *dy = solve_schur(rp + ApplyF(rhs_blocks));
        *dS = AdjointF(*dy);
        dX->resize(H.size());
        for (std::size_t b = 0; b < H.size(); ++b) {
          (*dS)[b] += Rd[b];
          (*dS)[b] = Symmetrize((*dS)[b]);
          (*dX)[b] = Symmetrize(H[b] - scal[b].G * (*dS)[b] * scal[b].G);
        }
      };

      // Predictor (affine scaling) direction.
      Blocks H(X_.size());
      for (std::size_t b = 0; b < H.size(); ++b) H[b] = -X_[b];
      VectorXd dy;
      Blocks dX, dS;
      direction(H, &dy, &dX, &dS);

      const auto [ap_aff, ad_aff] = StepLengths(scal, dX, dS);
      const double a_p = std::min(1.0, ap_aff);
      const double a_d = std::min(1.0, ad_aff);
      double xs_aff = 0.0;
      for (std::size_t b = 0; b < X_.size(); ++b) {
        xs_aff += (X_[b] + a_p * dX[b]).cwiseProduct(S_[b] + a_d * dS[b]).sum();
      }
      const double mu_aff = xs_aff / std::max(1, total_dim_);
      // Exponent grows with the predictor step (full steps give σ ≈ (μ_aff/μ)³).
      const double expon = std::max(1.0, 3.0 * std::pow(std::min(a_p, a_d), 2));
      double sigma = mu > 0.0 ? std::pow(std::max(mu_aff, 0.0) / mu, expon) : 0.0;
      sigma = std::clamp(sigma, 0.0, 1.0);

      // Corrector: solve λZ + Zλ = 2σμI − 2λ² − (ΔX̃ΔS̃ + ΔS̃ΔX̃) in the
      // scaled space and map back.
      for (std::size_t b = 0; b < H.size(); ++b) {
        const auto& sc = scal[b];
        const MatrixXd dXt = sc.T_inv * dX[b] * sc.T_inv.transpose();
        const MatrixXd dSt = sc.T.transpose() * dS[b] * sc.T;
        MatrixXd rc = -(dXt * dSt + dSt * dXt);
        const int n = static_cast<int>(sc.lambda.size());
        for (int i = 0; i < n; ++i) {
          rc(i, i) += 2.0 * sigma * mu - 2.0 * sc.lambda(i) * sc.lambda(i);
        }
        MatrixXd Z(n, n);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) Z(i, j) = rc(i, j) / (sc.lambda(i) + sc.lambda(j));
        }
        H[b] = Symmetrize(sc.T * Z * sc.T.transpose());
      }
      direction(H, &dy, &dX, &dS);

      const auto [ap, ad] = StepLengths(scal, dX, dS);
      const double frac =
          std::min(opt_.step_fraction, 0.9 + 0.09 * std::min({1.0, ap, ad}));
      const double step_p = std::min(1.0, frac * ap);
      const double step_d = std::min(1.0, frac * ad);
      if (!(step_p > 0.0) || !(step_d > 0.0) || !dy.allFinite()) {
        return Finish(SdpStatus::kNumericalFailure, "step length collapsed", &sol);
      }
      for (std::size_t b = 0; b < X_.size(); ++b) {
        X_[b] = Symmetrize(X_[b] + step_p * dX[b]);
        S_[b] = Symmetrize(S_[b] + step_d * dS[b]);
      }
      y_ += step_d * dy;
    }
  }

 private:
  void Initialize(const std::optional<VectorXd>& warm_start, SdpDiagnostics* diag) {
    const std::size_t nb = prog_.blocks.size();
    X_.resize(nb);
    S_.resize(nb);
    y_ = VectorXd::Zero(m_);

    bool warm = false;
    if (warm_start && warm_start->size() == m_) {
      const Blocks F = EvaluateF(*warm_start);
      warm = std::all_of(F.begin(), F.end(), [](const MatrixXd& f) {
        return f.rows() == 0 || MinEigenvalue(f) > 0.0;
      });
      if (warm) {
        y_ = *warm_start;
        for (std::size_t b = 0; b < nb; ++b) S_[b] = F[b];
      }
    }
    diag->warm_started = warm;

    for (std::size_t b = 0; b < nb; ++b) {
      const auto& blk = prog_.blocks[b];
      const double n = blk.size;
      double xi = std::max(10.0, std::sqrt(n));
      double eta = std::max({10.0, std::sqrt(n), blk.constant.norm()});
      for (const auto& vc : blk.coefficients) {
        double fn = 0.0;
        for (const auto& e : vc.entries) fn += e.value * e.value;
        fn = std::sqrt(fn);
        xi = std::max(xi, n * (1.0 + std::abs(prog_.objective(vc.var))) / (1.0 + fn));
        eta = std::max(eta, fn);
      }
      X_[b] = xi * MatrixXd::Identity(blk.size, blk.size);
      if (!warm) S_[b] = eta * MatrixXd::Identity(blk.size, blk.size);
    }
  }

  SdpSolution& Finish(SdpStatus status, const std::string& message, SdpSolution* sol) {
    sol->status = status;
    sol->values = y_;
    sol->objective = prog_.objective.dot(y_);
    sol->diagnostics.message = message;
    double min_eig = std::numeric_limits<double>::infinity();
    bool certified = true;
    for (const auto& blk : prog_.blocks) {
      const MatrixXd F = blk.evaluate(y_);
      const double e = MinEigenvalue(F);
      min_eig = std::min(min_eig, e);
      if (e < -1e-6 * (1.0 + SpectralNorm(F))) certified = false;
    }
    sol->diagnostics.min_block_eigenvalue = prog_.blocks.empty() ? 0.0 : min_eig;
    if (status == SdpStatus::kOptimal && !certified) {
      sol->status = SdpStatus::kNumericalFailure;
      sol->diagnostics.message = "converged but a block violates the PSD tolerance";
    }
    return *sol;
  }

  std::optional<Scaling> ComputeScaling(const MatrixXd& X, const MatrixXd& S) const {
    Scaling s;
    s.chol_x.compute(X);
    s.chol_s.compute(S);
    const auto& cx = s.chol_x;
    const auto& cs = s.chol_s;
    if (cx.info() != Eigen::Success || cs.info() != Eigen::Success) return std::nullopt;
    const MatrixXd L = cx.matrixL();
    const MatrixXd R = cs.matrixL();
    Eigen::BDCSVD<MatrixXd> svd(R.transpose() * L, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXd d = svd.singularValues();
    if (!(d.minCoeff() > 0.0) || !d.allFinite()) return std::nullopt;
    s.lambda = d;
    const VectorXd d_isqrt = d.cwiseSqrt().cwiseInverse();
    s.T = L * svd.matrixV() * d_isqrt.asDiagonal();
    // T⁻¹ = D^{1/2} Vᵀ L⁻¹
    const MatrixXd Linv_t = cx.matrixL().solve(MatrixXd::Identity(L.rows(), L.cols()));
    s.T_inv = d.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() * Linv_t;
    s.G = Symmetrize(s.T * s.T.transpose());
    return s;
  }

  // Mᵢⱼ = Σ_b ⟨Fᵢ, G Fⱼ G⟩.
  MatrixXd SchurMatrix(const std::vector<Scaling>& scal) const {
    MatrixXd M = MatrixXd::Zero(m_, m_);
    for (std::size_t b = 0; b < prog_.blocks.size(); ++b) {
      const auto& blk = prog_.blocks[b];
      const MatrixXd& G = scal[b].G;
      const int n = blk.size;
      MatrixXd K(n, n);
      VectorXd h(n);
      for (std::size_t j = 0; j < blk.coefficients.size(); ++j) {
        const auto& vj = blk.coefficients[j];
        K.setZero();
        for (const auto& oc : owners_[b][j]) {
          h.setZero();
          for (const auto& [r, v] : oc.u) h.noalias() += v * G.col(r);
          K.noalias() += h * G.row(oc.col);
        }
        // K holds G(Σ u eᵀ)G; add its transpose for the symmetric part.
        for (const auto& vi : blk.coefficients) {
          if (vi.var > vj.var) break;
          double s = 0.0;
          for (const auto& e : vi.entries) s += e.value * (K(e.row, e.col) + K(e.col, e.row));
          M(vi.var, vj.var) += s;
        }
      }
    }
    return M.selfadjointView<Eigen::Upper>();
  }

  std::pair<double, double> StepLengths(const std::vector<Scaling>& scal, const Blocks& dX,
                                        const Blocks& dS) const {
    double ap = std::numeric_limits<double>::infinity();
    double ad = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < X_.size(); ++b) {
      if (X_[b].rows() == 0) continue;
      ap = std::min(ap, MaxStep(scal[b].chol_x, dX[b]));
      ad = std::min(ad, MaxStep(scal[b].chol_s, dS[b]));
    }
    return {ap, ad};
  }

  // (⟨F₁, X⟩, ..., ⟨F_m, X⟩)
  VectorXd ApplyF(const Blocks& X) const {
    VectorXd out = VectorXd::Zero(m_);
    for (std::size_t b = 0; b < prog_.blocks.size(); ++b) {
      for (const auto& vc : prog_.blocks[b].coefficients) {
        double s = 0.0;
        for (const auto& e : vc.entries) s += e.value * X[b](e.row, e.col);
        out(vc.var) += s;
      }
    }
    return out;
  }

  // Σᵢ yᵢ Fᵢ per block.
  Blocks AdjointF(const VectorXd& y) const {
    Blocks out(prog_.blocks.size());
    for (std::size_t b = 0; b < prog_.blocks.size(); ++b) {
      const auto& blk = prog_.blocks[b];
      out[b] = MatrixXd::Zero(blk.size, blk.size);
      for (const auto& vc : blk.coefficients) {
        const double yi = y(vc.var);
        for (const auto& e : vc.entries) out[b](e.row, e.col) += yi * e.value;
      }
    }
    return out;
  }

  Blocks EvaluateF(const VectorXd& y) const {
    Blocks out = AdjointF(y);
    for (std::size_t b = 0; b < out.size(); ++b) out[b] += prog_.blocks[b].constant;
    return out;
  }

  double ConstantInner(const Blocks& X) const {
    double s = 0.0;
    for (std::size_t b = 0; b < X.size(); ++b) {
      s += prog_.blocks[b].constant.cwiseProduct(X[b]).sum();
    }
    return s;
  }

  const ConicProgram& prog_;
  const SdpOptions& opt_;
  int m_;
  int total_dim_;
  std::vector<bool> used_;
  std::vector<std::vector<std::vector<OwnerColumn>>> owners_;
  Blocks X_;
  Blocks S_;
  VectorXd y_;
};

}  // namespace

Eigen::MatrixXd AffineBlock::evaluate(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd out = constant;
  for (const auto& vc : coefficients) {
    const double yi = y(vc.var);
    for (const auto& e : vc.entries) out(e.row, e.col) += yi * e.value;
  }
  return out;
}

void ConicProgram::validate() const {
  if (num_vars < 0) throw DimensionError("negative variable count");
  if (objective.size() != num_vars) throw DimensionError("objective length != num_vars");
  for (const auto& b : blocks) {
    if (b.constant.rows() != b.size || b.constant.cols() != b.size) {
      throw DimensionError("block '" + b.tag + "': constant has wrong size");
    }
    if (b.constant != b.constant.transpose()) {
      throw DimensionError("block '" + b.tag + "': constant term is not symmetric");
    }
    int last = -1;
    for (const auto& vc : b.coefficients) {
      if (vc.var <= last || vc.var >= num_vars) {
        throw DimensionError("block '" + b.tag + "': variable indices unsorted or out of range");
      }
      last = vc.var;
      Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(b.size, b.size);
      for (const auto& e : vc.entries) {
        if (e.row < 0 || e.col < 0 || e.row >= b.size || e.col >= b.size) {
          throw DimensionError("block '" + b.tag + "': entry out of range");
        }
        dense(e.row, e.col) += e.value;
      }
      if (dense != dense.transpose()) {
        throw DimensionError("block '" + b.tag + "': coefficient of variable " +
                             std::to_string(vc.var) + " is not symmetric");
      }
    }
  }
}

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::kOptimal:
      return "optimal";
    case SdpStatus::kInfeasible:
      return "infeasible";
    case SdpStatus::kMaxIterations:
      return "max-iterations";
    case SdpStatus::kNumericalFailure:
      return "numerical-failure";
  }
  return "unknown";
}

SdpSolution solve(const ConicProgram& program, const SdpOptions& options,
                  const std::optional<Eigen::VectorXd>& warm_start) {
  program.validate();
  if (warm_start && warm_start->size() != program.num_vars) {
    throw DimensionError("warm start has " + std::to_string(warm_start->size()) +
                         " entries, program has " + std::to_string(program.num_vars));
  }
  InteriorPoint ipm(program, options);
  return ipm.Run(warm_start);
}

FeasibilityReport check_feasibility(const ConicProgram& program,
                                    const Eigen::VectorXd& values, double tolerance) {
  if (values.size() != program.num_vars) {
    throw DimensionError("candidate has wrong number of variables");
  }
  FeasibilityReport report;
  report.worst = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < program.blocks.size(); ++b) {
    const double e = MinEigenvalue(program.blocks[b].evaluate(values));
    report.min_eigenvalues.push_back(e);
    if (e < report.worst) {
      report.worst = e;
      report.worst_block = static_cast<int>(b);
    }
  }
  if (program.blocks.empty()) report.worst = 0.0;
  report.feasible = report.worst >= -tolerance;
  return report;
}

}  // namespace etmpc::sdp
