#include "affine_expr.hpp"

#include <numeric>

#include "etmpc/errors.hpp"

namespace etmpc::detail {

AffineExpr::AffineExpr(int rows, int cols)
    : rows_(rows), cols_(cols), constant_(Eigen::MatrixXd::Zero(rows, cols)) {}

AffineExpr AffineExpr::Constant(const Eigen::MatrixXd& value) {
  AffineExpr e(static_cast<int>(value.rows()), static_cast<int>(value.cols()));
  e.constant_ = value;
  return e;
}

AffineExpr AffineExpr::ScaledIdentity(int var, int n, double scale) {
  AffineExpr e(n, n);
  e.coefficient(var) = scale * Eigen::MatrixXd::Identity(n, n);
  return e;
}

Eigen::MatrixXd& AffineExpr::coefficient(int var) {
  auto it = terms_.find(var);
  if (it == terms_.end()) {
    it = terms_.emplace(var, Eigen::MatrixXd::Zero(rows_, cols_)).first;
  }
  return it->second;
}

AffineExpr AffineExpr::transpose() const {
  AffineExpr t(cols_, rows_);
  t.constant_ = constant_.transpose();
  for (const auto& [var, m] : terms_) t.terms_.emplace(var, m.transpose());
  return t;
}

Eigen::MatrixXd AffineExpr::evaluate(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd out = constant_;
  for (const auto& [var, m] : terms_) out += y(var) * m;
  return out;
}

void AffineExpr::add_block(int r0, int c0, const AffineExpr& src) {
  if (r0 < 0 || c0 < 0 || r0 + src.rows_ > rows_ || c0 + src.cols_ > cols_) {
    throw DimensionError("affine sub-block out of range");
  }
  constant_.block(r0, c0, src.rows_, src.cols_) += src.constant_;
  for (const auto& [var, m] : src.terms_) {
    coefficient(var).block(r0, c0, src.rows_, src.cols_) += m;
  }
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw DimensionError("affine expression size mismatch in +");
  }
  constant_ += other.constant_;
  for (const auto& [var, m] : other.terms_) coefficient(var) += m;
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other) {
  return *this += (-1.0) * other;
}

AffineExpr operator*(double s, const AffineExpr& e) {
  AffineExpr out(e.rows_, e.cols_);
  out.constant_ = s * e.constant_;
  for (const auto& [var, m] : e.terms_) out.terms_.emplace(var, s * m);
  return out;
}

AffineExpr operator*(const Eigen::MatrixXd& m, const AffineExpr& e) {
  if (m.cols() != e.rows_) throw DimensionError("affine expression size mismatch in M*E");
  AffineExpr out(static_cast<int>(m.rows()), e.cols_);
  out.constant_ = m * e.constant_;
  for (const auto& [var, c] : e.terms_) out.terms_.emplace(var, m * c);
  return out;
}

AffineExpr operator*(const AffineExpr& e, const Eigen::MatrixXd& m) {
  if (e.cols_ != m.rows()) throw DimensionError("affine expression size mismatch in E*M");
  AffineExpr out(e.rows_, static_cast<int>(m.cols()));
  out.constant_ = e.constant_ * m;
  for (const auto& [var, c] : e.terms_) out.terms_.emplace(var, c * m);
  return out;
}

BlockBuilder::BlockBuilder(std::vector<int> sizes)
    : sizes_(std::move(sizes)),
      total_(std::accumulate(sizes_.begin(), sizes_.end(), 0)),
      full_(total_, total_) {
  offsets_.resize(sizes_.size());
  std::exclusive_scan(sizes_.begin(), sizes_.end(), offsets_.begin(), 0);
}

void BlockBuilder::set(int i, int j, const AffineExpr& e) {
  if (i < j) throw DimensionError("BlockBuilder::set expects a lower-triangle block");
  if (e.rows() != sizes_.at(i) || e.cols() != sizes_.at(j)) {
    throw DimensionError("block (" + std::to_string(i) + "," + std::to_string(j) +
                         ") has the wrong size");
  }
  full_.add_block(offsets_[i], offsets_[j], e);
  if (i != j) full_.add_block(offsets_[j], offsets_[i], e.transpose());
}

sdp::AffineBlock BlockBuilder::build(const std::string& tag) const {
  sdp::AffineBlock blk;
  blk.tag = tag;
  blk.size = total_;
  blk.constant = 0.5 * (full_.constant() + full_.constant().transpose());
  for (const auto& [var, m] : full_.terms()) {
    const Eigen::MatrixXd s = 0.5 * (m + m.transpose());
    sdp::VarCoefficient vc{var, {}};
    for (int c = 0; c < total_; ++c) {
      for (int r = 0; r < total_; ++r) {
        if (s(r, c) != 0.0) vc.entries.push_back({r, c, s(r, c)});
      }
    }
    if (!vc.entries.empty()) blk.coefficients.push_back(std::move(vc));
  }
  return blk;
}

}  // namespace etmpc::detail
