#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "etmpc/sdp.hpp"

namespace etmpc::detail {

/// Matrix-valued affine function C + Σᵢ yᵢ Mᵢ with dense per-variable
/// coefficients. Only used while assembling; blocks are small.
class AffineExpr {
 public:
  AffineExpr(int rows, int cols);

  static AffineExpr Constant(const Eigen::MatrixXd& value);
  /// yᵥ·scale·I_n.
  static AffineExpr ScaledIdentity(int var, int n, double scale = 1.0);
  /// Matrix whose (r, c) entry is the variable index(r, c).
  template <typename IndexFn>
  static AffineExpr Variable(int rows, int cols, IndexFn index) {
    AffineExpr e(rows, cols);
    for (int c = 0; c < cols; ++c) {
      for (int r = 0; r < rows; ++r) e.coefficient(index(r, c))(r, c) += 1.0;
    }
    return e;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const Eigen::MatrixXd& constant() const { return constant_; }
  const std::map<int, Eigen::MatrixXd>& terms() const { return terms_; }

  AffineExpr transpose() const;
  /// Adds `src` into the sub-block starting at (r0, c0).
  void add_block(int r0, int c0, const AffineExpr& src);
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& y) const;

  AffineExpr& operator+=(const AffineExpr& other);
  AffineExpr& operator-=(const AffineExpr& other);

  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  friend AffineExpr operator*(double s, const AffineExpr& e);
  friend AffineExpr operator*(const Eigen::MatrixXd& m, const AffineExpr& e);
  friend AffineExpr operator*(const AffineExpr& e, const Eigen::MatrixXd& m);

 private:
  Eigen::MatrixXd& coefficient(int var);

  int rows_;
  int cols_;
  Eigen::MatrixXd constant_;
  std::map<int, Eigen::MatrixXd> terms_;
};

/// Symmetric block matrix assembled from lower-triangle placements; the
/// upper triangle is filled with transposes.
class BlockBuilder {
 public:
  explicit BlockBuilder(std::vector<int> sizes);

  /// Places `e` at block (i, j), i ≥ j, and eᵀ at (j, i).
  void set(int i, int j, const AffineExpr& e);

  int size() const { return total_; }
  sdp::AffineBlock build(const std::string& tag) const;

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int total_;
  AffineExpr full_;
};

}  // namespace etmpc::detail
