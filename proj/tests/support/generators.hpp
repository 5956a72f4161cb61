#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "etmpc/config.hpp"

namespace etmpc::testing {

/// Seeded source of random test data.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double Uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int Int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Eigen::MatrixXd Matrix(int rows, int cols, double scale = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (int j = 0; j < cols; ++j) {
      for (int i = 0; i < rows; ++i) m(i, j) = Uniform(-scale, scale);
    }
    return m;
  }
  Eigen::VectorXd Vector(int n, double scale = 1.0) { return Matrix(n, 1, scale); }

  /// Symmetric with eigenvalues in [lo, hi].
  Eigen::MatrixXd Spd(int n, double lo = 0.1, double hi = 3.0) {
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(Matrix(n, n));
    const Eigen::MatrixXd U = qr.householderQ();
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d(i) = Uniform(lo, hi);
    const Eigen::MatrixXd S = U * d.asDiagonal() * U.transpose();
    return 0.5 * (S + S.transpose());
  }

  /// Symmetric with eigenvalues of both signs.
  Eigen::MatrixXd Symmetric(int n, double scale = 1.0) {
    const Eigen::MatrixXd m = Matrix(n, n, scale);
    return 0.5 * (m + m.transpose());
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double MinEig(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (m + m.transpose()),
                                                        Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

inline std::string SourcePath(const std::string& rel) {
  return std::string(ETMPC_SOURCE_DIR) + "/" + rel;
}

inline ScenarioConfig SurrogateConfig() { return load_scenario(SourcePath("scenarios/surrogate.cfg")); }

}  // namespace etmpc::testing
