#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include <Eigen/Dense>

namespace etmpc {

/// Matrices of one polytope vertex: A^v, the delayed-state matrices
/// Ã_1^v..Ã_l^v (one per delay channel) and B^v.
struct VertexMatrices {
  Eigen::MatrixXd A;
  std::vector<Eigen::MatrixXd> A_delay;
  Eigen::MatrixXd B;
};

/**
 * Disturbed polytopic LPV plant with state delays and input saturation:
 *
 *   x_{k+1} = A(α)x_k + Σ_ρ Ã_ρ(α) x_{k-τ_ρ} + B(α) σ(u_k) + D ω_k,
 *
 * with (A, Ã_ρ, B) a convex combination of the vertex matrices, σ the
 * component-wise clip to [-u_sat, u_sat] and ω_kᵀω_k ≤ d².
 *
 * Immutable after construction.
 */
class PolytopicModel {
 public:
  PolytopicModel(std::vector<int> delays, std::vector<VertexMatrices> vertices,
                 Eigen::MatrixXd D, double u_sat, double d);

  int state_dim() const { return static_cast<int>(D_.rows()); }
  int input_dim() const { return static_cast<int>(vertices_.front().B.cols()); }
  int disturbance_dim() const { return static_cast<int>(D_.cols()); }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_delays() const { return static_cast<int>(delays_.size()); }
  const std::vector<int>& delays() const { return delays_; }
  int max_delay() const { return delays_.back(); }

  const VertexMatrices& vertex(int v) const { return vertices_.at(v); }
  const std::vector<VertexMatrices>& vertices() const { return vertices_; }
  const Eigen::MatrixXd& D() const { return D_; }
  double u_sat() const { return u_sat_; }
  double d() const { return d_; }
  double d_sq() const { return d_ * d_; }

 private:
  std::vector<int> delays_;
  std::vector<VertexMatrices> vertices_;
  Eigen::MatrixXd D_;
  double u_sat_;
  double d_;
};

/// Convex vertex weights α(k): α_v ∈ [0, 1], Σ α_v = 1 (to 1e-12).
class SchedulingWeights {
 public:
  explicit SchedulingWeights(Eigen::VectorXd alpha);

  /// All weight on vertex `v` of an `num_vertices`-vertex polytope.
  static SchedulingWeights Vertex(int num_vertices, int v);

  const Eigen::VectorXd& values() const { return alpha_; }
  int size() const { return static_cast<int>(alpha_.size()); }

 private:
  Eigen::VectorXd alpha_;
};

/// Plant matrices realized at a particular α.
struct RealizedMatrices {
  Eigen::MatrixXd A;
  std::vector<Eigen::MatrixXd> A_delay;
  Eigen::MatrixXd B;
};

RealizedMatrices evaluate_matrices(const PolytopicModel& model,
                                   const SchedulingWeights& alpha);

/// σ_i(u_i) = sign(u_i)·min(u_sat, |u_i|).
Eigen::VectorXd saturate(const Eigen::VectorXd& u, double u_sat);

/**
 * The last τ_l + 1 states, newest first: (x_k, x_{k-1}, ..., x_{k-τ_l}).
 * Owned by a single simulation.
 */
class DelayBuffer {
 public:
  /// `newest_first` must hold exactly max_delay + 1 equally sized states.
  explicit DelayBuffer(std::vector<Eigen::VectorXd> newest_first);

  /// Pre-initial history x_{-1}..x_{-τ} set equal to x0.
  static DelayBuffer Replicate(const Eigen::VectorXd& x0, int max_delay);

  const Eigen::VectorXd& current() const { return history_.front(); }
  /// x_{k-lag}, 0 ≤ lag ≤ max_delay.
  const Eigen::VectorXd& lag(int lag) const;
  int size() const { return static_cast<int>(history_.size()); }
  int state_dim() const { return static_cast<int>(history_.front().size()); }

  /// z̄ = [x_kᵀ, x_{k-1}ᵀ, ..., x_{k-depth}ᵀ]ᵀ.
  Eigen::VectorXd stacked(int depth) const;

  /// Shifts the window by one: `x_next` becomes the newest entry.
  void push(Eigen::VectorXd x_next);

 private:
  std::deque<Eigen::VectorXd> history_;
};

/// Advances the plant one step under the true saturation σ.
/// Throws ParameterError if ω lies outside the d-ball.
DelayBuffer step(const PolytopicModel& model, const DelayBuffer& buffer,
                 const Eigen::VectorXd& u, const Eigen::VectorXd& omega,
                 const SchedulingWeights& alpha);

/**
 * Bounded disturbance sequence ω_k. Pure function of k (the random kind
 * derives its per-step draw from (seed, k)), so one instance can be shared
 * by concurrent runs.
 */
class DisturbanceSignal {
 public:
  enum class Kind { kZero, kSinusoid, kBoundedRandom, kTable };

  /// ω_k = 0.
  static DisturbanceSignal Zero(int dim);
  /// ω_k = amplitude·sin(frequency·k + phase)·[1, ..., 1]ᵀ.
  /// Rejected at construction when amplitude²·dim > d².
  static DisturbanceSignal Sinusoid(int dim, double amplitude, double frequency,
                                    double phase, double d);
  /// Uniform draws in [-amplitude, amplitude]^dim, radially projected onto
  /// the d-ball when they leave it.
  static DisturbanceSignal BoundedRandom(int dim, double amplitude, double d,
                                         std::uint64_t seed);
  /// Explicit samples, repeated cyclically. Every row must satisfy the bound.
  static DisturbanceSignal Table(std::vector<Eigen::VectorXd> rows, double d);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double amplitude() const { return amplitude_; }
  double frequency() const { return frequency_; }
  double phase() const { return phase_; }
  double bound() const { return d_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Eigen::VectorXd>& table() const { return table_; }

  Eigen::VectorXd at(int k) const;

 private:
  DisturbanceSignal(Kind kind, int dim) : kind_(kind), dim_(dim) {}

  Kind kind_;
  int dim_;
  double amplitude_ = 0.0;
  double frequency_ = 1.0;
  double phase_ = 0.0;
  double d_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<Eigen::VectorXd> table_;
};

struct DisturbanceBudget {
  double worst_sq_norm = 0.0;
  bool within_bound = true;
};

/// Supremum of ω_kᵀω_k over k ∈ [0, horizon) and whether it stays ≤ d².
/// For the sinusoid the analytic supremum amplitude²·dim is reported.
DisturbanceBudget validate_disturbance_budget(const DisturbanceSignal& signal,
                                              const PolytopicModel& model,
                                              int horizon);

/// Generator of α(k) used during simulation.
class SchedulingSignal {
 public:
  enum class Kind { kConstant, kSinusoid, kRandom };

  static SchedulingSignal Constant(SchedulingWeights alpha);
  /// α_v(k) ∝ 1 + sin(frequency·k + 2πv/L).
  static SchedulingSignal Sinusoid(int num_vertices, double frequency);
  /// Flat-Dirichlet draw per step, derived from (seed, k).
  static SchedulingSignal Random(int num_vertices, std::uint64_t seed);

  Kind kind() const { return kind_; }
  int num_vertices() const { return num_vertices_; }
  double frequency() const { return frequency_; }
  std::uint64_t seed() const { return seed_; }
  const Eigen::VectorXd& constant_weights() const { return constant_; }

  SchedulingWeights at(int k) const;

 private:
  SchedulingSignal(Kind kind, int num_vertices)
      : kind_(kind), num_vertices_(num_vertices) {}

  Kind kind_;
  int num_vertices_;
  double frequency_ = 0.3;
  std::uint64_t seed_ = 0;
  Eigen::VectorXd constant_;
};

}  // namespace etmpc
