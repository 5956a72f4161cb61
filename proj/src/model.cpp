#include "etmpc/model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "etmpc/errors.hpp"

namespace etmpc {
namespace {

constexpr double kWeightSumTol = 1e-12;
// ω on the d-ball boundary must not be rejected because of round-off.
constexpr double kBallSlack = 1e-12;

void RequireShape(const Eigen::MatrixXd& M, Eigen::Index rows, Eigen::Index cols,
                  const std::string& what) {
  if (M.rows() != rows || M.cols() != cols) {
    throw DimensionError(what + " is " + std::to_string(M.rows()) + "x" +
                         std::to_string(M.cols()) + ", expected " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

std::mt19937_64 StepEngine(std::uint64_t seed, int k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k)};
  return std::mt19937_64(seq);
}

}  // namespace

PolytopicModel::PolytopicModel(std::vector<int> delays,
                               std::vector<VertexMatrices> vertices,
                               Eigen::MatrixXd D, double u_sat, double d)
    : delays_(std::move(delays)),
      vertices_(std::move(vertices)),
      D_(std::move(D)),
      u_sat_(u_sat),
      d_(d) {
  if (vertices_.empty()) throw ParameterError("model needs at least one vertex");
  if (delays_.empty()) throw ParameterError("model needs at least one delay");
  for (std::size_t i = 0; i < delays_.size(); ++i) {
    if (delays_[i] < 1) throw ParameterError("delays must be >= 1");
    if (i > 0 && delays_[i] <= delays_[i - 1]) {
      throw ParameterError("delays must be strictly increasing");
    }
  }
  if (!(u_sat_ > 0.0)) throw ParameterError("u_sat must be > 0");
  if (!(d_ > 0.0)) throw ParameterError("disturbance bound d must be > 0");

  const Eigen::Index nx = D_.rows();
  const Eigen::Index nu = vertices_.front().B.cols();
  if (nx < 1 || D_.cols() < 1 || nu < 1) {
    throw DimensionError("state, input and disturbance dimensions must be positive");
  }
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    const auto& vm = vertices_[v];
    const std::string tag = "vertex " + std::to_string(v + 1);
    RequireShape(vm.A, nx, nx, tag + " A");
    RequireShape(vm.B, nx, nu, tag + " B");
    if (vm.A_delay.size() != delays_.size()) {
      throw DimensionError(tag + " has " + std::to_string(vm.A_delay.size()) +
                           " delayed matrices, expected " +
                           std::to_string(delays_.size()));
    }
    for (std::size_t r = 0; r < vm.A_delay.size(); ++r) {
      RequireShape(vm.A_delay[r], nx, nx, tag + " A_delay " + std::to_string(r + 1));
    }
  }
}

SchedulingWeights::SchedulingWeights(Eigen::VectorXd alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() < 1) throw ParameterError("scheduling weights are empty");
  for (Eigen::Index i = 0; i < alpha_.size(); ++i) {
    if (!(alpha_(i) >= 0.0 && alpha_(i) <= 1.0)) {
      throw ParameterError("scheduling weight " + std::to_string(i + 1) +
                           " outside [0, 1]");
    }
  }
  if (std::abs(alpha_.sum() - 1.0) > kWeightSumTol) {
    throw ParameterError("scheduling weights must sum to 1");
  }
}

SchedulingWeights SchedulingWeights::Vertex(int num_vertices, int v) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(num_vertices);
  a(v) = 1.0;
  return SchedulingWeights(std::move(a));
}

RealizedMatrices evaluate_matrices(const PolytopicModel& model,
                                   const SchedulingWeights& alpha) {
  if (alpha.size() != model.num_vertices()) {
    throw DimensionError("scheduling weights have length " +
                         std::to_string(alpha.size()) + " but the model has " +
                         std::to_string(model.num_vertices()) + " vertices");
  }
  const int nx = model.state_dim();
  RealizedMatrices out;
  out.A = Eigen::MatrixXd::Zero(nx, nx);
  out.B = Eigen::MatrixXd::Zero(nx, model.input_dim());
  out.A_delay.assign(model.num_delays(), Eigen::MatrixXd::Zero(nx, nx));
  for (int v = 0; v < model.num_vertices(); ++v) {
    const double a = alpha.values()(v);
    const auto& vm = model.vertex(v);
    out.A += a * vm.A;
    out.B += a * vm.B;
    for (int r = 0; r < model.num_delays(); ++r) out.A_delay[r] += a * vm.A_delay[r];
  }
  return out;
}

Eigen::VectorXd saturate(const Eigen::VectorXd& u, double u_sat) {
  return u.cwiseMax(-u_sat).cwiseMin(u_sat);
}

DelayBuffer::DelayBuffer(std::vector<Eigen::VectorXd> newest_first) {
  if (newest_first.empty()) throw DimensionError("delay buffer is empty");
  const Eigen::Index n = newest_first.front().size();
  for (auto& x : newest_first) {
    if (x.size() != n) throw DimensionError("delay buffer entries differ in size");
    history_.push_back(std::move(x));
  }
}

DelayBuffer DelayBuffer::Replicate(const Eigen::VectorXd& x0, int max_delay) {
  return DelayBuffer(std::vector<Eigen::VectorXd>(max_delay + 1, x0));
}

const Eigen::VectorXd& DelayBuffer::lag(int lag) const {
  if (lag < 0 || lag >= size()) {
    throw DimensionError("delay buffer lag " + std::to_string(lag) + " out of range");
  }
  return history_[lag];
}

Eigen::VectorXd DelayBuffer::stacked(int depth) const {
  if (depth < 0 || depth >= size()) {
    throw DimensionError("delay buffer holds fewer than " + std::to_string(depth + 1) +
                         " states");
  }
  const int n = state_dim();
  Eigen::VectorXd z(n * (depth + 1));
  for (int i = 0; i <= depth; ++i) z.segment(i * n, n) = history_[i];
  return z;
}

void DelayBuffer::push(Eigen::VectorXd x_next) {
  if (x_next.size() != state_dim()) throw DimensionError("pushed state has wrong size");
  history_.pop_back();
  history_.push_front(std::move(x_next));
}

DelayBuffer step(const PolytopicModel& model, const DelayBuffer& buffer,
                 const Eigen::VectorXd& u, const Eigen::VectorXd& omega,
                 const SchedulingWeights& alpha) {
  if (buffer.size() != model.max_delay() + 1) {
    throw DimensionError("delay buffer length " + std::to_string(buffer.size()) +
                         " != max delay + 1");
  }
  if (buffer.state_dim() != model.state_dim()) throw DimensionError("state size mismatch");
  if (u.size() != model.input_dim()) throw DimensionError("input size mismatch");
  if (omega.size() != model.disturbance_dim()) {
    throw DimensionError("disturbance size mismatch");
  }
  if (omega.squaredNorm() > model.d_sq() * (1.0 + kBallSlack)) {
    throw ParameterError("disturbance outside the d-ball: |w|^2 = " +
                         std::to_string(omega.squaredNorm()));
  }
  const RealizedMatrices m = evaluate_matrices(model, alpha);
  Eigen::VectorXd next = m.A * buffer.current() + m.B * saturate(u, model.u_sat()) +
                         model.D() * omega;
  for (int r = 0; r < model.num_delays(); ++r) {
    next += m.A_delay[r] * buffer.lag(model.delays()[r]);
  }
  DelayBuffer out = buffer;
  out.push(std::move(next));
  return out;
}

DisturbanceSignal DisturbanceSignal::Zero(int dim) {
  DisturbanceSignal s(Kind::kZero, dim);
  return s;
}

DisturbanceSignal DisturbanceSignal::Sinusoid(int dim, double amplitude,
                                              double frequency, double phase,
                                              double d) {
  if (amplitude * amplitude * dim > d * d * (1.0 + kBallSlack)) {
    throw ParameterError("sinusoidal disturbance exceeds the d-ball: amplitude^2*dim = " +
                         std::to_string(amplitude * amplitude * dim) +
                         " > d^2 = " + std::to_string(d * d));
  }
  DisturbanceSignal s(Kind::kSinusoid, dim);
  s.amplitude_ = amplitude;
  s.frequency_ = frequency;
  s.phase_ = phase;
  s.d_ = d;
  return s;
}

DisturbanceSignal DisturbanceSignal::BoundedRandom(int dim, double amplitude, double d,
                                                   std::uint64_t seed) {
  if (!(amplitude >= 0.0)) throw ParameterError("random disturbance amplitude < 0");
  DisturbanceSignal s(Kind::kBoundedRandom, dim);
  s.amplitude_ = amplitude;
  s.d_ = d;
  s.seed_ = seed;
  return s;
}

DisturbanceSignal DisturbanceSignal::Table(std::vector<Eigen::VectorXd> rows, double d) {
  if (rows.empty()) throw ParameterError("disturbance table is empty");
  const Eigen::Index dim = rows.front().size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) throw DimensionError("disturbance table rows differ in size");
    if (!rows[i].allFinite()) {
      throw ParameterError("disturbance table row " + std::to_string(i + 1) +
                           " is not finite (unbounded signal)");
    }
    if (rows[i].squaredNorm() > d * d * (1.0 + kBallSlack)) {
      throw ParameterError("disturbance table row " + std::to_string(i + 1) +
                           " exceeds the d-ball");
    }
  }
  DisturbanceSignal s(Kind::kTable, static_cast<int>(dim));
  s.table_ = std::move(rows);
  s.d_ = d;
  return s;
}

Eigen::VectorXd DisturbanceSignal::at(int k) const {
  switch (kind_) {
    case Kind::kZero:
      return Eigen::VectorXd::Zero(dim_);
    case Kind::kSinusoid:
      return Eigen::VectorXd::Constant(dim_, amplitude_ * std::sin(frequency_ * k + phase_));
    case Kind::kBoundedRandom: {
      auto engine = StepEngine(seed_, k);
      std::uniform_real_distribution<double> unif(-amplitude_, amplitude_);
      Eigen::VectorXd w(dim_);
      for (int i = 0; i < dim_; ++i) w(i) = unif(engine);
      const double norm = w.norm();
      if (norm > d_) w *= d_ / norm;
      return w;
    }
    case Kind::kTable:
      return table_[static_cast<std::size_t>(k) % table_.size()];
  }
  return Eigen::VectorXd::Zero(dim_);
}

DisturbanceBudget validate_disturbance_budget(const DisturbanceSignal& signal,
                                              const PolytopicModel& model,
                                              int horizon) {
  if (signal.dim() != model.disturbance_dim()) {
    throw DimensionError("disturbance signal dimension does not match D");
  }
  DisturbanceBudget out;
  switch (signal.kind()) {
    case DisturbanceSignal::Kind::kZero:
      out.worst_sq_norm = 0.0;
      break;
    case DisturbanceSignal::Kind::kSinusoid:
      out.worst_sq_norm = signal.amplitude() * signal.amplitude() * signal.dim();
      break;
    case DisturbanceSignal::Kind::kBoundedRandom: {
      const double box = signal.amplitude() * signal.amplitude() * signal.dim();
      out.worst_sq_norm = std::min(box, signal.bound() * signal.bound());
      break;
    }
    case DisturbanceSignal::Kind::kTable: {
      const int n = std::min<int>(horizon, static_cast<int>(signal.table().size()));
      for (int k = 0; k < std::max(n, 1); ++k) {
        out.worst_sq_norm = std::max(out.worst_sq_norm, signal.at(k).squaredNorm());
      }
      break;
    }
  }
  out.within_bound = out.worst_sq_norm <= model.d_sq() * (1.0 + kBallSlack);
  return out;
}

SchedulingSignal SchedulingSignal::Constant(SchedulingWeights alpha) {
  SchedulingSignal s(Kind::kConstant, alpha.size());
  s.constant_ = alpha.values();
  return s;
}

SchedulingSignal SchedulingSignal::Sinusoid(int num_vertices, double frequency) {
  if (num_vertices < 1) throw ParameterError("scheduling needs at least one vertex");
  SchedulingSignal s(Kind::kSinusoid, num_vertices);
  s.frequency_ = frequency;
  return s;
}

SchedulingSignal SchedulingSignal::Random(int num_vertices, std::uint64_t seed) {
  if (num_vertices < 1) throw ParameterError("scheduling needs at least one vertex");
  SchedulingSignal s(Kind::kRandom, num_vertices);
  s.seed_ = seed;
  return s;
}

SchedulingWeights SchedulingSignal::at(int k) const {
  const int L = num_vertices_;
  if (L == 1) return SchedulingWeights::Vertex(1, 0);
  Eigen::VectorXd a(L);
  switch (kind_) {
    case Kind::kConstant:
      return SchedulingWeights(constant_);
    case Kind::kSinusoid:
      for (int v = 0; v < L; ++v) {
        a(v) = 1.0 + std::sin(frequency_ * k + 2.0 * std::numbers::pi * v / L);
      }
      break;
    case Kind::kRandom: {
      // Seeds differ from the disturbance stream by the high bit.
      auto engine = StepEngine(seed_ ^ 0x8000000000000000ULL, k);
      std::exponential_distribution<double> expo(1.0);
      for (int v = 0; v < L; ++v) a(v) = expo(engine);
      break;
    }
  }
  a /= a.sum();
  // Rounding can leave the sum a few ulps from 1; push the residual into the
  // largest weight.
  Eigen::Index imax = 0;
  a.maxCoeff(&imax);
  a(imax) += 1.0 - a.sum();
  return SchedulingWeights(std::move(a));
}

}  // namespace etmpc
