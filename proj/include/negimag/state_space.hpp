#pragma once

// State-space and modal system representations, frequency-response
// evaluation, interconnection algebra and structural checks.

#include <vector>

#include "negimag/numerics.hpp"

namespace negimag {

/// Continuous-time realization x' = Ax + Bu, y = Cx + Du. Immutable after
/// construction. n = 0 is allowed and denotes the static gain D.
class StateSpace {
 public:
  StateSpace(Matrix a, Matrix b, Matrix c, Matrix d);

  static StateSpace static_gain(const Matrix& d);

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const Matrix& C() const { return c_; }
  const Matrix& D() const { return d_; }

  Index num_states() const { return a_.rows(); }
  Index num_inputs() const { return b_.cols(); }
  Index num_outputs() const { return c_.rows(); }
  bool is_square() const { return num_inputs() == num_outputs(); }

 private:
  Matrix a_, b_, c_, d_;
};

enum class OutputKind { Position, Velocity };

/// One lightly damped resonance: psi psi^T / (s^2 + kappa s + omega^2).
struct Mode {
  double omega = 1.0;  // rad/s, > 0
  double kappa = 1.0;  // 1/s, > 0
  Vector psi;          // modal input/output vector, one entry per channel
};

/// Truncated modal expansion of a flexible structure with colocated
/// actuators and position (or velocity) sensors.
class ModalModel {
 public:
  ModalModel(Index num_channels, std::vector<Mode> modes,
             OutputKind output = OutputKind::Position);

  Index num_channels() const { return channels_; }
  const std::vector<Mode>& modes() const { return modes_; }
  OutputKind output() const { return output_; }

 private:
  Index channels_;
  std::vector<Mode> modes_;
  OutputKind output_;
};

/// C (sI - A)^{-1} B + D. Throws PoleProximityError when sI - A is
/// numerically singular (reciprocal condition below ~1e-13).
ComplexMatrix eval(const StateSpace& sys, Complex s);
/// Strictly proper part C (sI - A)^{-1} B only.
ComplexMatrix eval_strictly_proper(const StateSpace& sys, Complex s);

/// Explicit modal sum, the reference the state-space route is tested against.
ComplexMatrix eval_modal_sum(const ModalModel& model, Complex s);

/// Block-diagonal companion realization, one 2x2 block per mode:
/// A_i = [[0, 1], [-w^2, -k]], B_i = [0; psi^T], C_i = psi [1 0] (position)
/// or psi [0 1] (velocity).
StateSpace modal_to_ss(const ModalModel& model);

/// Parallel sum: transfer function P1(s) + P2(s).
StateSpace add(const StateSpace& a, const StateSpace& b);
/// Difference P1(s) - P2(s).
StateSpace subtract(const StateSpace& a, const StateSpace& b);
/// k * P(s).
StateSpace scale(const StateSpace& sys, double k);
/// Cascade: transfer function first followed by second, i.e. second(s) * first(s).
StateSpace series(const StateSpace& first, const StateSpace& second);

/// Realization of M^T(-s): (-A^T, C^T, -B^T, D^T).
StateSpace paraconjugate_transpose(const StateSpace& sys);

enum class LoopSign { Positive, Negative };

/// Feedback interconnection u1 = w1 + sign * y2, u2 = w2 + y1 with
/// y1 = M u1 and y2 = N u2.
struct FeedbackLoop {
  StateSpace M;
  StateSpace N;
  LoopSign sign = LoopSign::Positive;
};

/// Closed loop from [w1; w2] to [y1; y2]. For the positive sign this is
/// T(s) = [[M(I-NM)^{-1}, M(I-NM)^{-1}N], [N(I-MN)^{-1}M, N(I-MN)^{-1}]].
/// Throws IllPosedLoopError if I - sign D_N D_M is singular.
StateSpace closed_loop(const FeedbackLoop& loop);
StateSpace positive_feedback(const StateSpace& m, const StateSpace& n);

/// Redheffer star product of two 2m x 2m partitioned systems with
/// [y1; u2] = M [w1; u1] and [u1; y2] = N [u2; w2]; output maps
/// [w1; w2] -> [y1; y2].
StateSpace star_product(const StateSpace& m, const StateSpace& n);

/// Closes v = z around a system with inputs [w; v] and outputs [y; z],
/// where dim(w) = num_exogenous_inputs and dim(y) = num_exogenous_outputs.
StateSpace lower_lft_identity(const StateSpace& g, Index num_exogenous_inputs,
                              Index num_exogenous_outputs);

ComplexVector poles(const StateSpace& sys);
/// D - C A^{-1} B. Throws SingularMatrixError for a pole at the origin.
Matrix dc_gain(const StateSpace& sys);
Matrix inf_gain(const StateSpace& sys);

/// Rank threshold: singular values below 1e-8 * sigma_max count as zero.
inline constexpr double kMinimalityRankTol = 1e-8;
Matrix controllability_matrix(const StateSpace& sys);
Matrix observability_matrix(const StateSpace& sys);
bool is_controllable(const StateSpace& sys, double rel_tol = kMinimalityRankTol);
bool is_observable(const StateSpace& sys, double rel_tol = kMinimalityRankTol);
bool is_minimal(const StateSpace& sys, double rel_tol = kMinimalityRankTol);

/// Block-diagonal realization of siso(s) * I_m.
StateSpace diagonal_replicate(const StateSpace& siso, Index m);

/// Invariant zeros of a square system from the generalized eigenvalues of
/// the pencil ([[A, B], [C, D]], diag(I, 0)); infinite eigenvalues dropped,
/// including those of modulus above 1e5 * ||pencil||.
struct InvariantZeros {
  ComplexVector zeros;
  bool degenerate = false;  // the pencil is singular (normal rank deficient)
};
InvariantZeros invariant_zeros(const StateSpace& sys);

}  // namespace negimag
