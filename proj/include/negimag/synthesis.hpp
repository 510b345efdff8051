#pragma once

// State-feedback synthesis that makes the closed loop from the uncertainty
// output to its input negative imaginary with DC gain below one.

#include <optional>
#include <string>
#include <vector>

#include "negimag/lmi.hpp"
#include "negimag/ni_analysis.hpp"
#include "negimag/state_space.hpp"

namespace negimag {

/// x' = Ax + B1 w + B2 u, z = C1 x, with w = Delta(s) z for an SNI
/// uncertainty satisfying |lambda_max(Delta(0))| <= 1 and Delta(inf) >= 0.
struct UncertainPlant {
  Matrix A;
  Matrix B1;
  Matrix B2;
  Matrix C1;

  void validate() const;
  Index num_states() const { return A.rows(); }
};

enum class Lmi2Form {
  /// Off-diagonal block as an equality and the (1,1) block as a cone.
  Split,
  /// The full block matrix [[AY + YA^T + B2M + M^T B2^T + eps I, *], [*, 0]] <= 0.
  Block,
};

/// Variables Y (symmetric n x n, index 0) and M (m x n, index 1).
LmiProblem synthesis_lmi_problem(const UncertainPlant& plant, double eps, Lmi2Form form = Lmi2Form::Split);

/// G_cl = (A + B2 K, B1, C1, 0).
StateSpace closed_loop_gcl(const UncertainPlant& plant, const Matrix& k);

struct ClosedLoopReport {
  bool hurwitz = false;
  ComplexVector closed_loop_poles;
  bool ni_lmi = false;
  std::string ni_lmi_reason;
  bool ni_sweep = false;
  /// SNI sweep of G_cl; for SISO loops this is the phase lying in (-pi, 0)
  /// at every w > 0.
  bool phase_in_range = false;
  Matrix gcl0;
  double sigma_max_gcl0 = 0.0;
  bool small_dc_gain = false;  // sigma_max(G_cl(0)) < 1
  bool gcl0_psd = false;
  /// ||G_cl(0) - C1 Y C1^T||, when a certificate Y was supplied.
  std::optional<double> identity_error;
  bool identity_ok = true;
  /// Robust stability against the uncertainty class by the DC-gain test.
  bool robust = false;
  bool passed = false;
  std::vector<std::string> notes;
};

ClosedLoopReport verify_closed_loop(const UncertainPlant& plant, const Matrix& k,
                                    const std::optional<Matrix>& y = std::nullopt,
                                    const SweepOptions& sweep = {});

struct SynthesisOptions {
  /// Tried in order after the requested eps.
  std::vector<double> eps_ladder = {1e-6, 1e-8, 1e-4};
  LmiOptions lmi;
};

struct SynthesisResult {
  bool feasible = false;
  double eps = 0.0;
  Matrix K;
  Matrix Y;
  Matrix M;
  std::optional<StateSpace> gcl;
  ClosedLoopReport verification;
  LmiResult lmi;
  std::vector<double> eps_tried;
  std::string message;
};

SynthesisResult synthesize_state_feedback(const UncertainPlant& plant, double eps = 1e-6,
                                          const SynthesisOptions& opts = {});

}  // namespace negimag
