#pragma once

// Internal stability of feedback loops and the DC-gain robust stability
// test for NI / SNI positive-feedback interconnections.

#include <string>

#include "negimag/ni_analysis.hpp"
#include "negimag/state_space.hpp"

namespace negimag {

struct InternalStability {
  bool stable = false;
  ComplexVector poles;
  /// Largest real part among the closed-loop poles (-inf for a static loop).
  double max_real_part = 0.0;
};

/// Stable iff every closed-loop pole has Re < -kAxisTol * (1 + |p|).
/// Throws IllPosedLoopError for an algebraic loop.
InternalStability internal_stability(const StateSpace& m, const StateSpace& n,
                                     LoopSign sign = LoopSign::Positive);

/// Width of the band around lambda_max = 1 reported as marginal.
inline constexpr double kMarginalBand = 1e-6;

enum class DcVerdict { Stable, Unstable, Marginal };

struct Theorem5Options {
  SweepOptions sweep;
  /// Decide the NI / SNI hypotheses with the LMI certificate and the zeros
  /// test instead of frequency sweeps.
  bool use_certificates = false;
};

struct StabilityReport {
  bool m_is_ni = false;
  bool n_is_sni = false;
  bool boundary_product_zero = false;  // M(inf) N(inf) = 0
  bool n_inf_psd = false;              // N(inf) >= 0
  bool hypotheses_hold = false;
  std::string m_reason;
  std::string n_reason;

  /// Largest real part of eig(M(0) N(0)); NaN when a DC gain does not exist.
  double lambda_max_dc = 0.0;
  /// Largest |Im| among eig(M(0) N(0)).
  double dc_imag_residual = 0.0;
  bool dc_eigs_real = false;
  DcVerdict dc_verdict = DcVerdict::Unstable;

  /// The conclusion: from the DC-gain test when the hypotheses hold and
  /// lambda_max is outside the marginal band, otherwise from the poles.
  bool internally_stable = false;
  bool theorem_applies = false;
  bool pole_test_stable = false;
  ComplexVector closed_loop_poles;
  std::string summary;
};

StabilityReport theorem5_verdict(const StateSpace& m, const StateSpace& n, const Theorem5Options& opts = {});

std::string to_string(DcVerdict v);

}  // namespace negimag
