#pragma once

// Negative-imaginary, strictly negative-imaginary and positive-real
// classification by frequency sweep, LMI certificate and zeros test.

#include <optional>
#include <string>
#include <vector>

#include "negimag/lmi.hpp"
#include "negimag/state_space.hpp"

namespace negimag {

/// Eigenvalues with |Re| below kAxisTol * (1 + |lambda|) count as lying on
/// the imaginary axis; the same band classifies zeros.
inline constexpr double kAxisTol = 1e-7;
/// Smallest absolute radius of the band of zeros treated as "at the origin".
inline constexpr double kOriginTol = 1e-8;

struct FrequencyGrid {
  std::vector<double> points;  // strictly increasing, positive
  bool include_zero = true;
};

/// ppd points per decade over [wmin, wmax], both endpoints included.
FrequencyGrid log_grid(double wmin, double wmax, int points_per_decade, bool include_zero = true);
/// [1e-3 rho_min, 1e3 rho_max] over the nonzero pole magnitudes, 200 points
/// per decade, plus omega = 0.
FrequencyGrid default_grid(const StateSpace& sys, int points_per_decade = 200);

struct SweepOptions {
  /// Non-strict checks accept lambda_min >= -tol * (1 + ||P(jw)||).
  double tol = 1e-8;
  /// Strict checks require lambda_min > strict_tol * ||P(jw) - D||.
  double strict_tol = 1e-12;
  /// Refine each local minimum of the sampled margin with Brent's method.
  bool refine = true;
  int max_refinements = 24;
};

struct FreqVerdict {
  bool holds = false;
  double worst_frequency = 0.0;
  /// Smallest eigenvalue of the tested Hermitian matrix at worst_frequency.
  double worst_margin = 0.0;
  /// Frequencies actually evaluated (grid plus refinement points), sorted.
  std::vector<double> grid;
  std::string reason;
  /// For the strictly positive real check: the pole shift that succeeded.
  double epsilon_shift = 0.0;
};

enum class PoleLocation { OpenLeft, ImaginaryAxis, OpenRight };
/// Worst pole location; OpenLeft for a static system.
PoleLocation classify_poles(const StateSpace& sys);

/// H(w) = j (P(jw) - P(jw)^*).
ComplexMatrix hermitian_imaginary_part(const StateSpace& sys, double omega);

FreqVerdict check_ni_sweep(const StateSpace& sys, const FrequencyGrid& grid,
                           const SweepOptions& opts = {});
FreqVerdict check_sni_sweep(const StateSpace& sys, const FrequencyGrid& grid,
                            const SweepOptions& opts = {});

FreqVerdict check_positive_real(const StateSpace& sys, const FrequencyGrid& grid,
                                const SweepOptions& opts = {});
/// Positive-real check of P(s - eps) for eps over a geometric ladder; the
/// first success is recorded in epsilon_shift.
FreqVerdict check_strictly_positive_real(const StateSpace& sys, const FrequencyGrid& grid,
                                         const SweepOptions& opts = {},
                                         std::vector<double> ladder = {1e-6, 1e-4, 1e-2});

/// Y >= 0 with AY + YA^T <= 0 and B + AYC^T = 0.
LmiProblem ni_lemma_problem(const StateSpace& sys);

struct NiLmiResult {
  bool is_ni = false;
  std::optional<LmiCertificate> certificate;
  LmiStatus status = LmiStatus::Infeasible;
  bool minimal = true;
  std::vector<std::string> warnings;
  std::string reason;
};

NiLmiResult check_ni_lmi(const StateSpace& sys, const LmiOptions& opts = {});

/// Analytic NI-lemma certificate for the companion realization of a
/// position-output modal model: blockdiag(diag(1/w_i^2, 1)).
Matrix modal_ni_certificate(const ModalModel& model);

struct SniZerosResult {
  bool is_sni = false;
  /// All finite invariant zeros of M(s) - M^T(-s).
  ComplexVector zeros;
  /// Zeros on the imaginary axis away from the origin.
  std::vector<Complex> axis_zeros;
  bool degenerate = false;
  std::string reason;
};

/// SNI test for an NI system: M(s) - M^T(-s) must have no imaginary-axis
/// transmission zeros other than at s = 0. Falls back to check_sni_sweep on
/// the default grid when the pencil is degenerate.
SniZerosResult check_sni_zeros(const StateSpace& sys);

struct SniSufficientResult {
  bool holds = false;
  LmiResult lmi;
  std::string reason;
};

/// Augmented system (diag(A, -aI), [B; eps I], [C, -I], D).
StateSpace snil1_augmented(const StateSpace& sys, double alpha, double eps);
/// Augmented system (diag(A, -aI, -bI), [B; eps I; eps I], [C, -I, -I], D).
StateSpace snil2_augmented(const StateSpace& sys, double alpha, double beta, double eps);

/// Sufficient SNI test: the augmented system passes the NI-lemma LMIs.
/// A false result is inconclusive.
SniSufficientResult sni_sufficient_snil1(const StateSpace& sys, double alpha, double eps,
                                         const LmiOptions& opts = {});
SniSufficientResult sni_sufficient_snil2(const StateSpace& sys, double alpha, double beta,
                                         double eps, const LmiOptions& opts = {});

/// Q(s) = s (P(s) - P(inf)), realized as (A, B, CA, CB). Q + Q^* = w H(w) on
/// the imaginary axis.
StateSpace rotate_to_positive_real(const StateSpace& sys);

}  // namespace negimag
