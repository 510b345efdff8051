#pragma once

// Controller families for flexible structures (positive-position feedback,
// resonant, integral resonant) and root-locus tuning of the integral
// resonant gain.

#include <vector>

#include "negimag/state_space.hpp"

namespace negimag {

/// One second-order section with gain k, damping ratio zeta and natural
/// frequency omega; all three must be positive.
struct SecondOrderTerm {
  double k = 1.0;
  double zeta = 0.1;
  double omega = 1.0;
};

/// MIMO positive-position feedback K^T (s^2 I + D s + Omega)^{-1} K with
/// K r x m, D and Omega r x r symmetric positive definite.
struct MimoPpfParams {
  Matrix K;
  Matrix D;
  Matrix Omega;
};

/// Rank-one MIMO resonant section v v^T times the scalar section shape.
struct ResonantVectorTerm {
  Vector v;
  double zeta = 0.1;
  double omega = 1.0;
};

/// sum_i k_i / (s^2 + 2 zeta_i omega_i s + omega_i^2)
StateSpace ppf(const std::vector<SecondOrderTerm>& terms);
StateSpace ppf(const MimoPpfParams& params);

/// sum_i -k_i s^2 / (s^2 + 2 zeta_i omega_i s + omega_i^2)
StateSpace resonant_acc(const std::vector<SecondOrderTerm>& terms);
/// sum_i -s^2 / (s^2 + 2 zeta_i omega_i s + omega_i^2) alpha_i alpha_i^T
StateSpace resonant_acc(const std::vector<ResonantVectorTerm>& terms);

/// sum_i -k_i s (s + 2 zeta_i omega_i) / (s^2 + 2 zeta_i omega_i s + omega_i^2)
StateSpace resonant_vel_type(const std::vector<SecondOrderTerm>& terms);
/// sum_i -s (s + 2 zeta_i omega_i) / (s^2 + 2 zeta_i omega_i s + omega_i^2) beta_i beta_i^T
StateSpace resonant_vel_type(const std::vector<ResonantVectorTerm>& terms);

struct IrcParams {
  Matrix Gamma;  // symmetric positive definite
  Matrix Phi;    // symmetric positive definite
};

/// (sI + Gamma Phi)^{-1} Gamma, realized as (-Gamma Phi, Gamma, I, 0).
StateSpace irc(const IrcParams& params);
StateSpace irc(double gamma, double phi);

/// Explicit certificate for the first augmented SNI lemma applied to irc():
/// diag(Phi^{-1}, 0) + eps [[(1/a + 1) I, (1/a + 1) I], [(1/a + 1) I, I]].
Matrix irc_snil1_certificate(const IrcParams& params, double alpha, double eps);

/// Phi = margin * P(0). The plant DC gain must be symmetric positive
/// definite (a positive scalar in the SISO case).
Matrix choose_phi(const StateSpace& plant, double margin);

enum class DampingMeasure {
  DecayRate,     // -Re(p)
  DampingRatio,  // -Re(p) / |p|
};

struct IrcDesignOptions {
  double gamma_min = 1e3;
  double gamma_max = 1e8;
  int points_per_decade = 200;
  /// Explicit sorted gain grid; overrides the three fields above.
  std::vector<double> gamma_grid;
  DampingMeasure measure = DampingMeasure::DecayRate;
  /// Relative precision of the refined optimum.
  double refine_tol = 1e-3;
};

struct LocusPoint {
  double gamma = 0.0;
  /// Closed-loop poles, ordered so that index i follows the same branch
  /// across the whole locus.
  ComplexVector poles;
  bool stable = false;
};

struct IrcDesign {
  double gamma_star = 0.0;
  /// Upper-half-plane pole of the tracked first-mode branch at gamma_star.
  Complex tracked_pole;
  double zeta_star = 0.0;
  double decay_star = 0.0;
  Index tracked_index = 0;
  /// Damping ratio of the lowest open-loop resonance.
  double open_loop_zeta = 0.0;
  std::vector<LocusPoint> locus;
};

/// Sweeps the gain of the positive-feedback loop plant x irc(gamma, phi),
/// tracks every closed-loop pole branch by minimum-distance assignment, and
/// maximizes the chosen damping measure of the branch that starts at the
/// lowest open-loop resonance. The best grid point is refined with Brent's
/// method. Unstable loops are excluded from the search.
IrcDesign design_irc_gamma(const StateSpace& plant, double phi, const IrcDesignOptions& opts = {});

/// Permutation p minimizing sum_i cost(i, p[i]) over a square cost matrix.
std::vector<Index> min_cost_assignment(const Matrix& cost);

}  // namespace negimag
