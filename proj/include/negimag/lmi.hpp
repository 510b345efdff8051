#pragma once

// Feasibility solver for small dense linear matrix inequality systems.
//
// A problem declares matrix decision variables and constraints written as
// ordinary functions of the variable values. Every constraint function must
// be affine; its coefficient matrices are recovered by evaluation at the
// origin and at unit vectors, so the same callable serves both the solver and
// the independent verifier.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "negimag/numerics.hpp"

namespace negimag {

struct VariableId {
  std::size_t index = 0;
};

struct VariableSpec {
  std::string name;
  Index rows = 0;
  Index cols = 0;
  bool symmetric = false;

  Index num_scalars() const { return symmetric ? rows * (rows + 1) / 2 : rows * cols; }
};

/// Values of all decision variables, indexed by VariableId::index.
class VariableValues {
 public:
  VariableValues() = default;
  explicit VariableValues(std::vector<Matrix> values) : values_(std::move(values)) {}

  const Matrix& operator[](VariableId id) const { return values_.at(id.index); }
  Matrix& operator[](VariableId id) { return values_.at(id.index); }
  std::size_t size() const { return values_.size(); }
  const std::vector<Matrix>& all() const { return values_; }

 private:
  std::vector<Matrix> values_;
};

using AffineExpression = std::function<Matrix(const VariableValues&)>;

enum class Inequality {
  PositiveSemidefinite,  // F >= 0
  PositiveDefinite,      // F > 0
  NegativeSemidefinite,  // F <= 0
  NegativeDefinite,      // F < 0
};

struct ConeConstraint {
  std::string name;
  Inequality sense;
  AffineExpression expr;
};

struct EqualityConstraint {
  std::string name;
  AffineExpression expr;
};

/// Affine decomposition F(x) = F0 + sum_k x_k F_k over the packed scalars x.
struct AffineCoefficients {
  Matrix constant;
  std::vector<Matrix> terms;
};

class LmiProblem {
 public:
  VariableId add_symmetric(std::string name, Index n);
  VariableId add_matrix(std::string name, Index rows, Index cols);

  void add_cone(std::string name, Inequality sense, AffineExpression expr);
  void add_equality(std::string name, AffineExpression expr);

  const std::vector<VariableSpec>& variables() const { return variables_; }
  const std::vector<ConeConstraint>& cones() const { return cones_; }
  const std::vector<EqualityConstraint>& equalities() const { return equalities_; }

  /// Total number of scalar unknowns after exploiting symmetry.
  Index num_scalars() const;
  VariableValues unpack(const Vector& x) const;
  Vector pack(const VariableValues& values) const;
  VariableValues zeros() const;

  AffineCoefficients coefficients(const AffineExpression& expr) const;

 private:
  std::vector<VariableSpec> variables_;
  std::vector<ConeConstraint> cones_;
  std::vector<EqualityConstraint> equalities_;
};

struct VerifyTolerances {
  /// Required margin of strict constraints, relative to the constraint scale.
  /// A negative value tolerates that much violation, for checking values
  /// that were rounded for print.
  double strictness = 1e-8;
  /// Allowed violation of non-strict constraints, relative.
  double cone_tol = 1e-9;
  /// Allowed equality residual, relative.
  double eq_tol = 1e-9;
};

/// Per-constraint outcome. For cones, `value` is the smallest eigenvalue of
/// F (or of -F for "<=" senses); for equalities, the residual 2-norm.
/// `scale` is ||F0|| + sum |x_k| ||F_k||, floored at kAbsoluteFloor.
struct ConstraintCheck {
  std::string name;
  double value = 0.0;
  double scale = 1.0;
  double threshold = 0.0;
  bool passed = false;
};

struct VerificationReport {
  std::vector<ConstraintCheck> cones;
  std::vector<ConstraintCheck> equalities;
  bool passed = false;
  /// min over cones of value / scale.
  double min_relative_margin = 0.0;
  /// max over equalities of value / scale.
  double max_relative_residual = 0.0;
};

/// Recomputes every constraint at the given values; knows nothing about how
/// the values were produced.
VerificationReport verify_certificate(const LmiProblem& problem, const VariableValues& values,
                                      const VerifyTolerances& tol = {});

struct LmiCertificate {
  VariableValues values;
  /// Smallest eigenvalue slack across cone constraints (absolute).
  double margin = 0.0;
  /// Largest equality residual norm (absolute).
  double equality_residual = 0.0;
};

struct LmiOptions {
  VerifyTolerances tolerances;
  /// Stop as soon as the common margin reaches target_margin * problem scale.
  double target_margin = 1e-3;
  /// Reduced coordinates are confined to a ball of radius
  /// radius_factor * (1 + ||particular solution||).
  double radius_factor = 1e6;
  int max_outer_iterations = 80;
  int max_newton_iterations = 60;
  /// Barrier parameter reduction per outer iteration.
  double barrier_shrink = 0.2;
  /// Outer loop ends once the barrier gap falls below gap_tol * problem scale.
  double gap_tol = 1e-13;
};

enum class LmiStatus { Feasible, Infeasible, InconsistentEqualities, IterationLimit };

struct LmiResult {
  LmiStatus status = LmiStatus::Infeasible;
  /// Set only when status == Feasible; always passes verify_certificate.
  std::optional<LmiCertificate> certificate;
  /// Best point found, feasible or not.
  LmiCertificate best;
  VerificationReport verification;
  int newton_iterations = 0;
  std::string message;

  bool feasible() const { return status == LmiStatus::Feasible; }
};

/// Maximizes the common eigenvalue margin of all cone constraints over the
/// affine set cut out by the equalities (eliminated exactly through a
/// null-space parameterization), using a log-det barrier with damped Newton
/// steps. Deterministic. Infeasibility means "no point found at tolerance".
LmiResult solve_feasibility(const LmiProblem& problem, const LmiOptions& options = {});

/// Smallest tau >= 0 with N + tau M >= 0, for M >= 0 and N >= 0 on ker M.
/// Throws InvalidArgument when the hypotheses fail or no finite tau exists.
double finsler_tau(const Matrix& m, const Matrix& n, double tol = 1e-10);

std::string to_string(LmiStatus status);

}  // namespace negimag
