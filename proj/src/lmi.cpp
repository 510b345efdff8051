#include "negimag/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "negimag/errors.hpp"

namespace negimag {

VariableId LmiProblem::add_symmetric(std::string name, Index n) {
  if (n <= 0) throw InvalidArgument("add_symmetric: size must be positive");
  variables_.push_back({std::move(name), n, n, true});
  return VariableId{variables_.size() - 1};
}

VariableId LmiProblem::add_matrix(std::string name, Index rows, Index cols) {
  if (rows <= 0 || cols <= 0) throw InvalidArgument("add_matrix: sizes must be positive");
  variables_.push_back({std::move(name), rows, cols, false});
  return VariableId{variables_.size() - 1};
}

void LmiProblem::add_cone(std::string name, Inequality sense, AffineExpression expr) {
  cones_.push_back({std::move(name), sense, std::move(expr)});
}

void LmiProblem::add_equality(std::string name, AffineExpression expr) {
  equalities_.push_back({std::move(name), std::move(expr)});
}

Index LmiProblem::num_scalars() const {
  Index total = 0;
  for (const auto& v : variables_) total += v.num_scalars();
  return total;
}

VariableValues LmiProblem::unpack(const Vector& x) const {
  if (x.size() != num_scalars()) throw DimensionError("unpack: wrong number of scalars");
  std::vector<Matrix> out;
  out.reserve(variables_.size());
  Index k = 0;
  for (const auto& v : variables_) {
    Matrix m(v.rows, v.cols);
    if (v.symmetric) {
      for (Index j = 0; j < v.cols; ++j) {
        for (Index i = 0; i <= j; ++i) {
          m(i, j) = x(k);
          m(j, i) = x(k);
          ++k;
        }
      }
    } else {
      for (Index j = 0; j < v.cols; ++j) {
        for (Index i = 0; i < v.rows; ++i) m(i, j) = x(k++);
      }
    }
    out.push_back(std::move(m));
  }
  return VariableValues(std::move(out));
}

Vector LmiProblem::pack(const VariableValues& values) const {
  if (values.size() != variables_.size()) throw DimensionError("pack: wrong number of variables");
  Vector x(num_scalars());
  Index k = 0;
  for (std::size_t idx = 0; idx < variables_.size(); ++idx) {
    const auto& v = variables_[idx];
    const Matrix& m = values.all()[idx];
    if (m.rows() != v.rows || m.cols() != v.cols) {
      throw DimensionError("pack: variable '" + v.name + "' has the wrong shape");
    }
    if (v.symmetric) {
      for (Index j = 0; j < v.cols; ++j) {
        for (Index i = 0; i <= j; ++i) x(k++) = 0.5 * (m(i, j) + m(j, i));
      }
    } else {
      for (Index j = 0; j < v.cols; ++j) {
        for (Index i = 0; i < v.rows; ++i) x(k++) = m(i, j);
      }
    }
  }
  return x;
}

VariableValues LmiProblem::zeros() const { return unpack(Vector::Zero(num_scalars())); }

AffineCoefficients LmiProblem::coefficients(const AffineExpression& expr) const {
  const Index n = num_scalars();
  AffineCoefficients out;
  out.constant = expr(zeros());
  out.terms.reserve(static_cast<std::size_t>(n));
  Vector unit = Vector::Zero(n);
  for (Index k = 0; k < n; ++k) {
    unit(k) = 1.0;
    Matrix f = expr(unpack(unit));
    unit(k) = 0.0;
    if (f.rows() != out.constant.rows() || f.cols() != out.constant.cols()) {
      throw DimensionError("constraint expression changes shape with its arguments");
    }
    out.terms.push_back(f - out.constant);
  }
  return out;
}

std::string to_string(LmiStatus status) {
  switch (status) {
    case LmiStatus::Feasible: return "feasible";
    case LmiStatus::Infeasible: return "infeasible";
    case LmiStatus::InconsistentEqualities: return "inconsistent-equalities";
    case LmiStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

namespace {

bool is_strict(Inequality sense) {
  return sense == Inequality::PositiveDefinite || sense == Inequality::NegativeDefinite;
}

double orientation(Inequality sense) {
  return (sense == Inequality::PositiveDefinite || sense == Inequality::PositiveSemidefinite)
             ? 1.0
             : -1.0;
}

double term_scale(const AffineCoefficients& coeffs, const Vector& x) {
  double s = coeffs.constant.norm();
  for (std::size_t k = 0; k < coeffs.terms.size(); ++k) {
    s += std::abs(x(static_cast<Index>(k))) * coeffs.terms[k].norm();
  }
  return std::max(s, kAbsoluteFloor);
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void require_affine(const LmiProblem& problem, const AffineExpression& expr,
                    const AffineCoefficients& coeffs, const std::string& name) {
  const Index n = problem.num_scalars();
  Vector probe(n);
  for (Index k = 0; k < n; ++k) probe(k) = 0.37 + 0.011 * static_cast<double>(k % 7);
  Matrix predicted = coeffs.constant;
  for (Index k = 0; k < n; ++k) predicted += probe(k) * coeffs.terms[static_cast<std::size_t>(k)];
  const Matrix actual = expr(problem.unpack(probe));
  const double err = (actual - predicted).norm();
  if (err > 1e-8 * std::max(term_scale(coeffs, probe), 1.0)) {
    throw InvalidArgument("constraint '" + name + "' is not affine in the decision variables");
  }
}

}  // namespace

VerificationReport verify_certificate(const LmiProblem& problem, const VariableValues& values,
                                      const VerifyTolerances& tol) {
  const Vector x = problem.pack(values);
  VerificationReport report;
  report.passed = true;
  report.min_relative_margin = std::numeric_limits<double>::infinity();
  report.max_relative_residual = 0.0;
  for (const auto& cone : problem.cones()) {
    const AffineCoefficients coeffs = problem.coefficients(cone.expr);
    const Matrix f = cone.expr(values);
    require_square(f.rows(), f.cols(), "cone constraint '" + cone.name + "'");
    ConstraintCheck check;
    check.name = cone.name;
    check.scale = term_scale(coeffs, x);
    check.value = lambda_min(orientation(cone.sense) * symmetrize(f));
    check.threshold = is_strict(cone.sense) ? tol.strictness * check.scale
                                            : -tol.cone_tol * check.scale;
    check.passed = check.value >= check.threshold &&
                   (!is_strict(cone.sense) || tol.strictness < 0.0 || check.value > 0.0);
    report.passed = report.passed && check.passed;
    report.min_relative_margin = std::min(report.min_relative_margin, check.value / check.scale);
    report.cones.push_back(check);
  }
  for (const auto& eq : problem.equalities()) {
    const AffineCoefficients coeffs = problem.coefficients(eq.expr);
    const Matrix e = eq.expr(values);
    ConstraintCheck check;
    check.name = eq.name;
    check.scale = term_scale(coeffs, x);
    check.value = e.norm();
    check.threshold = tol.eq_tol * check.scale;
    check.passed = check.value <= check.threshold;
    report.passed = report.passed && check.passed;
    report.max_relative_residual = std::max(report.max_relative_residual, check.value / check.scale);
    report.equalities.push_back(check);
  }
  if (problem.cones().empty()) report.min_relative_margin = 0.0;
  return report;
}

namespace {

// Cone block in reduced coordinates: G(z) = g0 + sum_i z_i g[i].
struct ReducedBlock {
  Matrix g0;
  std::vector<Matrix> g;
};

class BarrierSolver {
 public:
  BarrierSolver(std::vector<ReducedBlock> blocks, Index nz, double radius)
      : blocks_(std::move(blocks)), nz_(nz), radius2_(radius * radius) {
    total_dim_ = 0;
    for (const auto& b : blocks_) total_dim_ += b.g0.rows();
  }

  Matrix block_value(std::size_t j, const Vector& z) const {
    Matrix g = blocks_[j].g0;
    for (Index i = 0; i < nz_; ++i) g += z(i) * blocks_[j].g[static_cast<std::size_t>(i)];
    return g;
  }

  double margin(const Vector& z) const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < blocks_.size(); ++j) m = std::min(m, lambda_min(block_value(j, z)));
    return m;
  }

  // Barrier objective; +inf outside the domain.
  double objective(const Vector& z, double t, double mu) const {
    const double q = radius2_ - z.squaredNorm();
    if (!(q > 0.0)) return std::numeric_limits<double>::infinity();
    double phi = -t / mu - std::log(q);
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      Matrix s = block_value(j, z);
      s.diagonal().array() -= t;
      Eigen::LLT<Matrix> llt(s);
      if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
      const Matrix& l = llt.matrixL();
      double logdet = 0.0;
      for (Index i = 0; i < l.rows(); ++i) {
        if (!(l(i, i) > 0.0)) return std::numeric_limits<double>::infinity();
        logdet += 2.0 * std::log(l(i, i));
      }
      phi -= logdet;
    }
    return phi;
  }

  // Gradient and Hessian with respect to w = (z, t).
  void derivatives(const Vector& z, double t, double mu, Vector& grad, Matrix& hess) const {
    const Index d = nz_ + 1;
    grad = Vector::Zero(d);
    hess = Matrix::Zero(d, d);
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      Matrix s = block_value(j, z);
      s.diagonal().array() -= t;
      Eigen::LLT<Matrix> llt(s);
      const Index n = s.rows();
      std::vector<Matrix> w(static_cast<std::size_t>(d));
      for (Index a = 0; a < d; ++a) {
        Matrix da = a < nz_ ? blocks_[j].g[static_cast<std::size_t>(a)]
                            : Matrix(-Matrix::Identity(n, n));
        Matrix tmp = llt.matrixL().solve(da);
        Matrix wa = llt.matrixL().solve(tmp.transpose()).transpose();
        grad(a) -= wa.trace();
        w[static_cast<std::size_t>(a)] = std::move(wa);
      }
      for (Index a = 0; a < d; ++a) {
        for (Index b = a; b < d; ++b) {
          const double v = w[static_cast<std::size_t>(a)].cwiseProduct(w[static_cast<std::size_t>(b)]).sum();
          hess(a, b) += v;
          if (b != a) hess(b, a) += v;
        }
      }
    }
    const double q = radius2_ - z.squaredNorm();
    grad.head(nz_) += 2.0 * z / q;
    hess.topLeftCorner(nz_, nz_) += (2.0 / q) * Matrix::Identity(nz_, nz_) +
                                    (4.0 / (q * q)) * z * z.transpose();
    grad(nz_) -= 1.0 / mu;
  }

  Index total_dim() const { return total_dim_; }

 private:
  std::vector<ReducedBlock> blocks_;
  Index nz_;
  double radius2_;
  Index total_dim_ = 0;
};

LmiCertificate make_certificate(const LmiProblem& problem, const VariableValues& values,
                                const VerificationReport& report) {
  LmiCertificate cert;
  cert.values = values;
  cert.margin = std::numeric_limits<double>::infinity();
  for (const auto& c : report.cones) cert.margin = std::min(cert.margin, c.value);
  if (report.cones.empty()) cert.margin = 0.0;
  cert.equality_residual = 0.0;
  for (const auto& e : report.equalities) cert.equality_residual = std::max(cert.equality_residual, e.value);
  (void)problem;
  return cert;
}

}  // namespace

LmiResult solve_feasibility(const LmiProblem& problem, const LmiOptions& options) {
  const Index n = problem.num_scalars();
  if (n == 0) throw DimensionError("solve_feasibility: problem has no decision variables");

  std::vector<AffineCoefficients> cone_coeffs;
  for (const auto& cone : problem.cones()) {
    AffineCoefficients c = problem.coefficients(cone.expr);
    require_square(c.constant.rows(), c.constant.cols(), "cone constraint '" + cone.name + "'");
    require_affine(problem, cone.expr, c, cone.name);
    cone_coeffs.push_back(std::move(c));
  }

  // Equality elimination: x = x0 + basis * z spans {x : E(x) = 0}.
  Index eq_rows = 0;
  std::vector<AffineCoefficients> eq_coeffs;
  for (const auto& eq : problem.equalities()) {
    AffineCoefficients c = problem.coefficients(eq.expr);
    require_affine(problem, eq.expr, c, eq.name);
    eq_rows += c.constant.size();
    eq_coeffs.push_back(std::move(c));
  }
  Vector x0 = Vector::Zero(n);
  Matrix basis = Matrix::Identity(n, n);
  LmiResult result;
  if (eq_rows > 0) {
    Matrix a_eq(eq_rows, n);
    Vector b_eq(eq_rows);
    Index row = 0;
    for (const auto& c : eq_coeffs) {
      const Index sz = c.constant.size();
      b_eq.segment(row, sz) = -Eigen::Map<const Vector>(c.constant.data(), sz);
      for (Index k = 0; k < n; ++k) {
        const Matrix& t = c.terms[static_cast<std::size_t>(k)];
        a_eq.block(row, k, sz, 1) = Eigen::Map<const Vector>(t.data(), sz);
      }
      row += sz;
    }
    Eigen::JacobiSVD<Matrix> svd(a_eq, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double thr = std::max(sv.size() > 0 ? sv(0) * 1e-10 : 0.0, kAbsoluteFloor);
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > thr) ++rank;
    }
    const Vector utb = svd.matrixU().leftCols(rank).transpose() * b_eq;
    x0 = svd.matrixV().leftCols(rank) * (utb.array() / sv.head(rank).array()).matrix();
    basis = svd.matrixV().rightCols(n - rank);
    const double resid = (a_eq * x0 - b_eq).norm();
    const double eq_scale = b_eq.norm() + sv.size() * 0 + (sv.size() ? sv(0) : 0.0) * x0.norm();
    if (resid > 1e3 * options.tolerances.eq_tol * std::max(eq_scale, kAbsoluteFloor)) {
      result.status = LmiStatus::InconsistentEqualities;
      result.best.values = problem.unpack(x0);
      result.verification = verify_certificate(problem, result.best.values, options.tolerances);
      result.best = make_certificate(problem, result.best.values, result.verification);
      result.message = "equality constraints have no common solution";
      return result;
    }
  }

  const Index nz = basis.cols();
  std::vector<ReducedBlock> blocks;
  for (std::size_t j = 0; j < cone_coeffs.size(); ++j) {
    const auto& c = cone_coeffs[j];
    const double sgn = orientation(problem.cones()[j].sense);
    ReducedBlock block;
    Matrix g0 = c.constant;
    for (Index k = 0; k < n; ++k) g0 += x0(k) * c.terms[static_cast<std::size_t>(k)];
    block.g0 = sgn * symmetrize(g0);
    for (Index i = 0; i < nz; ++i) {
      Matrix gi = Matrix::Zero(g0.rows(), g0.cols());
      for (Index k = 0; k < n; ++k) {
        if (basis(k, i) != 0.0) gi += basis(k, i) * c.terms[static_cast<std::size_t>(k)];
      }
      block.g.push_back(sgn * symmetrize(gi));
    }
    blocks.push_back(std::move(block));
  }

  auto finish = [&](const Vector& z, LmiStatus fallback, std::string message) {
    const VariableValues values = problem.unpack(x0 + basis * z);
    result.verification = verify_certificate(problem, values, options.tolerances);
    result.best = make_certificate(problem, values, result.verification);
    if (result.verification.passed) {
      result.status = LmiStatus::Feasible;
      result.certificate = result.best;
      result.message = "feasible";
    } else {
      result.status = fallback;
      result.message = std::move(message);
    }
    return result;
  };

  if (blocks.empty()) return finish(Vector::Zero(nz), LmiStatus::Infeasible, "no cone constraints");

  double problem_scale = kAbsoluteFloor;
  for (const auto& b : blocks) {
    double s = b.g0.norm();
    for (const auto& g : b.g) s = std::max(s, g.norm());
    problem_scale = std::max(problem_scale, s);
  }

  const double radius = options.radius_factor * (1.0 + x0.norm());
  BarrierSolver solver(std::move(blocks), nz, radius);

  Vector z = Vector::Zero(nz);
  const double margin0 = solver.margin(z);
  double t = margin0 - std::max(0.1 * std::abs(margin0), 1e-2 * problem_scale);
  double mu = std::max(problem_scale, std::abs(margin0));
  const double stop_margin = options.target_margin * problem_scale;

  Vector best_z = z;
  double best_margin = margin0;
  bool budget_exhausted = true;
  for (int outer = 0; outer < options.max_outer_iterations; ++outer) {
    for (int it = 0; it < options.max_newton_iterations; ++it) {
      Vector grad;
      Matrix hess;
      solver.derivatives(z, t, mu, grad, hess);
      ++result.newton_iterations;
      Eigen::LDLT<Matrix> ldlt(hess);
      Vector step = ldlt.solve(-grad);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        const double reg = 1e-12 * std::max(hess.diagonal().cwiseAbs().maxCoeff(), 1.0);
        step = (hess + reg * Matrix::Identity(hess.rows(), hess.cols())).ldlt().solve(-grad);
      }
      const double decrement = -grad.dot(step);
      if (!(decrement > 1e-11)) break;
      const double phi = solver.objective(z, t, mu);
      double alpha = 1.0;
      bool accepted = false;
      while (alpha > 1e-14) {
        const Vector z_new = z + alpha * step.head(nz);
        const double t_new = t + alpha * step(nz);
        const double phi_new = solver.objective(z_new, t_new, mu);
        if (std::isfinite(phi_new) && phi_new <= phi - 0.25 * alpha * decrement) {
          z = z_new;
          t = t_new;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted || decrement < 1e-9) break;
    }
    const double m = solver.margin(z);
    if (m > best_margin) {
      best_margin = m;
      best_z = z;
    }
    if (best_margin >= stop_margin) {
      budget_exhausted = false;
      break;
    }
    if (static_cast<double>(solver.total_dim() + 1) * mu < options.gap_tol * problem_scale) {
      budget_exhausted = false;
      break;
    }
    mu *= options.barrier_shrink;
  }
  return finish(best_z, budget_exhausted ? LmiStatus::IterationLimit : LmiStatus::Infeasible,
                budget_exhausted ? "iteration budget exhausted before convergence"
                                 : "no feasible point found at tolerance (best margin " +
                                       format_number(best_margin) + ")");
}

double finsler_tau(const Matrix& m, const Matrix& n, double tol) {
  require_square(m.rows(), m.cols(), "finsler_tau M");
  if (n.rows() != m.rows() || n.cols() != m.cols()) {
    throw DimensionError("finsler_tau: M and N must have the same shape");
  }
  const double m_scale = std::max(m.norm(), kAbsoluteFloor);
  const double n_scale = std::max(n.norm(), kAbsoluteFloor);
  const SymmetricEigen em = eig_symmetric_vectors(m);
  if (em.values.size() > 0 && em.values(0) < -1e-12 * m_scale) {
    throw InvalidArgument("finsler_tau: M is not positive semidefinite");
  }
  if (lambda_min(n) >= 0.0) return 0.0;
  // N restricted to ker M must be nonnegative.
  std::vector<Index> kernel;
  for (Index i = 0; i < em.values.size(); ++i) {
    if (em.values(i) <= 1e-12 * m_scale) kernel.push_back(i);
  }
  if (!kernel.empty()) {
    Matrix z(m.rows(), static_cast<Index>(kernel.size()));
    for (std::size_t k = 0; k < kernel.size(); ++k) z.col(static_cast<Index>(k)) = em.vectors.col(kernel[k]);
    const Matrix projected = z.transpose() * n * z;
    if (lambda_min(projected) < -1e-12 * n_scale) {
      throw InvalidArgument("finsler_tau: N is indefinite on the kernel of M; no finite tau exists");
    }
  }
  auto ok = [&](double tau) { return lambda_min(n + tau * m) >= 0.0; };
  double lo = 0.0;
  double hi = 1.0;
  while (!ok(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) throw InvalidArgument("finsler_tau: no finite tau found (N + tau M stays indefinite)");
  }
  while (hi - lo > tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (ok(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace negimag
