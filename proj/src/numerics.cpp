#include "negimag/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "negimag/errors.hpp"

#include <lapacke.h>

namespace negimag {

namespace {

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(std::abs(m(i, j)))) return false;
    }
  }
  return true;
}

template <typename MatrixType>
void check_symmetric(const MatrixType& s, double sym_tol, std::string_view what) {
  require_square(s.rows(), s.cols(), what);
  require_finite(s, what);
  const double scale = std::max(s.norm(), kAbsoluteFloor);
  const double asym = (s - s.adjoint()).norm();
  if (asym > sym_tol * scale) {
    throw InvalidArgument(std::string(what) + ": matrix is not symmetric (asymmetry " +
                          std::to_string(asym / scale) + " relative)");
  }
}

}  // namespace

void require_finite(const Matrix& m, std::string_view what) {
  if (!all_finite(m)) throw InvalidArgument(std::string(what) + ": non-finite entry");
}

void require_finite(const ComplexMatrix& m, std::string_view what) {
  if (!all_finite(m)) throw InvalidArgument(std::string(what) + ": non-finite entry");
}

void require_square(Index rows, Index cols, std::string_view what) {
  if (rows != cols) {
    throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix(0, 0);
  const auto cols = static_cast<Index>(rows.front().size());
  Matrix m(static_cast<Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Index>(rows[i].size()) != cols) {
      throw DimensionError("matrix rows have unequal length");
    }
    for (Index j = 0; j < cols; ++j) m(static_cast<Index>(i), j) = rows[i][j];
  }
  require_finite(m, "matrix");
  return m;
}

ComplexVector eig_general(const Matrix& a) {
  require_square(a.rows(), a.cols(), "eig_general");
  require_finite(a, "eig_general");
  if (a.rows() == 0) return ComplexVector(0);
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("eig_general: QR iteration did not converge");
  }
  std::vector<Complex> values(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::sort(values.begin(), values.end(), [](const Complex& x, const Complex& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  ComplexVector out(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Index>(i)) = values[i];
  return out;
}

Vector eig_symmetric(const Matrix& s, double sym_tol) {
  check_symmetric(s, sym_tol, "eig_symmetric");
  if (s.rows() == 0) return Vector(0);
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("eig_symmetric: tridiagonal QL did not converge");
  }
  return solver.eigenvalues();
}

SymmetricEigen eig_symmetric_vectors(const Matrix& s, double sym_tol) {
  check_symmetric(s, sym_tol, "eig_symmetric");
  if (s.rows() == 0) return {Vector(0), Matrix(0, 0)};
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("eig_symmetric: tridiagonal QL did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Vector eig_hermitian(const ComplexMatrix& h, double sym_tol) {
  check_symmetric(h, sym_tol, "eig_hermitian");
  if (h.rows() == 0) return Vector(0);
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("eig_hermitian: tridiagonal QL did not converge");
  }
  return solver.eigenvalues();
}

double lambda_min(const Matrix& s) {
  const Vector v = eig_symmetric(s);
  return v.size() == 0 ? 0.0 : v(0);
}

double lambda_max(const Matrix& s) {
  const Vector v = eig_symmetric(s);
  return v.size() == 0 ? 0.0 : v(v.size() - 1);
}

double rcond_estimate(const Matrix& a) {
  require_square(a.rows(), a.cols(), "rcond_estimate");
  if (a.rows() == 0) return 1.0;
  if (a.lpNorm<Eigen::Infinity>() == 0.0) return 0.0;
  return Eigen::PartialPivLU<Matrix>(a).rcond();
}

double rcond_estimate(const ComplexMatrix& a) {
  require_square(a.rows(), a.cols(), "rcond_estimate");
  if (a.rows() == 0) return 1.0;
  if (a.lpNorm<Eigen::Infinity>() == 0.0) return 0.0;
  return Eigen::PartialPivLU<ComplexMatrix>(a).rcond();
}

namespace {

template <typename MatrixType>
MatrixType solve_impl(const MatrixType& a, const MatrixType& b) {
  require_square(a.rows(), a.cols(), "solve");
  if (b.rows() != a.rows()) {
    throw DimensionError("solve: right-hand side has " + std::to_string(b.rows()) +
                         " rows, expected " + std::to_string(a.rows()));
  }
  require_finite(a, "solve");
  require_finite(b, "solve");
  if (a.rows() == 0) return MatrixType(0, b.cols());
  Eigen::PartialPivLU<MatrixType> lu(a);
  const double rc = a.template lpNorm<Eigen::Infinity>() == 0.0 ? 0.0 : lu.rcond();
  if (!(rc * kMaxConditionNumber > 1.0)) {
    throw SingularMatrixError("solve: matrix is singular or ill-conditioned (rcond " +
                              std::to_string(rc) + ")");
  }
  return lu.solve(b);
}

}  // namespace

Matrix solve(const Matrix& a, const Matrix& b) { return solve_impl(a, b); }

ComplexMatrix solve(const ComplexMatrix& a, const ComplexMatrix& b) { return solve_impl(a, b); }

Matrix inverse(const Matrix& a) {
  return solve(a, Matrix::Identity(a.rows(), a.cols()));
}

double sigma_max(const Matrix& a) {
  require_finite(a, "sigma_max");
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double sigma_max(const ComplexMatrix& a) {
  require_finite(a, "sigma_max");
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(0);
}

Vector singular_values(const Matrix& a) {
  require_finite(a, "singular_values");
  if (a.size() == 0) return Vector(0);
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues();
}

Matrix null_space(const Matrix& a, double rel_tol) {
  require_finite(a, "null_space");
  const Index n = a.cols();
  if (a.rows() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double threshold = std::max(sv.size() ? sv(0) * rel_tol : 0.0, kAbsoluteFloor);
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > threshold) ++rank;
  }
  return svd.matrixV().rightCols(n - rank);
}

GeneralizedEigenvalues eig_generalized(const Matrix& a, const Matrix& e) {
  require_square(a.rows(), a.cols(), "eig_generalized");
  if (e.rows() != a.rows() || e.cols() != a.cols()) {
    throw DimensionError("eig_generalized: pencil matrices differ in shape");
  }
  require_finite(a, "eig_generalized");
  require_finite(e, "eig_generalized");
  if (a.rows() == 0) return {ComplexVector(0), Vector(0)};
  const auto n = static_cast<lapack_int>(a.rows());
  Matrix aw = a;
  Matrix ew = e;
  Vector alphar(n), alphai(n), beta(n);
  double dummy = 0.0;
  const lapack_int info = LAPACKE_dggev(LAPACK_COL_MAJOR, 'N', 'N', n, aw.data(), n, ew.data(), n,
                                        alphar.data(), alphai.data(), beta.data(), &dummy, 1, &dummy, 1);
  if (info != 0) {
    throw ConvergenceError("eig_generalized: QZ iteration did not converge (info " + std::to_string(info) + ")");
  }
  GeneralizedEigenvalues out{ComplexVector(n), beta};
  for (Index i = 0; i < n; ++i) out.alpha(i) = Complex(alphar(i), alphai(i));
  return out;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace negimag
