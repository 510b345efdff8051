#pragma once

// Dense real/complex matrix kernels used by every other module.
//
// All tolerances are relative to a norm of the operands with an absolute
// floor of kAbsoluteFloor.

#include <complex>
#include <string_view>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace negimag {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double kAbsoluteFloor = 1e-12;
/// Solves and inversions are refused above this condition estimate.
inline constexpr double kMaxConditionNumber = 1e12;

/// Throws InvalidArgument if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);
void require_finite(const ComplexMatrix& m, std::string_view what);
void require_square(Index rows, Index cols, std::string_view what);

/// Parses row-major nested values into a Matrix. Rows must have equal length.
Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows);

/// Eigenvalues of a general real square matrix, sorted by (real, imag).
/// Complex eigenvalues appear in conjugate pairs.
ComplexVector eig_general(const Matrix& a);

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and
/// orthonormal eigenvectors (columns).
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

/// Ascending eigenvalues of a symmetric matrix. The input is symmetrized after
/// checking ||S - S^T|| <= sym_tol * max(||S||, floor).
Vector eig_symmetric(const Matrix& s, double sym_tol = 1e-10);
SymmetricEigen eig_symmetric_vectors(const Matrix& s, double sym_tol = 1e-10);
/// Hermitian counterpart; eigenvalues are real and ascending.
Vector eig_hermitian(const ComplexMatrix& h, double sym_tol = 1e-10);

double lambda_min(const Matrix& s);
double lambda_max(const Matrix& s);

/// Reciprocal condition estimate of a square matrix (LU based, 1-norm).
double rcond_estimate(const Matrix& a);
double rcond_estimate(const ComplexMatrix& a);

/// X with A X = B. Throws SingularMatrixError above kMaxConditionNumber.
Matrix solve(const Matrix& a, const Matrix& b);
ComplexMatrix solve(const ComplexMatrix& a, const ComplexMatrix& b);
Matrix inverse(const Matrix& a);

/// Largest singular value (spectral norm).
double sigma_max(const Matrix& a);
double sigma_max(const ComplexMatrix& a);
Vector singular_values(const Matrix& a);

/// Orthonormal basis of the null space: singular values below
/// rel_tol * sigma_max count as zero.
Matrix null_space(const Matrix& a, double rel_tol = 1e-10);

/// Generalized eigenvalues of the pencil (A, E) as (alpha, beta) pairs, so
/// lambda = alpha / beta; beta == 0 marks an infinite eigenvalue.
struct GeneralizedEigenvalues {
  ComplexVector alpha;
  Vector beta;
};
GeneralizedEigenvalues eig_generalized(const Matrix& a, const Matrix& e);

/// Short human-readable form (6 significant digits) for messages.
std::string format_number(double v);

}  // namespace negimag
