#include "negimag/state_space.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "negimag/errors.hpp"

namespace negimag {

namespace {

constexpr double kResolventRcondFloor = 1e-13;

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

Matrix vstack(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

void require_same_io(const StateSpace& a, const StateSpace& b, const char* what) {
  if (a.num_inputs() != b.num_inputs() || a.num_outputs() != b.num_outputs()) {
    throw DimensionError(std::string(what) + ": systems have different input/output sizes");
  }
}

}  // namespace

StateSpace::StateSpace(Matrix a, Matrix b, Matrix c, Matrix d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
  require_square(a_.rows(), a_.cols(), "StateSpace A");
  const Index n = a_.rows();
  if (b_.rows() != n) throw DimensionError("StateSpace: B must have as many rows as A");
  if (c_.cols() != n) throw DimensionError("StateSpace: C must have as many columns as A");
  if (d_.rows() != c_.rows() || d_.cols() != b_.cols()) {
    throw DimensionError("StateSpace: D must be " + std::to_string(c_.rows()) + "x" +
                         std::to_string(b_.cols()));
  }
  require_finite(a_, "StateSpace A");
  require_finite(b_, "StateSpace B");
  require_finite(c_, "StateSpace C");
  require_finite(d_, "StateSpace D");
}

StateSpace StateSpace::static_gain(const Matrix& d) {
  return StateSpace(Matrix(0, 0), Matrix(0, d.cols()), Matrix(d.rows(), 0), d);
}

ModalModel::ModalModel(Index num_channels, std::vector<Mode> modes, OutputKind output)
    : channels_(num_channels), modes_(std::move(modes)), output_(output) {
  if (channels_ <= 0) throw InvalidArgument("ModalModel: need at least one channel");
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const Mode& m = modes_[i];
    const std::string tag = "ModalModel mode " + std::to_string(i);
    if (!(m.omega > 0.0) || !std::isfinite(m.omega)) throw InvalidArgument(tag + ": omega must be > 0");
    if (!(m.kappa > 0.0) || !std::isfinite(m.kappa)) throw InvalidArgument(tag + ": kappa must be > 0");
    if (m.psi.size() != channels_) throw DimensionError(tag + ": psi length must equal channel count");
    require_finite(Matrix(m.psi), tag);
  }
}

ComplexMatrix eval_strictly_proper(const StateSpace& sys, Complex s) {
  const Index n = sys.num_states();
  if (n == 0) return ComplexMatrix::Zero(sys.num_outputs(), sys.num_inputs());
  const ComplexMatrix resolvent =
      s * ComplexMatrix::Identity(n, n) - sys.A().cast<Complex>();
  Eigen::PartialPivLU<ComplexMatrix> lu(resolvent);
  const double rc = lu.rcond();
  if (!(rc > kResolventRcondFloor)) {
    throw PoleProximityError("eval: s = (" + std::to_string(s.real()) + ", " +
                             std::to_string(s.imag()) + ") is at a pole");
  }
  return sys.C().cast<Complex>() * lu.solve(sys.B().cast<Complex>());
}

ComplexMatrix eval(const StateSpace& sys, Complex s) {
  return eval_strictly_proper(sys, s) + sys.D().cast<Complex>();
}

ComplexMatrix eval_modal_sum(const ModalModel& model, Complex s) {
  const Index m = model.num_channels();
  ComplexMatrix sum = ComplexMatrix::Zero(m, m);
  for (const Mode& mode : model.modes()) {
    Complex num = model.output() == OutputKind::Position ? Complex(1.0) : s;
    const Complex den = s * s + mode.kappa * s + mode.omega * mode.omega;
    if (std::abs(den) == 0.0) throw PoleProximityError("eval_modal_sum: s is a modal pole");
    sum += (num / den) * (mode.psi * mode.psi.transpose()).cast<Complex>();
  }
  return sum;
}

StateSpace modal_to_ss(const ModalModel& model) {
  const Index m = model.num_channels();
  const Index n = 2 * static_cast<Index>(model.modes().size());
  Matrix a = Matrix::Zero(n, n);
  Matrix b = Matrix::Zero(n, m);
  Matrix c = Matrix::Zero(m, n);
  for (std::size_t i = 0; i < model.modes().size(); ++i) {
    const Mode& mode = model.modes()[i];
    const Index k = 2 * static_cast<Index>(i);
    a(k, k + 1) = 1.0;
    a(k + 1, k) = -mode.omega * mode.omega;
    a(k + 1, k + 1) = -mode.kappa;
    b.row(k + 1) = mode.psi.transpose();
    const Index out_col = model.output() == OutputKind::Position ? k : k + 1;
    c.col(out_col) = mode.psi;
  }
  return StateSpace(a, b, c, Matrix::Zero(m, m));
}

StateSpace add(const StateSpace& a, const StateSpace& b) {
  require_same_io(a, b, "add");
  return StateSpace(block_diag(a.A(), b.A()), vstack(a.B(), b.B()), hstack(a.C(), b.C()),
                    a.D() + b.D());
}

StateSpace scale(const StateSpace& sys, double k) {
  return StateSpace(sys.A(), sys.B(), k * sys.C(), k * sys.D());
}

StateSpace subtract(const StateSpace& a, const StateSpace& b) { return add(a, scale(b, -1.0)); }

StateSpace series(const StateSpace& first, const StateSpace& second) {
  if (second.num_inputs() != first.num_outputs()) {
    throw DimensionError("series: output of first does not match input of second");
  }
  const Index n1 = first.num_states();
  const Index n2 = second.num_states();
  Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = first.A();
  a.bottomLeftCorner(n2, n1) = second.B() * first.C();
  a.bottomRightCorner(n2, n2) = second.A();
  Matrix b = vstack(first.B(), second.B() * first.D());
  Matrix c = hstack(second.D() * first.C(), second.C());
  return StateSpace(a, b, c, second.D() * first.D());
}

StateSpace paraconjugate_transpose(const StateSpace& sys) {
  return StateSpace(-sys.A().transpose(), sys.C().transpose(), -sys.B().transpose(),
                    sys.D().transpose());
}

StateSpace lower_lft_identity(const StateSpace& g, Index nw, Index ny) {
  const Index nv = g.num_inputs() - nw;
  const Index nz = g.num_outputs() - ny;
  if (nv < 0 || nz < 0 || nv != nz) {
    throw DimensionError("lower_lft_identity: inconsistent loop partition");
  }
  const Matrix bw = g.B().leftCols(nw);
  const Matrix bv = g.B().rightCols(nv);
  const Matrix cy = g.C().topRows(ny);
  const Matrix cz = g.C().bottomRows(nz);
  const Matrix dyw = g.D().topLeftCorner(ny, nw);
  const Matrix dyv = g.D().topRightCorner(ny, nv);
  const Matrix dzw = g.D().bottomLeftCorner(nz, nw);
  const Matrix dzv = g.D().bottomRightCorner(nz, nv);
  const Matrix e = Matrix::Identity(nz, nz) - dzv;
  Matrix e_inv;
  try {
    e_inv = inverse(e);
  } catch (const SingularMatrixError&) {
    throw IllPosedLoopError("feedback loop is ill-posed: I - D_loop is singular");
  }
  const Matrix v_from_x = e_inv * cz;   // nv x n
  const Matrix v_from_w = e_inv * dzw;  // nv x nw
  Matrix a = g.A() + bv * v_from_x;
  Matrix b = bw + bv * v_from_w;
  Matrix c = cy + dyv * v_from_x;
  Matrix d = dyw + dyv * v_from_w;
  return StateSpace(a, b, c, d);
}

StateSpace closed_loop(const FeedbackLoop& loop) {
  const StateSpace& m = loop.M;
  const StateSpace& n = loop.N;
  if (m.num_outputs() != n.num_inputs() || n.num_outputs() != m.num_inputs()) {
    throw DimensionError("feedback: M must be p x m and N must be m x p");
  }
  const double sigma = loop.sign == LoopSign::Positive ? 1.0 : -1.0;
  const Index mi = m.num_inputs(), mo = m.num_outputs();
  const Index ni = n.num_inputs(), no = n.num_outputs();
  const Index nin = mi + ni;    // [u1; u2]
  const Index nout = mo + no;   // [y1; y2]
  // G: inputs [w1; w2; v1; v2] with u = w + v; outputs [y1; y2; z1; z2]
  // with z1 = sigma * y2 (feeds v1) and z2 = y1 (feeds v2).
  const Matrix bd = block_diag(m.B(), n.B());
  const Matrix cd = block_diag(m.C(), n.C());
  const Matrix dd = block_diag(m.D(), n.D());
  Matrix route = Matrix::Zero(nin, nout);
  route.topRightCorner(mi, no) = sigma * Matrix::Identity(mi, no);
  route.bottomLeftCorner(ni, mo) = Matrix::Identity(ni, mo);
  const Matrix b = hstack(bd, bd);
  const Matrix c = vstack(cd, route * cd);
  Matrix d(nout + nin, 2 * nin);
  d << dd, dd, route * dd, route * dd;
  const StateSpace g(block_diag(m.A(), n.A()), b, c, d);
  return lower_lft_identity(g, nin, nout);
}

StateSpace positive_feedback(const StateSpace& m, const StateSpace& n) {
  return closed_loop(FeedbackLoop{m, n, LoopSign::Positive});
}

StateSpace star_product(const StateSpace& m, const StateSpace& n) {
  if (!m.is_square() || !n.is_square() || m.num_inputs() != n.num_inputs() ||
      m.num_inputs() % 2 != 0) {
    throw DimensionError("star_product: M and N must both be 2m x 2m");
  }
  const Index k = m.num_inputs() / 2;
  // Stack diag(M, N): inputs [w1; u1; u2; w2], outputs [y1; u2; u1; y2].
  // Reorder to inputs [w1; w2; u1; u2] and outputs [y1; y2; u1; u2].
  const Matrix bd = block_diag(m.B(), n.B());
  const Matrix cd = block_diag(m.C(), n.C());
  const Matrix dd = block_diag(m.D(), n.D());
  Matrix in_perm = Matrix::Zero(4 * k, 4 * k);   // stacked = in_perm * reordered
  Matrix out_perm = Matrix::Zero(4 * k, 4 * k);  // reordered = out_perm * stacked
  const Matrix eye = Matrix::Identity(k, k);
  // stacked inputs: [w1, u1, u2, w2]; reordered: [w1, w2, u1, u2]
  in_perm.block(0, 0, k, k) = eye;          // w1
  in_perm.block(k, 2 * k, k, k) = eye;      // u1
  in_perm.block(2 * k, 3 * k, k, k) = eye;  // u2
  in_perm.block(3 * k, k, k, k) = eye;      // w2
  // stacked outputs: [y1, u2, u1, y2]; reordered: [y1, y2, u1, u2]
  out_perm.block(0, 0, k, k) = eye;          // y1
  out_perm.block(k, 3 * k, k, k) = eye;      // y2
  out_perm.block(2 * k, 2 * k, k, k) = eye;  // u1
  out_perm.block(3 * k, k, k, k) = eye;      // u2
  const StateSpace g(block_diag(m.A(), n.A()), bd * in_perm, out_perm * cd,
                     out_perm * dd * in_perm);
  return lower_lft_identity(g, 2 * k, 2 * k);
}

ComplexVector poles(const StateSpace& sys) { return eig_general(sys.A()); }

Matrix dc_gain(const StateSpace& sys) {
  if (sys.num_states() == 0) return sys.D();
  return sys.D() - sys.C() * solve(sys.A(), sys.B());
}

Matrix inf_gain(const StateSpace& sys) { return sys.D(); }

Matrix controllability_matrix(const StateSpace& sys) {
  const Index n = sys.num_states();
  const Index m = sys.num_inputs();
  Matrix out(n, n * m);
  Matrix block = sys.B();
  for (Index k = 0; k < n; ++k) {
    out.middleCols(k * m, m) = block;
    block = sys.A() * block;
  }
  return out;
}

Matrix observability_matrix(const StateSpace& sys) {
  const Index n = sys.num_states();
  const Index p = sys.num_outputs();
  Matrix out(n * p, n);
  Matrix block = sys.C();
  for (Index k = 0; k < n; ++k) {
    out.middleRows(k * p, p) = block;
    block = block * sys.A();
  }
  return out;
}

namespace {

Index numerical_rank(const Matrix& m, double rel_tol) {
  const Vector sv = singular_values(m);
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * sv(0)) ++rank;
  }
  return rank;
}

}  // namespace

bool is_controllable(const StateSpace& sys, double rel_tol) {
  if (sys.num_states() == 0) return true;
  return numerical_rank(controllability_matrix(sys), rel_tol) == sys.num_states();
}

bool is_observable(const StateSpace& sys, double rel_tol) {
  if (sys.num_states() == 0) return true;
  return numerical_rank(observability_matrix(sys), rel_tol) == sys.num_states();
}

bool is_minimal(const StateSpace& sys, double rel_tol) {
  return is_controllable(sys, rel_tol) && is_observable(sys, rel_tol);
}

StateSpace diagonal_replicate(const StateSpace& siso, Index m) {
  if (siso.num_inputs() != 1 || siso.num_outputs() != 1) {
    throw DimensionError("diagonal_replicate: expected a SISO system");
  }
  if (m <= 0) throw InvalidArgument("diagonal_replicate: m must be positive");
  const Index n = siso.num_states();
  Matrix a = Matrix::Zero(n * m, n * m);
  Matrix b = Matrix::Zero(n * m, m);
  Matrix c = Matrix::Zero(m, n * m);
  for (Index i = 0; i < m; ++i) {
    a.block(i * n, i * n, n, n) = siso.A();
    b.block(i * n, i, n, 1) = siso.B();
    c.block(i, i * n, 1, n) = siso.C();
  }
  return StateSpace(a, b, c, siso.D()(0, 0) * Matrix::Identity(m, m));
}

InvariantZeros invariant_zeros(const StateSpace& sys) {
  if (!sys.is_square()) throw DimensionError("invariant_zeros: system must be square");
  const Index n = sys.num_states();
  const Index m = sys.num_inputs();
  Matrix s(n + m, n + m);
  s << sys.A(), sys.B(), sys.C(), sys.D();
  Matrix e = Matrix::Zero(n + m, n + m);
  e.topLeftCorner(n, n).setIdentity();

  InvariantZeros out;
  const double scale = std::max(s.norm(), 1.0);
  const GeneralizedEigenvalues ge = eig_generalized(s, e);
  // A singular pencil shows up as a pair with alpha and beta both at noise level.
  for (Index i = 0; i < ge.alpha.size(); ++i) {
    if (std::abs(ge.alpha(i)) <= 1e-10 * scale && std::abs(ge.beta(i)) <= 1e-10) {
      out.degenerate = true;
      out.zeros = ComplexVector(0);
      return out;
    }
  }
  // Higher-order infinite eigenvalues split under rounding into finite ones
  // of size ~ scale * u^(-1/k); anything beyond 1e5 * scale counts as infinite.
  std::vector<Complex> finite;
  for (Index i = 0; i < ge.alpha.size(); ++i) {
    const double beta = std::abs(ge.beta(i));
    const double alpha = std::abs(ge.alpha(i));
    if (beta <= 1e-10 * std::max(alpha, kAbsoluteFloor) || alpha > 1e5 * scale * beta) continue;
    finite.push_back(ge.alpha(i) / ge.beta(i));
  }
  out.zeros = ComplexVector(static_cast<Index>(finite.size()));
  for (std::size_t i = 0; i < finite.size(); ++i) out.zeros(static_cast<Index>(i)) = finite[i];
  return out;
}

}  // namespace negimag
