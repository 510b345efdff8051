#include "negimag/synthesis.hpp"

#include <algorithm>
#include <cmath>

#include "negimag/errors.hpp"

namespace negimag {

void UncertainPlant::validate() const {
  const Index n = A.rows();
  if (n == 0) throw DimensionError("uncertain plant: A is empty");
  require_square(A.rows(), A.cols(), "uncertain plant A");
  if (B1.rows() != n || B2.rows() != n) throw DimensionError("uncertain plant: B1 and B2 need n rows");
  if (C1.cols() != n) throw DimensionError("uncertain plant: C1 needs n columns");
  if (C1.rows() != B1.cols()) throw DimensionError("uncertain plant: C1 rows must match B1 columns");
  if (B1.cols() == 0 || B2.cols() == 0) throw DimensionError("uncertain plant: empty input matrix");
  require_finite(A, "uncertain plant A");
  require_finite(B1, "uncertain plant B1");
  require_finite(B2, "uncertain plant B2");
  require_finite(C1, "uncertain plant C1");
}

LmiProblem synthesis_lmi_problem(const UncertainPlant& plant, double eps, Lmi2Form form) {
  plant.validate();
  if (!(eps > 0.0)) throw InvalidArgument("synthesis: eps must be positive");
  const Index n = plant.num_states();
  const Index q = plant.B1.cols();
  LmiProblem p;
  const VariableId y = p.add_symmetric("Y", n);
  const VariableId m = p.add_matrix("M", plant.B2.cols(), n);
  const Matrix a = plant.A;
  const Matrix b1 = plant.B1;
  const Matrix b2 = plant.B2;
  const Matrix c1 = plant.C1;

  auto corner = [=](const VariableValues& v) {
    Matrix f = a * v[y] + v[y] * a.transpose() + b2 * v[m] + v[m].transpose() * b2.transpose();
    f.diagonal().array() += eps;
    return f;
  };
  auto off = [=](const VariableValues& v) {
    return Matrix(b1 + a * v[y] * c1.transpose() + b2 * v[m] * c1.transpose());
  };

  p.add_cone("Y > 0", Inequality::PositiveDefinite, [y](const VariableValues& v) { return v[y]; });
  if (form == Lmi2Form::Split) {
    p.add_cone("AY + YA^T + B2M + M^T B2^T + eps I <= 0", Inequality::NegativeSemidefinite, corner);
    p.add_equality("B1 + AYC1^T + B2MC1^T = 0", off);
  } else {
    p.add_cone("[[AY + YA^T + B2M + M^T B2^T + eps I, B1 + AYC1^T + B2MC1^T], [*, 0]] <= 0",
               Inequality::NegativeSemidefinite, [=](const VariableValues& v) {
                 Matrix f = Matrix::Zero(n + q, n + q);
                 const Matrix b = off(v);
                 f.topLeftCorner(n, n) = corner(v);
                 f.topRightCorner(n, q) = b;
                 f.bottomLeftCorner(q, n) = b.transpose();
                 return f;
               });
  }
  p.add_cone("C1 Y C1^T - I < 0", Inequality::NegativeDefinite, [=](const VariableValues& v) {
    return Matrix(c1 * v[y] * c1.transpose() - Matrix::Identity(q, q));
  });
  return p;
}

StateSpace closed_loop_gcl(const UncertainPlant& plant, const Matrix& k) {
  plant.validate();
  if (k.rows() != plant.B2.cols() || k.cols() != plant.num_states()) {
    throw DimensionError("closed_loop_gcl: K must be m x n");
  }
  const Index q = plant.B1.cols();
  return StateSpace(plant.A + plant.B2 * k, plant.B1, plant.C1, Matrix::Zero(q, q));
}

ClosedLoopReport verify_closed_loop(const UncertainPlant& plant, const Matrix& k, const std::optional<Matrix>& y,
                                    const SweepOptions& sweep) {
  const StateSpace gcl = closed_loop_gcl(plant, k);
  ClosedLoopReport r;
  r.closed_loop_poles = poles(gcl);
  r.hurwitz = classify_poles(gcl) == PoleLocation::OpenLeft;
  if (!r.hurwitz) {
    r.notes.push_back("A + B2 K is not Hurwitz");
    r.ni_lmi_reason = "skipped: A + B2 K is not Hurwitz";
    return r;
  }

  const NiLmiResult ni = check_ni_lmi(gcl);
  r.ni_lmi = ni.is_ni;
  r.ni_lmi_reason = ni.reason;
  for (const auto& w : ni.warnings) r.notes.push_back(w);

  const FrequencyGrid grid = default_grid(gcl);
  r.ni_sweep = check_ni_sweep(gcl, grid, sweep).holds;
  r.phase_in_range = check_sni_sweep(gcl, grid, sweep).holds;

  r.gcl0 = dc_gain(gcl);
  r.sigma_max_gcl0 = sigma_max(r.gcl0);
  r.small_dc_gain = r.sigma_max_gcl0 < 1.0;
  const double g_scale = 1.0 + r.gcl0.norm();
  const bool symmetric = (r.gcl0 - r.gcl0.transpose()).norm() <= 1e-8 * g_scale;
  r.gcl0_psd = symmetric && lambda_min(0.5 * (r.gcl0 + r.gcl0.transpose())) >= -1e-8 * g_scale;

  if (y) {
    if (y->rows() != plant.num_states() || y->cols() != plant.num_states()) {
      throw DimensionError("verify_closed_loop: Y must be n x n");
    }
    const Matrix predicted = plant.C1 * (*y) * plant.C1.transpose();
    r.identity_error = (r.gcl0 - predicted).norm();
    r.identity_ok = *r.identity_error <= 1e-6 * (1.0 + y->norm());
    if (!r.identity_ok) r.notes.push_back("G_cl(0) differs from C1 Y C1^T");
  }

  // G_cl(inf) = 0, so for NI G_cl with G_cl(0) >= 0 the DC-gain condition
  // against every admissible Delta reduces to sigma_max(G_cl(0)) < 1.
  r.robust = r.ni_lmi && r.gcl0_psd && r.small_dc_gain;
  r.passed = r.hurwitz && r.ni_lmi && r.ni_sweep && r.small_dc_gain && r.identity_ok && r.robust;
  return r;
}

SynthesisResult synthesize_state_feedback(const UncertainPlant& plant, double eps, const SynthesisOptions& opts) {
  plant.validate();
  if (!(eps > 0.0)) throw InvalidArgument("synthesis: eps must be positive");
  std::vector<double> ladder{eps};
  for (double e : opts.eps_ladder) {
    if (std::find(ladder.begin(), ladder.end(), e) == ladder.end()) ladder.push_back(e);
  }
  SynthesisResult out;
  std::string notes;
  for (double e : ladder) {
    out.eps_tried.push_back(e);
    const LmiProblem problem = synthesis_lmi_problem(plant, e, Lmi2Form::Split);
    LmiResult lmi = solve_feasibility(problem, opts.lmi);
    out.lmi = lmi;
    if (!lmi.feasible()) {
      notes += "eps=" + format_number(e) + ": " + lmi.message + "; ";
      continue;
    }
    const Matrix y = lmi.certificate->values.all()[0];
    const Matrix m = lmi.certificate->values.all()[1];
    Matrix k;
    try {
      k = solve(y, Matrix(m.transpose())).transpose();
    } catch (const SingularMatrixError& err) {
      notes += "eps=" + format_number(e) + ": Y too ill-conditioned to invert; ";
      continue;
    }
    out.feasible = true;
    out.eps = e;
    out.Y = y;
    out.M = m;
    out.K = k;
    out.gcl = closed_loop_gcl(plant, k);
    out.verification = verify_closed_loop(plant, k, y);
    out.message = notes + "feasible at eps=" + format_number(e);
    return out;
  }
  out.message = notes + "no feasible certificate on the eps ladder";
  return out;
}

}  // namespace negimag
