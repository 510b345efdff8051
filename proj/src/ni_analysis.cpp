#include "negimag/ni_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <limits>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "negimag/errors.hpp"

namespace negimag {

FrequencyGrid log_grid(double wmin, double wmax, int points_per_decade, bool include_zero) {
  if (!(wmin > 0.0) || !(wmax > wmin) || !std::isfinite(wmax)) {
    throw InvalidArgument("log_grid: need 0 < wmin < wmax < inf");
  }
  if (points_per_decade < 1) throw InvalidArgument("log_grid: points per decade must be >= 1");
  const double decades = std::log10(wmax / wmin);
  const auto count = static_cast<Index>(std::ceil(decades * points_per_decade)) + 1;
  FrequencyGrid grid;
  grid.include_zero = include_zero;
  grid.points.reserve(static_cast<std::size_t>(count));
  const double lo = std::log10(wmin);
  const double step = decades / static_cast<double>(count - 1);
  for (Index i = 0; i < count; ++i) {
    grid.points.push_back(i + 1 == count ? wmax : std::pow(10.0, lo + step * static_cast<double>(i)));
  }
  return grid;
}

FrequencyGrid default_grid(const StateSpace& sys, int points_per_decade) {
  double rho_min = std::numeric_limits<double>::infinity();
  double rho_max = 0.0;
  for (const Complex& p : poles(sys)) {
    const double r = std::abs(p);
    if (r > kAbsoluteFloor) {
      rho_min = std::min(rho_min, r);
      rho_max = std::max(rho_max, r);
    }
  }
  if (rho_max == 0.0) {
    rho_min = 1.0;
    rho_max = 1.0;
  }
  return log_grid(1e-3 * rho_min, 1e3 * rho_max, points_per_decade, true);
}

PoleLocation classify_poles(const StateSpace& sys) {
  PoleLocation worst = PoleLocation::OpenLeft;
  for (const Complex& p : poles(sys)) {
    if (std::abs(p.real()) < kAxisTol * (1.0 + std::abs(p))) {
      worst = PoleLocation::ImaginaryAxis;
    } else if (p.real() > 0.0) {
      return PoleLocation::OpenRight;
    }
  }
  return worst;
}

ComplexMatrix hermitian_imaginary_part(const StateSpace& sys, double omega) {
  if (!sys.is_square()) throw DimensionError("hermitian_imaginary_part: system must be square");
  const ComplexMatrix p = eval(sys, Complex(0.0, omega));
  const Complex j(0.0, 1.0);
  return j * (p - p.adjoint());
}

namespace {

const Complex kJ(0.0, 1.0);

struct PointMargin {
  double value = 0.0;     // smallest eigenvalue of the tested matrix
  double relative = 0.0;  // value divided by its reference scale
};

using MarginFn = std::function<PointMargin(double)>;

struct SweepOutcome {
  std::vector<double> evaluated;
  double worst_frequency = 0.0;
  PointMargin worst{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  int skipped = 0;
};

SweepOutcome run_sweep(const std::vector<double>& points, bool include_zero, const MarginFn& margin,
                       const SweepOptions& opts) {
  SweepOutcome out;
  auto consider = [&](double w) {
    try {
      const PointMargin pm = margin(w);
      out.evaluated.push_back(w);
      if (pm.relative < out.worst.relative) {
        out.worst = pm;
        out.worst_frequency = w;
      }
      return std::optional<PointMargin>(pm);
    } catch (const PoleProximityError&) {
      ++out.skipped;
      return std::optional<PointMargin>();
    }
  };
  if (include_zero) consider(0.0);
  std::vector<double> ws;
  std::vector<double> rel;
  for (double w : points) {
    const auto pm = consider(w);
    if (pm) {
      ws.push_back(w);
      rel.push_back(pm->relative);
    }
  }
  if (opts.refine && ws.size() >= 3) {
    std::vector<std::size_t> minima;
    for (std::size_t i = 1; i + 1 < ws.size(); ++i) {
      if (rel[i] <= rel[i - 1] && rel[i] <= rel[i + 1]) minima.push_back(i);
    }
    std::sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return rel[a] < rel[b]; });
    if (static_cast<int>(minima.size()) > opts.max_refinements) minima.resize(static_cast<std::size_t>(opts.max_refinements));
    for (std::size_t i : minima) {
      auto objective = [&](double logw) {
        try {
          return margin(std::exp(logw)).relative;
        } catch (const PoleProximityError&) {
          return std::numeric_limits<double>::infinity();
        }
      };
      std::uintmax_t max_iter = 200;
      const auto best = boost::math::tools::brent_find_minima(
          objective, std::log(ws[i - 1]), std::log(ws[i + 1]), std::numeric_limits<double>::digits / 2,
          max_iter);
      consider(std::exp(best.first));
    }
  }
  std::sort(out.evaluated.begin(), out.evaluated.end());
  out.evaluated.erase(std::unique(out.evaluated.begin(), out.evaluated.end()), out.evaluated.end());
  return out;
}

void validate_grid(const FrequencyGrid& grid) {
  if (grid.points.empty() && !grid.include_zero) throw InvalidArgument("frequency grid is empty");
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    const double w = grid.points[i];
    if (!std::isfinite(w) || !(w > 0.0)) throw InvalidArgument("frequency grid points must be positive and finite");
    if (i > 0 && !(w > grid.points[i - 1])) throw InvalidArgument("frequency grid must be strictly increasing");
  }
}

double min_eig(const ComplexMatrix& h) { return eig_hermitian(h)(0); }

// j (D - D^T), exact zero for symmetric D.
ComplexMatrix feedthrough_part(const Matrix& d) { return kJ * (d - d.transpose()).cast<Complex>(); }

std::string location_reason(PoleLocation loc) {
  return loc == PoleLocation::ImaginaryAxis ? "imaginary-axis pole" : "right-half-plane pole";
}

FreqVerdict from_outcome(const SweepOutcome& s, bool holds, std::string reason) {
  FreqVerdict v;
  v.holds = holds;
  v.worst_frequency = s.worst_frequency;
  v.worst_margin = s.worst.value;
  v.grid = s.evaluated;
  v.reason = std::move(reason);
  if (s.skipped > 0) {
    v.reason += (v.reason.empty() ? "" : "; ") + std::to_string(s.skipped) +
                " grid points skipped next to poles";
  }
  return v;
}

}  // namespace

FreqVerdict check_ni_sweep(const StateSpace& sys, const FrequencyGrid& grid, const SweepOptions& opts) {
  if (!sys.is_square()) throw DimensionError("check_ni_sweep: system must be square");
  validate_grid(grid);
  const PoleLocation loc = classify_poles(sys);
  if (loc != PoleLocation::OpenLeft) {
    FreqVerdict v;
    v.reason = location_reason(loc);
    return v;
  }
  const ComplexMatrix hd = feedthrough_part(sys.D());
  const MarginFn margin = [&](double w) {
    const ComplexMatrix g = eval_strictly_proper(sys, Complex(0.0, w));
    const ComplexMatrix h = kJ * (g - g.adjoint()) + hd;
    const double value = min_eig(h);
    const double ref = 1.0 + sigma_max(ComplexMatrix(g + sys.D().cast<Complex>()));
    return PointMargin{value, value / ref};
  };
  const SweepOutcome s = run_sweep(grid.points, grid.include_zero, margin, opts);
  const bool holds = s.worst.relative >= -opts.tol;
  return from_outcome(s, holds, holds ? "" : "j(P - P*) has a negative eigenvalue");
}

FreqVerdict check_sni_sweep(const StateSpace& sys, const FrequencyGrid& grid, const SweepOptions& opts) {
  FreqVerdict ni = check_ni_sweep(sys, grid, opts);
  if (!ni.holds) {
    ni.reason = "not NI: " + ni.reason;
    return ni;
  }
  const ComplexMatrix hd = feedthrough_part(sys.D());
  const MarginFn margin = [&](double w) {
    const ComplexMatrix g = eval_strictly_proper(sys, Complex(0.0, w));
    const double value = min_eig(ComplexMatrix(kJ * (g - g.adjoint()) + hd));
    const double ref = std::max(sigma_max(g), std::numeric_limits<double>::min());
    return PointMargin{value, value / ref};
  };
  const SweepOutcome s = run_sweep(grid.points, false, margin, opts);
  const bool holds = s.worst.relative > opts.strict_tol;
  return from_outcome(s, holds, holds ? "" : "j(P - P*) is not positive definite at some w > 0");
}

FreqVerdict check_positive_real(const StateSpace& sys, const FrequencyGrid& grid, const SweepOptions& opts) {
  if (!sys.is_square()) throw DimensionError("check_positive_real: system must be square");
  validate_grid(grid);
  const PoleLocation loc = classify_poles(sys);
  if (loc == PoleLocation::OpenRight) {
    FreqVerdict v;
    v.reason = location_reason(loc);
    return v;
  }
  const MarginFn margin = [&](double w) {
    const ComplexMatrix p = eval(sys, Complex(0.0, w));
    const double value = min_eig(ComplexMatrix(p + p.adjoint()));
    return PointMargin{value, value / (1.0 + sigma_max(p))};
  };
  const SweepOutcome s = run_sweep(grid.points, grid.include_zero, margin, opts);
  const bool holds = s.worst.relative >= -opts.tol;
  FreqVerdict v = from_outcome(s, holds, holds ? "" : "P + P* has a negative eigenvalue");
  if (loc == PoleLocation::ImaginaryAxis) {
    v.reason += (v.reason.empty() ? "" : "; ") + std::string("warning: imaginary-axis pole tolerated");
  }
  return v;
}

FreqVerdict check_strictly_positive_real(const StateSpace& sys, const FrequencyGrid& grid,
                                         const SweepOptions& opts, std::vector<double> ladder) {
  if (ladder.empty()) throw InvalidArgument("check_strictly_positive_real: empty shift ladder");
  std::optional<FreqVerdict> first;
  for (double eps : ladder) {
    if (!(eps > 0.0)) throw InvalidArgument("check_strictly_positive_real: shifts must be positive");
    const Index n = sys.num_states();
    const StateSpace shifted(sys.A() + eps * Matrix::Identity(n, n), sys.B(), sys.C(), sys.D());
    FreqVerdict v = check_positive_real(shifted, grid, opts);
    if (v.holds && classify_poles(shifted) == PoleLocation::OpenLeft) {
      v.epsilon_shift = eps;
      v.reason = "P(s - " + format_number(eps) + ") is positive real";
      return v;
    }
    if (!first) first = v;
  }
  first->holds = false;
  first->reason = "no shift in the ladder gives a positive-real P(s - eps)" +
                  (first->reason.empty() ? std::string() : ": " + first->reason);
  return *first;
}

LmiProblem ni_lemma_problem(const StateSpace& sys) {
  if (!sys.is_square()) throw DimensionError("ni_lemma_problem: system must be square");
  if (sys.num_states() == 0) throw DimensionError("ni_lemma_problem: static system has no state");
  LmiProblem p;
  const VariableId y = p.add_symmetric("Y", sys.num_states());
  const Matrix a = sys.A();
  const Matrix b = sys.B();
  const Matrix c = sys.C();
  p.add_cone("Y > 0", Inequality::PositiveDefinite, [y](const VariableValues& v) { return v[y]; });
  p.add_cone("AY + YA^T <= 0", Inequality::NegativeSemidefinite, [a, y](const VariableValues& v) {
    return Matrix(a * v[y] + v[y] * a.transpose());
  });
  p.add_equality("B + AYC^T = 0", [a, b, c, y](const VariableValues& v) {
    return Matrix(b + a * v[y] * c.transpose());
  });
  return p;
}

namespace {

bool symmetric_feedthrough(const Matrix& d) {
  return (d - d.transpose()).norm() <= 1e-9 * std::max(1.0, d.norm());
}

}  // namespace

NiLmiResult check_ni_lmi(const StateSpace& sys, const LmiOptions& opts) {
  if (!sys.is_square()) throw DimensionError("check_ni_lmi: system must be square");
  NiLmiResult out;
  if (!symmetric_feedthrough(sys.D())) {
    out.reason = "D is not symmetric";
    return out;
  }
  if (sys.num_states() == 0) {
    out.is_ni = true;
    out.status = LmiStatus::Feasible;
    out.reason = "static symmetric gain";
    return out;
  }
  out.minimal = is_minimal(sys);
  if (!out.minimal) out.warnings.push_back("realization is not minimal; the LMI test assumes minimality");
  for (const Complex& p : poles(sys)) {
    if (std::abs(p.real()) < kAxisTol * (1.0 + std::abs(p))) {
      out.reason = "A has an eigenvalue on the imaginary axis";
      return out;
    }
  }
  const LmiResult r = solve_feasibility(ni_lemma_problem(sys), opts);
  out.status = r.status;
  out.is_ni = r.feasible();
  if (r.certificate) out.certificate = r.certificate;
  out.reason = out.is_ni ? "NI lemma certificate found" : "NI lemma LMIs: " + r.message;
  return out;
}

Matrix modal_ni_certificate(const ModalModel& model) {
  if (model.output() != OutputKind::Position) {
    throw InvalidArgument("modal_ni_certificate: requires a position-output model");
  }
  const auto n = static_cast<Index>(2 * model.modes().size());
  Matrix y = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < model.modes().size(); ++i) {
    const double w = model.modes()[i].omega;
    const auto k = static_cast<Index>(2 * i);
    y(k, k) = 1.0 / (w * w);
    y(k + 1, k + 1) = 1.0;
  }
  return y;
}

SniZerosResult check_sni_zeros(const StateSpace& sys) {
  if (!sys.is_square()) throw DimensionError("check_sni_zeros: system must be square");
  SniZerosResult out;
  const PoleLocation loc = classify_poles(sys);
  if (loc != PoleLocation::OpenLeft) {
    out.reason = "not NI: " + location_reason(loc);
    return out;
  }
  if (!symmetric_feedthrough(sys.D())) {
    out.reason = "not NI: D is not symmetric";
    return out;
  }
  const StateSpace phi = subtract(sys, paraconjugate_transpose(sys));
  const InvariantZeros iz = invariant_zeros(phi);
  out.zeros = iz.zeros;
  out.degenerate = iz.degenerate;
  if (iz.degenerate) {
    const FreqVerdict v = check_sni_sweep(sys, default_grid(sys));
    out.is_sni = v.holds;
    out.reason = "M(s) - M^T(-s) has a singular pencil; frequency-sweep fallback: " +
                 std::string(v.holds ? "SNI" : "not SNI");
    return out;
  }
  double rho_min = std::numeric_limits<double>::infinity();
  for (const Complex& p : poles(sys)) rho_min = std::min(rho_min, std::abs(p));
  const double origin_band = std::max(kOriginTol, 1e-4 * (std::isfinite(rho_min) ? rho_min : 1.0));
  for (const Complex& z : iz.zeros) {
    if (std::abs(z) > origin_band && std::abs(z.real()) < kAxisTol * (1.0 + std::abs(z))) {
      out.axis_zeros.push_back(z);
    }
  }
  out.is_sni = out.axis_zeros.empty();
  out.reason = out.is_sni ? "no imaginary-axis zeros of M(s) - M^T(-s) away from the origin"
                          : std::to_string(out.axis_zeros.size()) +
                                " imaginary-axis zero(s) of M(s) - M^T(-s)";
  return out;
}

namespace {

StateSpace augment(const StateSpace& sys, const std::vector<double>& shifts, double eps) {
  if (!sys.is_square()) throw DimensionError("SNI sufficient test: system must be square");
  if (!(eps > 0.0)) throw InvalidArgument("SNI sufficient test: eps must be positive");
  const ComplexVector eigs = poles(sys);
  for (double a : shifts) {
    if (!(a > 0.0)) throw InvalidArgument("SNI sufficient test: alpha and beta must be positive");
    for (const Complex& p : eigs) {
      if (std::abs(p + a) <= 1e-9 * (1.0 + a)) {
        throw InvalidArgument("SNI sufficient test: -" + format_number(a) + " is an eigenvalue of A");
      }
    }
  }
  const Index n = sys.num_states();
  const Index m = sys.num_inputs();
  const auto k = static_cast<Index>(shifts.size());
  const Index na = n + k * m;
  Matrix a = Matrix::Zero(na, na);
  Matrix b = Matrix::Zero(na, m);
  Matrix c = Matrix::Zero(m, na);
  a.topLeftCorner(n, n) = sys.A();
  b.topRows(n) = sys.B();
  c.leftCols(n) = sys.C();
  for (Index i = 0; i < k; ++i) {
    const Index off = n + i * m;
    a.block(off, off, m, m) = -shifts[static_cast<std::size_t>(i)] * Matrix::Identity(m, m);
    b.block(off, 0, m, m) = eps * Matrix::Identity(m, m);
    c.block(0, off, m, m) = -Matrix::Identity(m, m);
  }
  return StateSpace(a, b, c, sys.D());
}

SniSufficientResult run_sufficient(const StateSpace& sys, const StateSpace& augmented, const LmiOptions& opts) {
  SniSufficientResult out;
  if (classify_poles(sys) != PoleLocation::OpenLeft) {
    out.reason = "A is not Hurwitz";
    return out;
  }
  if (!symmetric_feedthrough(sys.D())) {
    out.reason = "D is not symmetric";
    return out;
  }
  out.lmi = solve_feasibility(ni_lemma_problem(augmented), opts);
  out.holds = out.lmi.feasible();
  out.reason = out.holds ? "augmented NI lemma certificate found"
                         : "augmented LMIs not satisfied (inconclusive): " + out.lmi.message;
  return out;
}

}  // namespace

StateSpace snil1_augmented(const StateSpace& sys, double alpha, double eps) {
  return augment(sys, {alpha}, eps);
}

StateSpace snil2_augmented(const StateSpace& sys, double alpha, double beta, double eps) {
  if (alpha == beta) throw InvalidArgument("sni_sufficient_snil2: alpha and beta must differ");
  return augment(sys, {alpha, beta}, eps);
}

SniSufficientResult sni_sufficient_snil1(const StateSpace& sys, double alpha, double eps, const LmiOptions& opts) {
  return run_sufficient(sys, snil1_augmented(sys, alpha, eps), opts);
}

SniSufficientResult sni_sufficient_snil2(const StateSpace& sys, double alpha, double beta, double eps,
                                         const LmiOptions& opts) {
  return run_sufficient(sys, snil2_augmented(sys, alpha, beta, eps), opts);
}

StateSpace rotate_to_positive_real(const StateSpace& sys) {
  return StateSpace(sys.A(), sys.B(), sys.C() * sys.A(), sys.C() * sys.B());
}

}  // namespace negimag
