#include "negimag/robust_stability.hpp"

#include <cmath>
#include <limits>

#include "negimag/errors.hpp"

namespace negimag {

InternalStability internal_stability(const StateSpace& m, const StateSpace& n, LoopSign sign) {
  const StateSpace cl = closed_loop(FeedbackLoop{m, n, sign});
  InternalStability out;
  out.poles = poles(cl);
  out.stable = true;
  out.max_real_part = -std::numeric_limits<double>::infinity();
  for (const Complex& p : out.poles) {
    out.max_real_part = std::max(out.max_real_part, p.real());
    if (!(p.real() < -kAxisTol * (1.0 + std::abs(p)))) out.stable = false;
  }
  return out;
}

std::string to_string(DcVerdict v) {
  switch (v) {
    case DcVerdict::Stable: return "stable";
    case DcVerdict::Unstable: return "unstable";
    case DcVerdict::Marginal: return "marginal";
  }
  return "unknown";
}

StabilityReport theorem5_verdict(const StateSpace& m, const StateSpace& n, const Theorem5Options& opts) {
  if (!m.is_square() || !n.is_square()) throw DimensionError("theorem5_verdict: M and N must be square");
  if (m.num_outputs() != n.num_inputs()) throw DimensionError("theorem5_verdict: M and N are not conformable");
  StabilityReport r;

  if (opts.use_certificates) {
    const NiLmiResult ni = check_ni_lmi(m);
    r.m_is_ni = ni.is_ni;
    r.m_reason = ni.reason;
    const NiLmiResult n_ni = check_ni_lmi(n);
    if (n_ni.is_ni) {
      const SniZerosResult z = check_sni_zeros(n);
      r.n_is_sni = z.is_sni;
      r.n_reason = z.reason;
    } else {
      r.n_reason = "not NI: " + n_ni.reason;
    }
  } else {
    const FreqVerdict ni = check_ni_sweep(m, default_grid(m), opts.sweep);
    r.m_is_ni = ni.holds;
    r.m_reason = ni.holds ? "NI on frequency sweep" : ni.reason;
    const FreqVerdict sni = check_sni_sweep(n, default_grid(n), opts.sweep);
    r.n_is_sni = sni.holds;
    r.n_reason = sni.holds ? "SNI on frequency sweep" : sni.reason;
  }

  const Matrix prod_inf = m.D() * n.D();
  r.boundary_product_zero = prod_inf.norm() <= 1e-12 * std::max(1.0, m.D().norm() * n.D().norm());
  const Matrix n_inf = n.D();
  r.n_inf_psd = (n_inf - n_inf.transpose()).norm() <= 1e-9 * std::max(1.0, n_inf.norm()) &&
                lambda_min(n_inf) >= -1e-12 * std::max(1.0, n_inf.norm());
  r.hypotheses_hold = r.m_is_ni && r.n_is_sni && r.boundary_product_zero && r.n_inf_psd;

  r.lambda_max_dc = std::numeric_limits<double>::quiet_NaN();
  try {
    const Matrix dc = dc_gain(m) * dc_gain(n);
    const ComplexVector eigs = eig_general(dc);
    double lmax = -std::numeric_limits<double>::infinity();
    double imag = 0.0;
    for (const Complex& e : eigs) {
      lmax = std::max(lmax, e.real());
      imag = std::max(imag, std::abs(e.imag()));
    }
    r.lambda_max_dc = lmax;
    r.dc_imag_residual = imag;
    r.dc_eigs_real = imag <= 1e-8 * std::max(1.0, dc.norm());
  } catch (const SingularMatrixError&) {
    // a pole at the origin: no DC gain, the hypotheses already fail
  }

  const InternalStability direct = internal_stability(m, n, LoopSign::Positive);
  r.closed_loop_poles = direct.poles;
  r.pole_test_stable = direct.stable;

  if (std::isnan(r.lambda_max_dc)) {
    r.dc_verdict = DcVerdict::Unstable;
  } else if (std::abs(r.lambda_max_dc - 1.0) < kMarginalBand) {
    r.dc_verdict = DcVerdict::Marginal;
  } else {
    r.dc_verdict = r.lambda_max_dc < 1.0 ? DcVerdict::Stable : DcVerdict::Unstable;
  }

  r.theorem_applies = r.hypotheses_hold && r.dc_eigs_real && r.dc_verdict != DcVerdict::Marginal;
  if (r.theorem_applies) {
    r.internally_stable = r.dc_verdict == DcVerdict::Stable;
    r.summary = std::string("DC-gain test applies: lambda_max(M(0)N(0)) ") +
                (r.internally_stable ? "< 1, internally stable" : "> 1, not internally stable");
    if (r.internally_stable != r.pole_test_stable) r.summary += " (disagrees with the direct pole test)";
  } else {
    r.internally_stable = r.pole_test_stable;
    r.summary = std::string(r.hypotheses_hold ? "lambda_max(M(0)N(0)) in the marginal band"
                                              : "DC-gain test inapplicable (hypotheses fail)") +
                "; direct pole test: " + (r.pole_test_stable ? "internally stable" : "not internally stable");
  }
  return r;
}

}  // namespace negimag
