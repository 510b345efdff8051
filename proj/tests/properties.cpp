#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "negimag/controllers.hpp"
#include "negimag/errors.hpp"
#include "negimag/lmi.hpp"
#include "negimag/ni_analysis.hpp"
#include "negimag/robust_stability.hpp"
#include "test_support.hpp"

namespace negimag::properties {

using testing::rel_err;
using testing::Rng;

void Outcome::fail(const std::string& what) {
  if (failures++ == 0) first_failure = what;
}

std::string Outcome::summary() const {
  std::ostringstream s;
  s << name << ": " << cases - failures << "/" << cases << " cases";
  if (failures) s << "; first failure: " << first_failure;
  return s.str();
}

namespace {

std::string tag(int i) { return "case " + std::to_string(i); }

/// Hurwitz random system, generically neither NI nor PR.
StateSpace random_stable(Rng& rng, Index n, Index m) {
  Matrix a = rng.matrix(n, n, 2.0);
  if (n > 0) a -= (eig_general(a).real().maxCoeff() + rng.uniform(0.2, 1.5)) * Matrix::Identity(n, n);
  return StateSpace(a, rng.matrix(n, m), rng.matrix(m, n), rng.matrix(m, m, 0.2));
}

/// Random modal plant with D = 0 and a modest number of modes.
StateSpace random_modal_plant(Rng& rng, Index m) { return modal_to_ss(rng.modal(m)); }

Complex random_point(Rng& rng) { return {rng.uniform(-0.5, 2.0), rng.log_uniform(0.01, 50.0) * (rng.integer(0, 1) ? 1 : -1)}; }

bool sni_by_zeros(const StateSpace& sys, std::string& why) {
  const SniZerosResult z = check_sni_zeros(sys);
  why = z.reason;
  return z.is_sni;
}

}  // namespace

Outcome symmetric_eigenvalues(int cases) {
  Outcome out{"symmetric eigenvalues match the general solver"};
  Rng rng(101);
  for (int i = 0; i < cases; ++i, ++out.cases) {
    const Index n = rng.integer(1, 12);
    Matrix s = rng.matrix(n, n);
    s = 0.5 * (s + s.transpose()).eval();
    const Vector sym = eig_symmetric(s);
    ComplexVector gen = eig_general(s);
    std::vector<double> g(static_cast<std::size_t>(n));
    double imag = 0.0;
    for (Index k = 0; k < n; ++k) {
      g[static_cast<std::size_t>(k)] = gen(k).real();
      imag = std::max(imag, std::abs(gen(k).imag()));
    }
    std::sort(g.begin(), g.end());
    double err = imag;
    for (Index k = 0; k < n; ++k) err = std::max(err, std::abs(g[static_cast<std::size_t>(k)] - sym(k)));
    if (err > 1e-8 * std::max(1.0, s.norm())) out.fail(tag(i) + ": eigenvalue mismatch " + format_number(err));
  }
  return out;
}

Outcome solve_round_trip(int cases) {
  Outcome out{"solve round trip"};
  Rng rng(102);
  for (int i = 0; i < cases; ++i, ++out.cases) {
    const Index n = rng.integer(1, 10);
    const Matrix a = rng.matrix(n, n) + n * Matrix::Identity(n, n);
    const Matrix b = rng.matrix(n, rng.integer(1, 4));
    const double err = (a * solve(a, b) - b).norm();
    if (err > 1e-9 * a.norm() * b.norm()) out.fail(tag(i) + ": residual " + format_number(err));
  }
  return out;
}

Outcome sigma_max_squared(int cases) {
  Outcome out{"sigma_max squared equals lambda_max of A^T A"};
  Rng rng(103);
  for (int i = 0; i < cases; ++i, ++out.cases) {
    const Matrix a = rng.matrix(rng.integer(1, 8), rng.integer(1, 8));
    const double s = sigma_max(a);
    const double l = lambda_max(Matrix(a.transpose() * a));
    if (std::abs(s * s - l) > 1e-9 * std::max(1.0, l)) out.fail(tag(i));
  }
  return out;
}

Outcome conjugate_symmetry(int cases) {
  Outcome out{"conjugate symmetry of eval"};
  Rng rng(104);
  for (int i = 0; i < cases; ++i, ++out.cases) {
    const StateSpace sys = random_stable(rng, rng.integer(1, 6), rng.integer(1, 3));
    const Complex s = random_point(rng);
    const double err = rel_err(eval(sys, std::conj(s)), eval(sys, s).conjugate());
    if (err > 1e-12) out.fail(tag(i) + ": " + format_number(err));
  }
  return out;
}

Outcome modal_two_path(int cases) {
  Outcome out{"modal realization vs explicit modal sum"};
  Rng rng(105);
  for (int i = 0; i < cases; ++i, ++out.cases) {
    const Index m = rng.integer(1, 4);
    const ModalModel base = rng.modal(m, 6);
    const ModalModel model(m, base.modes(), rng.integer(0, 1) ? OutputKind::Position : OutputKind::Velocity);
    const StateSpace sys = modal_to_ss(model);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const Complex s = random_point(rng);
      worst = std::max(worst, rel_err(eval(sys, s), eval_modal_sum(model, s)));
    }
    if (worst > 1e-10) out.fail(tag(i) + ": relative error " + format_number(worst));
  }
  return out;
}

Outcome add_linearity(int cases) {
  Outcome out{"add and eval are linear"};
  Rng rng(106);
  for (int i = 0; i < cases; ++i, ++out.cases) {
    const Index m = rng.integer(1, 3);
    const StateSpace a = random_stable(rng, rng.integer(1, 5), m);
    const StateSpace b = random_stable(rng, rng.integer(0, 5), m);
    const Complex s = random_point(rng);
    const double err = rel_err(eval(add(a, b), s), eval(a, s) + eval(b, s));
    if (err > 1e-11) out.fail(tag(i) + ": " + format_number(err));
  }
  return out;
}

Outcome feedback_formula(int cases) {
  Outcome out{"positive feedback matches the blockwise formula"};
  Rng rng(107);
  for (int i = 0; i < cases; ++i) {
    const Index m = rng.integer(1, 2);
    const StateSpace mm = random_stable(rng, rng.integer(1, 4), m);
    const StateSpace nn = random_stable(rng, rng.integer(1, 4), m);
    StateSpace t = mm;
    try {
      t = positive_feedback(mm, nn);
    } catch (const IllPosedLoopError&) {
      continue;
    }
    ++out.cases;
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Complex s = random_point(rng);
      const ComplexMatrix gm = eval(mm, s);
      const ComplexMatrix gn = eval(nn, s);
      const ComplexMatrix id = ComplexMatrix::Identity(m, m);
      ComplexMatrix expected(2 * m, 2 * m);
      const ComplexMatrix inm = solve(ComplexMatrix(id - gn * gm), id);
      const ComplexMatrix imn = solve(ComplexMatrix(id - gm * gn), id);
      expected.topLeftCorner(m, m) = gm * inm;
      expected.topRightCorner(m, m) = gm * inm * gn;
      expected.bottomLeftCorner(m, m) = gn * imn * gm;
      expected.bottomRightCorner(m, m) = gn * imn;
      try {
        worst = std::max(worst, rel_err(eval(t, s), expected));
      } catch (const PoleProximityError&) {
      }
    }
    if (worst > 1e-9) out.fail(tag(i) + ": relative error " + format_number(worst));
  }
  return out;
}

Outcome lmi_analytic_solutions(int cases) {
  Outcome out{"NI lemma LMI on first-order constructions"};
  Rng rng(108);
  for (int i = 0; i < cases; ++i, ++out.cases) {
    const Index m = rng.integer(1, 3);
    const double eps = rng.uniform(0.1, 2.0);
    const double alpha = rng.uniform(0.2, 5.0);
    const StateSpace sys(-alpha * Matrix::Identity(m, m), eps * Matrix::Identity(m, m), Matrix::Identity(m, m),
                         Matrix::Zero(m, m));
    const LmiResult r = solve_feasibility(ni_lemma_problem(sys));
    if (!r.feasible()) {
      out.fail(tag(i) + ": " + r.message);
      continue;
    }
    const Matrix y = r.certificate->values.all()[0];
    if ((y - (eps / alpha) * Matrix::Identity(m, m)).norm() > 1e-8) out.fail(tag(i) + ": Y differs from (eps/alpha) I");
    if (r.certificate->margin < 1e-9) out.fail(tag(i) + ": margin " + format_number(r.certificate->margin));
  }
  return out;
}

Outcome lmi_deterministic(int cases) {
  Outcome out{"LMI solver is deterministic"};
  Rng rng(109);
  for (int i = 0; i < cases; ++i, ++out.cases) {
    const StateSpace sys = random_modal_plant(rng, rng.integer(1, 2));
    const LmiProblem p = ni_lemma_problem(sys);
    const LmiResult a = solve_feasibility(p);
    const LmiResult b = solve_feasibility(p);
    const Matrix ya = a.best.values.all()[0];
    const Matrix yb = b.best.values.all()[0];
    if (a.status != b.status || a.newton_iterations != b.newton_iterations || (ya - yb).norm() != 0.0) {
      out.fail(tag(i));
    }
  }
  return out;
}

Outcome additivity(int cases) {
  Outcome out{"sum of NI systems is NI, SNI + NI is SNI"};
  Rng rng(110);
  for (int i = 0; i < cases; ++i, ++out.cases) {
    const Index m = rng.integer(1, 3);
    const StateSpace p1 = rng.sni(m);
    const StateSpace p2 = rng.sni(m);
    const StateSpace sum = add(p1, p2);
    const FrequencyGrid g = default_grid(sum);
    if (!check_ni_sweep(p1, g).holds || !check_ni_sweep(p2, g).holds) {
      out.fail(tag(i) + ": summand not NI");
      continue;
    }
    if (!check_ni_sweep(sum, g).holds) out.fail(tag(i) + ": sum not NI");
    const bool sni1 = check_sni_sweep(p1, g).holds;
    const FreqVerdict s = check_sni_sweep(sum, g);
    if (sni1 && !s.holds) out.fail(tag(i) + ": sum not SNI: " + s.reason);
  }
  return out;
}

Outcome feedback_closure(int cases) {
  Outcome out{"positive feedback of NI systems is NI"};
  Rng rng(111);
  for (int attempt = 0; out.cases < cases && attempt < 20 * cases; ++attempt) {
    const Index m = rng.integer(1, 2);
    const StateSpace mm = rng.sni(m);
    const StateSpace nn = scale(rng.sni(m), rng.log_uniform(0.01, 3.0));
    StateSpace t = mm;
    try {
      if (!internal_stability(mm, nn).stable) continue;
      t = positive_feedback(mm, nn);
    } catch (const IllPosedLoopError&) {
      continue;
    }
    ++out.cases;
    const FreqVerdict v = check_ni_sweep(t, default_grid(t));
    if (!v.holds) out.fail(tag(attempt) + ": " + v.reason);
  }
  if (out.cases < cases) out.fail("only " + std::to_string(out.cases) + " stable pairs drawn");
  return out;
}

Outcome star_product_closure(int cases) {
  Outcome out{"star product of NI systems is NI"};
  Rng rng(112);
  for (int attempt = 0; out.cases < cases && attempt < 20 * cases; ++attempt) {
    const Index m = rng.integer(1, 2);
    const StateSpace mm = scale(rng.sni(2 * m), rng.log_uniform(0.05, 2.0));
    const StateSpace nn = scale(rng.sni(2 * m), rng.log_uniform(0.05, 2.0));
    StateSpace t = mm;
    try {
      t = star_product(mm, nn);
    } catch (const IllPosedLoopError&) {
      continue;
    }
    if (classify_poles(t) != PoleLocation::OpenLeft) continue;
    ++out.cases;
    const FreqVerdict v = check_ni_sweep(t, default_grid(t));
    if (!v.holds) out.fail(tag(attempt) + ": " + v.reason);
  }
  if (out.cases < cases) out.fail("only " + std::to_string(out.cases) + " stable pairs drawn");
  return out;
}

Outcome sni_constructions(int cases) {
  Outcome out{"first-order, second-order and replicated constructions are SNI"};
  Rng rng(113);
  for (int i = 0; i < cases; ++i, ++out.cases) {
    const Index m = rng.integer(1, 3);
    const double eps = rng.log_uniform(1e-3, 10.0);
    const double alpha = rng.log_uniform(0.05, 20.0);
    const double beta = rng.log_uniform(0.05, 20.0);
    const StateSpace first(-alpha * Matrix::Identity(m, m), eps * Matrix::Identity(m, m), Matrix::Identity(m, m),
                           Matrix::Zero(m, m));
    const StateSpace lag_a = testing::ss({{-alpha}}, {{eps}}, {{1}}, {{0}});
    const StateSpace lag_b = testing::ss({{-beta}}, {{1}}, {{1}}, {{0}});
    const StateSpace second = diagonal_replicate(series(lag_a, lag_b), m);
    const StateSpace replicated = diagonal_replicate(rng.sni(1), m);
    std::string why;
    if (!sni_by_zeros(first, why)) out.fail(tag(i) + ": eps/(s+a) I: " + why);
    if (!sni_by_zeros(second, why)) out.fail(tag(i) + ": eps/((s+a)(s+b)) I: " + why);
    if (!sni_by_zeros(replicated, why)) out.fail(tag(i) + ": M(s) I: " + why);
  }
  return out;
}

Outcome irc_is_sni(int cases) {
  Outcome out{"integral resonant controllers are SNI"};
  Rng rng(114);
  for (int i = 0; i < cases; ++i, ++out.cases) {
    const Index m = rng.integer(1, 3);
    const StateSpace c = irc(IrcParams{rng.spd(m, 0.1, 10.0), rng.spd(m, 0.1, 10.0)});
    std::string why;
    if (!sni_by_zeros(c, why)) out.fail(tag(i) + ": " + why);
    const FreqVerdict v = check_sni_sweep(c, default_grid(c));
    if (!v.holds) out.fail(tag(i) + ": sweep: " + v.reason);
  }
  return out;
}

Outcome dc_orderings(int cases) {
  Outcome out{"DC and high-frequency gain orderings"};
  Rng rng(115);
  for (int i = 0; i < cases; ++i, ++out.cases) {
    const Index m = rng.integer(1, 3);
    const StateSpace mm = rng.sni(m);
    const StateSpace nn = rng.sni(m);
    if (!check_ni_sweep(mm, default_grid(mm)).holds || !check_sni_sweep(nn, default_grid(nn)).holds) {
      out.fail(tag(i) + ": construction failed the NI/SNI checks");
      continue;
    }
    const Matrix m0 = dc_gain(mm), minf = inf_gain(mm);
    const Matrix n0 = dc_gain(nn), ninf = inf_gain(nn);
    const double scale = 1.0 + m0.norm() + minf.norm();
    if ((m0 - m0.transpose()).norm() > 1e-9 * scale) out.fail(tag(i) + ": M(0) not symmetric");
    if (lambda_min(Matrix(m0 - minf)) < -1e-9 * scale) out.fail(tag(i) + ": M(0) - M(inf) not PSD");
    if (!(lambda_min(Matrix(n0 - ninf)) > 0.0)) out.fail(tag(i) + ": N(0) - N(inf) not PD");
    if (lambda_min(ninf) >= -1e-12) {
      if (!(lambda_min(n0) > 0.0)) out.fail(tag(i) + ": N(0) not PD");
      const ComplexVector e = eig_general(Matrix(m0 * n0));
      const double im = e.imag().cwiseAbs().maxCoeff();
      if (im > 1e-8 * (1.0 + (m0 * n0).norm())) out.fail(tag(i) + ": complex eig(M(0)N(0))");
    }
  }
  return out;
}

Outcome rotation_identity(int cases) {
  Outcome out{"NI sweep agrees with the PR sweep of s(P - P(inf))"};
  Rng rng(116);
  for (int i = 0; i < cases; ++i, ++out.cases) {
    const Index m = rng.integer(1, 2);
    StateSpace p = rng.sni(m);
    switch (i % 3) {
      case 1: p = scale(p, -1.0); break;
      case 2: {
        // The identity needs a symmetric feedthrough.
        const StateSpace r = random_stable(rng, rng.integer(1, 5), m);
        p = StateSpace(r.A(), r.B(), r.C(), 0.5 * (r.D() + r.D().transpose()));
        break;
      }
      default: break;
    }
    const StateSpace q = rotate_to_positive_real(p);
    const FrequencyGrid g = default_grid(p, 50);
    double worst = 0.0;
    for (double w : g.points) {
      const ComplexMatrix h = hermitian_imaginary_part(p, w);
      const ComplexMatrix qw = eval(q, Complex(0, w));
      const ComplexMatrix pr = qw + qw.adjoint();
      worst = std::max(worst, (pr - w * h).norm() / (w * (1.0 + eval(p, Complex(0, w)).norm())));
    }
    if (worst > 1e-9) out.fail(tag(i) + ": Q + Q^* differs from w H(w) by " + format_number(worst));
    const bool ni = check_ni_sweep(p, g).holds;
    const bool pr = check_positive_real(q, g).holds;
    if (ni != pr) out.fail(tag(i) + ": NI " + std::to_string(ni) + " but PR " + std::to_string(pr));
  }
  return out;
}

Outcome sweep_lmi_agreement(int modal_cases, int non_ni_cases) {
  Outcome out{"NI sweep agrees with the NI lemma LMI"};
  Rng rng(117);
  for (int i = 0; i < modal_cases + non_ni_cases; ++i, ++out.cases) {
    const Index m = rng.integer(1, 2);
    StateSpace p = i < modal_cases ? random_modal_plant(rng, m)
                                   : (i % 2 ? scale(random_modal_plant(rng, m), -1.0)
                                            : random_stable(rng, rng.integer(1, 4), m));
    if (i >= modal_cases) {
      // Symmetric D so the LMI route decides on the dynamics.
      p = StateSpace(p.A(), p.B(), p.C(), 0.5 * (p.D() + p.D().transpose()));
    }
    const bool sweep = check_ni_sweep(p, default_grid(p)).holds;
    const NiLmiResult lmi = check_ni_lmi(p);
    if (sweep != lmi.is_ni) {
      out.fail(tag(i) + ": sweep " + std::to_string(sweep) + " lmi " + std::to_string(lmi.is_ni) + " (" + lmi.reason + ")");
    }
    if (i < modal_cases && !sweep) out.fail(tag(i) + ": modal plant not NI");
  }
  return out;
}

Outcome dc_gain_iff(int cases) {
  Outcome out{"DC-gain verdict matches the closed-loop pole test"};
  Rng rng(118);
  const StateSpace n1 = irc(2.0, 0.7);
  for (int i = 0; i < cases; ++i) {
    const Index m = rng.integer(1, 2);
    const StateSpace n = m == 1 ? n1 : diagonal_replicate(n1, 2);
    const StateSpace base = random_modal_plant(rng, m);
    const double lam = eig_general(Matrix(dc_gain(base) * dc_gain(n))).real().maxCoeff();
    // Target lambda_max on both sides of 1, away from the marginal band.
    double target = rng.log_uniform(0.1, 10.0);
    if (std::abs(target - 1.0) < 1e-3) target = 1.0 + (i % 2 ? 1e-2 : -1e-2);
    const StateSpace mm = scale(base, target / lam);
    const StabilityReport r = theorem5_verdict(mm, n);
    if (!r.hypotheses_hold) {
      out.fail(tag(i) + ": hypotheses failed: " + r.m_reason + " " + r.n_reason);
      ++out.cases;
      continue;
    }
    if (r.dc_verdict == DcVerdict::Marginal) continue;
    ++out.cases;
    const bool dc_stable = r.dc_verdict == DcVerdict::Stable;
    if (dc_stable != r.pole_test_stable) {
      out.fail(tag(i) + ": lambda_max " + format_number(r.lambda_max_dc) + " but pole test " +
               std::to_string(r.pole_test_stable));
    }
  }
  return out;
}

Outcome nyquist_phase(int cases) {
  Outcome out{"loop gain never crosses the positive real axis for w > 0"};
  Rng rng(119);
  for (int attempt = 0; out.cases < cases && attempt < 20 * cases; ++attempt) {
    const StateSpace mm = random_modal_plant(rng, 1);
    const StateSpace nn = scale(rng.sni(1), rng.log_uniform(0.01, 3.0));
    if (!internal_stability(mm, nn).stable) continue;
    ++out.cases;
    const StateSpace loop = series(mm, nn);
    const FrequencyGrid g = default_grid(loop);
    Complex prev = eval(loop, Complex(0, g.points.front()))(0, 0);
    for (std::size_t k = 1; k < g.points.size(); ++k) {
      const Complex cur = eval(loop, Complex(0, g.points[k]))(0, 0);
      const double scale = std::abs(cur) + std::abs(prev) + 1e-300;
      const bool sign_change = prev.imag() * cur.imag() < 0.0;
      if (sign_change) {
        const double t = prev.imag() / (prev.imag() - cur.imag());
        const double re = prev.real() + t * (cur.real() - prev.real());
        if (re > 1e-9 * scale) {
          out.fail(tag(attempt) + ": crossing at Re " + format_number(re) + " near w=" + format_number(g.points[k]));
          break;
        }
      }
      prev = cur;
    }
  }
  return out;
}

Outcome controller_family_sni(int cases) {
  Outcome out{"controller families are SNI"};
  Rng rng(120);
  auto terms = [&rng] {
    std::vector<SecondOrderTerm> t;
    const int count = rng.integer(1, 4);
    for (int k = 0; k < count; ++k) {
      t.push_back({rng.log_uniform(0.1, 10.0), rng.uniform(0.02, 1.0), rng.log_uniform(0.3, 30.0)});
    }
    return t;
  };
  auto vector_terms = [&rng](Index m) {
    std::vector<ResonantVectorTerm> t;
    const int count = static_cast<int>(m) + rng.integer(0, 4 - static_cast<int>(std::min<Index>(m, 4)));
    for (int k = 0; k < count; ++k) {
      Vector v = rng.matrix(m, 1, 0.3).col(0);
      if (k < m) v(k) += rng.uniform(0.5, 2.0);
      t.push_back({v, rng.uniform(0.02, 1.0), rng.log_uniform(0.3, 30.0)});
    }
    return t;
  };
  for (int i = 0; i < cases; ++i, ++out.cases) {
    const Index m = rng.integer(1, 3);
    std::vector<std::pair<std::string, StateSpace>> family{
        {"ppf", ppf(terms())},
        {"resonant_acc", resonant_acc(terms())},
        {"resonant_vel_type", resonant_vel_type(terms())},
        {"resonant_acc mimo", resonant_acc(vector_terms(m))},
        {"resonant_vel_type mimo", resonant_vel_type(vector_terms(m))},
        {"irc", irc(IrcParams{rng.spd(m), rng.spd(m)})},
    };
    Matrix k = rng.matrix(m + 1, m, 0.3);
    k.topRows(m) += Matrix::Identity(m, m);
    family.emplace_back("ppf mimo", ppf(MimoPpfParams{k, rng.spd(m + 1, 0.1, 2.0), rng.spd(m + 1, 0.5, 20.0)}));
    for (const auto& [name, sys] : family) {
      std::string why;
      if (!sni_by_zeros(sys, why)) out.fail(tag(i) + " " + name + ": " + why);
    }
  }
  return out;
}

Outcome resonant_decomposition(int cases) {
  Outcome out{"velocity resonant section splits into a gain plus a PPF section"};
  Rng rng(121);
  for (int i = 0; i < cases; ++i, ++out.cases) {
    const SecondOrderTerm t{rng.log_uniform(0.1, 10.0), rng.uniform(0.02, 1.0), rng.log_uniform(0.3, 30.0)};
    const StateSpace vel = resonant_vel_type(std::vector{t});
    const StateSpace split = add(StateSpace::static_gain(Matrix::Constant(1, 1, -t.k)),
                                 ppf(std::vector<SecondOrderTerm>{{t.k * t.omega * t.omega, t.zeta, t.omega}}));
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Complex s = random_point(rng);
      worst = std::max(worst, rel_err(eval(vel, s), eval(split, s)));
    }
    if (worst > 1e-10) out.fail(tag(i) + ": " + format_number(worst));
  }
  return out;
}

}  // namespace negimag::properties
