// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "negimag/controllers.hpp"
#include "negimag/errors.hpp"
#include "negimag/lmi.hpp"
#include "negimag/ni_analysis.hpp"
#include "negimag/robust_stability.hpp"
#include "negimag/synthesis.hpp"
#include "properties.hpp"
#include "test_support.hpp"

namespace {

using namespace negimag;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAILED]");
    pass = pass && ok;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

UncertainPlant example_plant() {
  UncertainPlant p;
  p.A = matrix_from_rows({{-1, 0, 0}, {1, -1, 1}, {0, 1, -1}});
  p.B1 = matrix_from_rows({{0}, {0}, {1}});
  p.B2 = matrix_from_rows({{-2}, {1}, {0}});
  p.C1 = matrix_from_rows({{0, 1, 0}});
  return p;
}

Verdict ac1() {
  Verdict v;
  const auto t0 = Clock::now();
  const double dc = dc_gain(testing::plantt())(0, 0);
  const double t = seconds_since(t0);
  v.check(rel(dc, 1.5498e-4) <= 1e-4, "P(0) = " + num(dc) + " vs 1.5498e-4");
  v.check(rel(dc, testing::plantt_dc()) <= 1e-12, "exact sum " + num(testing::plantt_dc()));
  v.check(t < 1.0, "runtime " + num(t) + " s");
  return v;
}

Verdict ac2() {
  Verdict v;
  const StateSpace p = testing::plantt();
  const double phi = choose_phi(p, 1.2)(0, 0);
  v.check(rel(phi, 1.8597e-4) <= 1e-4, "Phi = " + num(phi));
  const StabilityReport r = theorem5_verdict(p, irc(9.6584e5, phi));
  v.check(r.internally_stable && r.theorem_applies && r.dc_verdict == DcVerdict::Stable,
          "verdict " + to_string(r.dc_verdict));
  v.check(std::abs(r.lambda_max_dc - 1.0 / 1.2) <= 1e-6, "lambda_max = " + num(r.lambda_max_dc));
  return v;
}

Verdict ac3() {
  Verdict v;
  const StateSpace p = testing::plantt();
  const double phi = choose_phi(p, 1.2)(0, 0);
  const auto t0 = Clock::now();
  const IrcDesign d = design_irc_gamma(p, phi);
  const double t = seconds_since(t0);
  v.check(rel(d.gamma_star, 9.6584e5) <= 0.05, "Gamma* = " + num(d.gamma_star) + " (" +
                                                   num(100 * rel(d.gamma_star, 9.6584e5)) + "% off)");
  v.check(d.zeta_star >= 5 * d.open_loop_zeta && std::abs(d.open_loop_zeta - 0.01) < 1e-12,
          "zeta " + num(d.zeta_star) + " vs open loop " + num(d.open_loop_zeta));
  v.check(t < 60.0, "runtime " + num(t) + " s");
  return v;
}

Verdict ac4() {
  Verdict v;
  const StateSpace fo = testing::first_order();
  const auto gfo = default_grid(fo);
  v.check(check_ni_sweep(fo, gfo).holds && check_sni_sweep(fo, gfo).holds && check_sni_zeros(fo).is_sni &&
              check_positive_real(fo, gfo).holds && check_strictly_positive_real(fo, gfo).holds,
          "1/(s+1) NI SNI PR SPR");

  const StateSpace so = testing::second_order();
  const SniZerosResult z = check_sni_zeros(so);
  int near_j = 0;
  for (const Complex& c : z.axis_zeros) near_j += std::abs(c - Complex(0, 1)) <= 1e-4 ? 1 : 0;
  v.check(check_ni_sweep(so, default_grid(so)).holds && !z.is_sni && near_j == 2,
          "second order NI, not SNI, " + std::to_string(near_j) + " zeros at j");

  const StateSpace vel = modal_to_ss(ModalModel(1, {Mode{1.0, 1.0, Vector::Ones(1)}}, OutputKind::Velocity));
  const auto gv = default_grid(vel);
  v.check(check_positive_real(vel, gv).holds && !check_strictly_positive_real(vel, gv).holds,
          "s/(s^2+s+1) PR, not SPR");

  const StateSpace un = testing::ss({{1}}, {{1}}, {{1}}, {{0}});
  v.check(!check_ni_sweep(un, default_grid(un)).holds && !check_ni_lmi(un).is_ni, "1/(s-1) not NI");
  return v;
}

Verdict ac5() {
  Verdict v;
  const VerifyTolerances loose{-1e-6, 1e-6, 1e-5};
  const Matrix y = matrix_from_rows(
      {{100.375, -36.75, 2.5, 3}, {-36.75, 18.5, -3, -1}, {2.5, -3, 1, 0}, {3, -1, 0, 0.2}});
  const VerificationReport r1 = verify_certificate(ni_lemma_problem(testing::second_order()), VariableValues({y}), loose);
  v.check(r1.passed, "second-order Y (min margin " + num(r1.min_relative_margin) + ")");

  const Matrix ys = matrix_from_rows(
      {{3.9594e9, -2.0008, -3.9594e9}, {-2.0008, 0.72850, 1.7293}, {-3.9594e9, 1.7293, 3.9594e9}});
  const Matrix ms = matrix_from_rows({{-2.8122, 1.0, 2.6260}});
  const VerificationReport r2 =
      verify_certificate(synthesis_lmi_problem(example_plant(), 1e-6, Lmi2Form::Block), VariableValues({ys, ms}), loose);
  v.check(r2.passed, "synthesis (Y, M) (min margin " + num(r2.min_relative_margin) + ")");
  return v;
}

Verdict ac6() {
  Verdict v;
  const UncertainPlant plant = example_plant();
  const SynthesisResult r = synthesize_state_feedback(plant, 1e-6);
  v.check(r.feasible && r.verification.passed,
          "synthesized K " + (r.feasible ? "[" + num(r.K(0, 0)) + ", " + num(r.K(0, 1)) + ", " + num(r.K(0, 2)) + "]"
                                         : std::string("none")));
  const ClosedLoopReport k = verify_closed_loop(plant, matrix_from_rows({{0.22927, 1.4581, 0.22927}}));
  v.check(k.hurwitz && k.ni_sweep && k.phase_in_range && k.sigma_max_gcl0 < 1.0 && k.passed,
          "published K, |Gcl(0)| = " + num(k.sigma_max_gcl0));
  return v;
}

Verdict ac7() {
  namespace pr = negimag::properties;
  Verdict v;
  const std::vector<std::function<pr::Outcome()>> suites{
      [] { return pr::additivity(); },           [] { return pr::feedback_closure(); },
      [] { return pr::star_product_closure(); }, [] { return pr::sni_constructions(); },
      [] { return pr::irc_is_sni(); },           [] { return pr::dc_orderings(); },
      [] { return pr::rotation_identity(); },    [] { return pr::dc_gain_iff(); },
  };
  for (const auto& run : suites) {
    const pr::Outcome o = run();
    v.check(o.passed() && o.cases >= 50, o.summary());
  }
  return v;
}

Verdict ac8() {
  Verdict v;
  const double tau = finsler_tau(matrix_from_rows({{1, 0}, {0, 0}}), matrix_from_rows({{-1, 0}, {0, 1}}));
  v.check(std::abs(tau - 1.0) <= 1e-8, "tau = " + num(tau));
  return v;
}

Verdict ac9() {
  Verdict v;
  const negimag::properties::Outcome o = negimag::properties::modal_two_path(100);
  v.check(o.passed() && o.cases >= 100, o.summary());
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s %s %s\n", name, v.pass ? "PASS" : "FAIL", v.detail.c_str());
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
