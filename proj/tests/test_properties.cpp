#include <gtest/gtest.h>

#include "properties.hpp"

namespace negimag::properties {
namespace {

void expect_pass(const Outcome& o, int min_cases) {
  EXPECT_GE(o.cases, min_cases) << o.summary();
  EXPECT_EQ(o.failures, 0) << o.summary();
}

TEST(NumericsProperty, SymmetricEigenvalues) { expect_pass(symmetric_eigenvalues(), 50); }
TEST(NumericsProperty, SolveRoundTrip) { expect_pass(solve_round_trip(), 50); }
TEST(NumericsProperty, SigmaMaxSquared) { expect_pass(sigma_max_squared(), 50); }

TEST(StateSpaceProperty, ConjugateSymmetry) { expect_pass(conjugate_symmetry(), 50); }
TEST(StateSpaceProperty, ModalTwoPath) { expect_pass(modal_two_path(), 100); }
TEST(StateSpaceProperty, AddLinearity) { expect_pass(add_linearity(), 50); }
TEST(StateSpaceProperty, FeedbackFormula) { expect_pass(feedback_formula(), 40); }

TEST(LmiProperty, AnalyticSolutions) { expect_pass(lmi_analytic_solutions(), 10); }
TEST(LmiProperty, Deterministic) { expect_pass(lmi_deterministic(), 5); }

TEST(NiProperty, Additivity) { expect_pass(additivity(), 50); }
TEST(NiProperty, FeedbackClosure) { expect_pass(feedback_closure(), 50); }
TEST(NiProperty, StarProductClosure) { expect_pass(star_product_closure(), 50); }
TEST(NiProperty, SniConstructions) { expect_pass(sni_constructions(), 50); }
TEST(NiProperty, IrcIsSni) { expect_pass(irc_is_sni(), 50); }
TEST(NiProperty, DcOrderings) { expect_pass(dc_orderings(), 50); }
TEST(NiProperty, RotationIdentity) { expect_pass(rotation_identity(), 50); }
TEST(NiProperty, SweepLmiAgreement) { expect_pass(sweep_lmi_agreement(), 70); }

TEST(RobustStabilityProperty, DcGainIff) { expect_pass(dc_gain_iff(), 50); }
TEST(RobustStabilityProperty, NyquistPhase) { expect_pass(nyquist_phase(), 50); }

TEST(ControllerProperty, FamilyIsSni) { expect_pass(controller_family_sni(), 50); }
TEST(ControllerProperty, ResonantDecomposition) { expect_pass(resonant_decomposition(), 50); }

}  // namespace
}  // namespace negimag::properties
