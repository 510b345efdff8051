#include <gtest/gtest.h>

#include <cmath>

#include "negimag/controllers.hpp"
#include "negimag/errors.hpp"
#include "negimag/robust_stability.hpp"
#include "test_support.hpp"

namespace negimag {
namespace {

StateSpace gain(double k) { return StateSpace::static_gain(Matrix::Constant(1, 1, k)); }

TEST(InternalStability, FirstOrderWithGain) {
  // Closed-loop pole at k - 1.
  EXPECT_TRUE(internal_stability(testing::first_order(), gain(0.5)).stable);
  EXPECT_FALSE(internal_stability(testing::first_order(), gain(1.5)).stable);
  EXPECT_TRUE(internal_stability(testing::first_order(), gain(1.5), LoopSign::Negative).stable);
  const InternalStability s = internal_stability(testing::first_order(), gain(0.5));
  EXPECT_NEAR(s.max_real_part, -0.5, 1e-14);
}

TEST(InternalStability, IllPosedLoop) {
  EXPECT_THROW(internal_stability(gain(1.0), gain(1.0)), IllPosedLoopError);
}

TEST(InternalStability, HiddenUnstableModeDetected) {
  // Unstable pole-zero cancellation in M: the loop cannot be internally stable.
  const StateSpace m = testing::ss({{1, 0}, {0, -1}}, {{0}, {1}}, {{0, 1}}, {{0}});
  EXPECT_FALSE(internal_stability(m, gain(0.1)).stable);
}

TEST(Theorem5, PaperIrcLoopStable) {
  const StateSpace p = testing::plantt();
  const double phi = choose_phi(p, 1.2)(0, 0);
  const StabilityReport r = theorem5_verdict(p, irc(9.6584e5, phi));
  EXPECT_TRUE(r.hypotheses_hold);
  EXPECT_TRUE(r.theorem_applies);
  EXPECT_NEAR(r.lambda_max_dc, 1.0 / 1.2, 1e-6);
  EXPECT_EQ(r.dc_verdict, DcVerdict::Stable);
  EXPECT_TRUE(r.internally_stable);
  EXPECT_TRUE(r.pole_test_stable);
}

TEST(Theorem5, DcGainAboveOneUnstable) {
  const StateSpace p = testing::plantt();
  const double phi = choose_phi(p, 0.8)(0, 0);
  const StabilityReport r = theorem5_verdict(p, irc(1e5, phi));
  EXPECT_NEAR(r.lambda_max_dc, 1.25, 1e-6);
  EXPECT_EQ(r.dc_verdict, DcVerdict::Unstable);
  EXPECT_FALSE(r.internally_stable);
  EXPECT_FALSE(r.pole_test_stable);
}

TEST(Theorem5, MarginalBandFallsBackToPoles) {
  const StabilityReport r = theorem5_verdict(testing::first_order(), testing::first_order());
  EXPECT_NEAR(r.lambda_max_dc, 1.0, 1e-12);
  EXPECT_EQ(r.dc_verdict, DcVerdict::Marginal);
  EXPECT_FALSE(r.theorem_applies);
  // Closed-loop characteristic polynomial (s + 1)^2 - 1 has a root at 0.
  EXPECT_FALSE(r.internally_stable);
}

TEST(Theorem5, HypothesisFailureReported) {
  const StateSpace not_ni = testing::ss({{-1}}, {{1}}, {{-1}}, {{0}});
  const StabilityReport r = theorem5_verdict(not_ni, testing::first_order());
  EXPECT_FALSE(r.m_is_ni);
  EXPECT_FALSE(r.hypotheses_hold);
  EXPECT_FALSE(r.theorem_applies);
  // Negative feedback through 1/(s+1)^2 is stable; the verdict comes from poles.
  EXPECT_TRUE(r.internally_stable);
  EXPECT_FALSE(r.summary.empty());
}

TEST(Theorem5, NonSniNReported) {
  const StabilityReport r = theorem5_verdict(testing::first_order(), scale(testing::second_order(), 0.5));
  EXPECT_FALSE(r.n_is_sni);
  EXPECT_FALSE(r.theorem_applies);
}

TEST(Theorem5, CertificateRouteAgrees) {
  const StateSpace p = testing::plantt();
  const double phi = choose_phi(p, 1.2)(0, 0);
  Theorem5Options opts;
  opts.use_certificates = true;
  const StabilityReport r = theorem5_verdict(p, irc(9.6584e5, phi), opts);
  EXPECT_TRUE(r.hypotheses_hold);
  EXPECT_TRUE(r.internally_stable);
}

TEST(Theorem5, DimensionChecks) {
  const StateSpace two = diagonal_replicate(testing::first_order(), 2);
  EXPECT_THROW(theorem5_verdict(two, testing::first_order()), DimensionError);
}

TEST(Theorem5, VerdictNames) {
  EXPECT_EQ(to_string(DcVerdict::Stable), "stable");
  EXPECT_EQ(to_string(DcVerdict::Unstable), "unstable");
  EXPECT_EQ(to_string(DcVerdict::Marginal), "marginal");
}

}  // namespace
}  // namespace negimag
