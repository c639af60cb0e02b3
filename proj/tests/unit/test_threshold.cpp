#include <gtest/gtest.h>

#include <cmath>

#include "entver/protocols/threshold.hpp"

using namespace entver;

namespace {

// Measure in the computational basis and resend the outcome.
double z_measure_resend(const TestEnsemble& ens) {
  CMatrix p0 = CMatrix::Zero(2, 2), p1 = CMatrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  return measure_prepare_fidelity(ens, {p0, p1}, {basis_ket(2, 0), basis_ket(2, 1)});
}

}  // namespace

TEST(Ensembles, Validation) {
  EXPECT_NO_THROW(ensembles::tetrahedral().validate());
  EXPECT_NO_THROW(ensembles::mub6().validate());
  EXPECT_EQ(ensembles::mub6().size(), 6);
  EXPECT_EQ(ensembles::mub_four_subsets().size(), 15u);
  EXPECT_EQ(ensembles::parse("subset:0,1,+x,-x").size(), 4);
  EXPECT_THROW(ensembles::parse("subset:0,0"), Error);
  EXPECT_THROW(ensembles::parse("Q"), Error);
}

TEST(MeasurePrepare, ZStrategyOnSixStates) {
  // Z eigenstates are kept perfectly, the other four reach 1/2.
  EXPECT_NEAR(z_measure_resend(ensembles::mub6()), (2.0 * 1.0 + 4.0 * 0.5) / 6.0, 1e-12);
}

TEST(ClassicalThreshold, TetrahedralAndSixStates) {
  const ThresholdResult t = classical_threshold(ensembles::tetrahedral());
  EXPECT_NEAR(t.f_tilde, 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(t.baseline, 0.5, 1e-9);
  EXPECT_TRUE(t.converged);
  const ThresholdResult m = classical_threshold(ensembles::mub6());
  EXPECT_NEAR(m.f_tilde, 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(measure_prepare_fidelity(ensembles::mub6(), m.povm, m.resend), m.f_tilde, 1e-9);
}

TEST(ClassicalThreshold, FourStateSubsets) {
  // Two full bases: 3/4. Three bases represented: 1/2 + sqrt(6)/8.
  EXPECT_NEAR(classical_threshold(ensembles::parse("subset:0,1,+x,-x")).f_tilde, 0.75, 1e-6);
  EXPECT_NEAR(classical_threshold(ensembles::parse("subset:0,1,+x,+y")).f_tilde, 0.5 + std::sqrt(6.0) / 8.0, 1e-6);
}

TEST(ClassicalThreshold, MonotoneUnderEnsembleRestriction) {
  const double full = cached_threshold(ensembles::mub6()).f_tilde;
  const double sub = cached_threshold(ensembles::parse("subset:0,+x,-x,+y")).f_tilde;
  EXPECT_GE(sub, full - 1e-6);
  EXPECT_GE(classical_threshold(ensembles::parse("subset:0,1")).f_tilde, 1.0 - 1e-6);
}

TEST(ClassicalThreshold, TraceIsNondecreasing) {
  const ThresholdResult r = classical_threshold(ensembles::parse("subset:0,1,+x,+y"));
  for (size_t k = 1; k < r.trace.size(); ++k) EXPECT_GE(r.trace[k], r.trace[k - 1] - 1e-12);
  EXPECT_EQ(&cached_threshold(ensembles::mub6()), &cached_threshold(ensembles::mub6()));
}
