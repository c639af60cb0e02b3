#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "entver/measures.hpp"
#include "entver/sequence_state.hpp"
#include "entver/sources.hpp"

using namespace entver;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

CMatrix antisymmetric_projector() {
  const CVector s = singlet_ket();
  return s * s.adjoint();
}

}  // namespace

TEST(Werner, GroundTruth) {
  EXPECT_NEAR(sources::werner(0.5).ground_truth_entanglement(), 0.25, 1e-9);
  EXPECT_NEAR(sources::werner(1.0 / 3.0).ground_truth_entanglement(), 0.0, 1e-9);
  EXPECT_NEAR(sources::werner(1.0).ground_truth_entanglement(), 1.0, 1e-9);
  EXPECT_TRUE(sources::werner(0.5).is_iid());
  EXPECT_EQ(sources::werner(0.5).block_len(), 1);
}

TEST(Heralded, ConditionalStates) {
  const DensityMatrix unent = DensityMatrix::maximally_mixed({2, 2});
  const SourceProcess s = sources::heralded(0.1, singlet(), unent);
  EXPECT_TRUE(s.has_herald());
  EXPECT_NEAR(s.herald_probability(1), 0.1, 1e-12);
  EXPECT_NEAR(s.herald_probability(0), 0.9, 1e-12);
  EXPECT_LT(max_abs(s.conditional_marginal(1).mat() - singlet().mat()), 1e-12);
  EXPECT_LT(max_abs(s.conditional_marginal(0).mat() - unent.mat()), 1e-12);
  // The herald is side information: ground truth averages over labels.
  EXPECT_NEAR(s.ground_truth_entanglement(), 0.1, 1e-9);
  EXPECT_THROW(sources::werner(0.5).herald_probability(1), Error);
}

TEST(Heralded, SampledLabelsFollowProbability) {
  const SourceProcess s = sources::heralded(0.3, singlet(), DensityMatrix::maximally_mixed({2, 2}));
  const RunSequence seq = s.sample_runs(20000, 5);
  int yes = 0;
  for (const auto& b : seq.blocks) yes += b.herald.at(0);
  EXPECT_NEAR(yes / 20000.0, 0.3, 4.0 * std::sqrt(0.3 * 0.7 / 20000.0));
}

TEST(APosteriori, DetectionFilterRecoversSinglet) {
  const SourceProcess s = sources::a_posteriori(0.01, singlet());
  EXPECT_EQ(s.run_dims(), (Dims{3, 3}));
  CMatrix keep = CMatrix::Zero(3, 3);
  keep(0, 0) = keep(1, 1) = 1.0;
  const FilterOutcome out = apply_filter(s.marginal(), FilterPair{keep, keep});
  EXPECT_NEAR(out.p_pass, 0.01, 1e-12);
  const int qubit[4] = {0, 1, 3, 4};
  const CMatrix compressed = compress(out.rho_pass.mat(), qubit);
  EXPECT_NEAR(concurrence(DensityMatrix({2, 2}, compressed)).concurrence, 1.0, 1e-9);
  // Twice the negativity of the three-level state: 0.01 of a singlet.
  EXPECT_NEAR(s.ground_truth_entanglement(), 0.01, 1e-9);
}

TEST(PhaseMixed, MarginalIsClassical) {
  const SourceProcess s = sources::phase_mixed(PhaseDrift{});
  CMatrix expected = CMatrix::Zero(4, 4);
  expected(1, 1) = expected(2, 2) = 0.5;
  EXPECT_LT(max_abs(s.marginal().mat() - expected), 1e-15);
  EXPECT_NEAR(s.ground_truth_entanglement(), 0.0, 1e-12);
  EXPECT_LT(max_abs(s.co_rotating_marginal().mat() - expected), 1e-15);
}

TEST(PhaseMixed, SampledPhasesAverageOut) {
  const SourceProcess s = sources::phase_mixed(PhaseDrift{});
  const RunSequence seq = s.sample_runs(20000, 17);
  std::complex<double> mean = 0.0;
  for (const auto& b : seq.blocks) mean += std::polar(1.0, b.phase.at(0));
  EXPECT_LT(std::abs(mean / 20000.0), 0.05);
}

TEST(PhaseMixed, LeakedPhaseGivesCoRotatingSinglet) {
  const SourceProcess s = sources::phase_mixed(PhaseDrift{PhaseLaw::uniform, 0.0, true});
  const CVector k = phase_ket(0.0);
  EXPECT_LT(max_abs(s.co_rotating_marginal().mat() - k * k.adjoint()), 1e-15);
  EXPECT_TRUE(s.sample_runs(4, 1).phase_leaked);
}

TEST(PhaseMixed, RandomWalkNeedsStep) {
  EXPECT_THROW(sources::phase_mixed(PhaseDrift{PhaseLaw::random_walk, 0.0, false}), Error);
  EXPECT_FALSE(sources::phase_mixed(PhaseDrift{PhaseLaw::random_walk, 0.1, false}).is_iid());
}

TEST(DualRail, Variants) {
  const SourceProcess ent = sources::dual_rail(DualRailVariant::entangled, 0.1, 0.3);
  EXPECT_NEAR(ent.ground_truth_entanglement(), 1.0, 1e-9);
  const SourceProcess prod = sources::dual_rail(DualRailVariant::product, 0.1, 0.3);
  EXPECT_NEAR(prod.ground_truth_entanglement(), 0.0, 1e-12);
  EXPECT_THROW(sources::dual_rail(DualRailVariant::product, 0.5, 0.0), Error);
}

TEST(DeFinetti, MarginalIsWeightedMixture) {
  const SourceProcess s = sources::definetti({0.25, 0.75}, {singlet(), DensityMatrix::maximally_mixed({2, 2})});
  EXPECT_LT(max_abs(s.marginal().mat() - werner_state(0.25).mat()), 1e-12);
  EXPECT_NEAR(s.ground_truth_entanglement(), 0.0, 1e-9);
  EXPECT_THROW(sources::definetti({1.0}, {}), Error);
}

TEST(SingletFraction, MarginalAndGroundTruth) {
  const SourceProcess s = sources::singlet_fraction();
  EXPECT_EQ(s.block_len(), 2);
  EXPECT_FALSE(s.is_iid());
  EXPECT_NEAR(s.ground_truth_entanglement(), 0.0, 1e-12);
  const int keep_a[1] = {0};
  EXPECT_LT(max_abs(partial_trace(s.marginal(), keep_a).mat() - pauli::I() / 2.0), 1e-12);
  EXPECT_NEAR(negativity(s.marginal()), 0.0, 1e-12);
}

TEST(SingletFraction, AntisymmetricWeightOnAlicePairIsQuarter) {
  const SourceProcess s = sources::singlet_fraction();
  double p = 0.0;
  const auto& e = *s.ensemble();
  for (const auto& c : e.components) {
    const CMatrix aa = reduced_on_slots(c.factors, {{0, kSideA}, {1, kSideA}}, s.run_dims());
    p += c.prob * (antisymmetric_projector() * aa).trace().real();
  }
  EXPECT_NEAR(p, 0.25, 1e-12);
}

TEST(CrossSide, BobMirrorsAlice) {
  const SourceProcess s = sources::cross_side_correlated();
  EXPECT_NEAR(s.ground_truth_entanglement(), 0.0, 1e-12);
  const auto& e = *s.ensemble();
  double pb = 0.0;
  for (const auto& c : e.components) {
    const CMatrix bb = reduced_on_slots(c.factors, {{0, kSideB}, {1, kSideB}}, s.run_dims());
    pb += c.prob * (antisymmetric_projector() * bb).trace().real();
  }
  EXPECT_NEAR(pb, 0.25, 1e-12);
}

TEST(AntiGrouping, SeparableAndBlockStructured) {
  const SourceProcess s = sources::anti_grouping(20);
  EXPECT_EQ(s.block_len(), 20);
  EXPECT_NEAR(s.ground_truth_entanglement(), 0.0, 1e-12);
  EXPECT_LT(max_abs(s.marginal().mat() - CMatrix::Identity(4, 4) / 4.0), 1e-12);
  EXPECT_THROW(sources::anti_grouping(3), Error);
}

TEST(SampleRuns, DeterministicAndTruncated) {
  const SourceProcess s = sources::singlet_fraction();
  const RunSequence a = s.sample_runs(101, 99);
  const RunSequence b = s.sample_runs(101, 99);
  ASSERT_EQ(a.blocks.size(), 51u);
  EXPECT_EQ(a.blocks.back().length, 1);
  int total = 0;
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    EXPECT_EQ(a.blocks[i].component, b.blocks[i].component);
    total += a.blocks[i].length;
  }
  EXPECT_EQ(total, 101);
  const RunSequence c = s.sample_runs(101, 100);
  int differ = 0;
  for (size_t i = 0; i < a.blocks.size(); ++i) differ += a.blocks[i].component != c.blocks[i].component;
  EXPECT_GT(differ, 0);
  EXPECT_THROW(s.sample_runs(0, 1), Error);
}

TEST(SampleRuns, ComponentFrequencies) {
  const SourceProcess s = sources::singlet_fraction();
  const RunSequence seq = s.sample_runs(40000, 3);
  int singlet_blocks = 0;
  for (const auto& b : seq.blocks) singlet_blocks += b.component == 0;
  const double n = static_cast<double>(seq.blocks.size());
  EXPECT_NEAR(singlet_blocks / n, 0.25, 4.0 * std::sqrt(0.25 * 0.75 / n));
}

TEST(BlockEnsemble, ValidationErrors) {
  const auto st = std::make_shared<const DensityMatrix>(singlet());
  BlockEnsemble missing_slot{2, {BlockComponent{1.0, {WiredFactor{st, {{0, kSideA}, {0, kSideB}}}}, {}}}};
  EXPECT_THROW(missing_slot.validate({2, 2}), Error);
  BlockEnsemble bad_prob{1, {BlockComponent{0.5, {WiredFactor{st, {{0, kSideA}, {0, kSideB}}}}, {}}}};
  EXPECT_THROW(bad_prob.validate({2, 2}), Error);
  BlockEnsemble ok{1, {BlockComponent{1.0, {WiredFactor{st, {{0, kSideA}, {0, kSideB}}}}, {}}}};
  EXPECT_NO_THROW(ok.validate({2, 2}));
}
