#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "entver/measures.hpp"
#include "entver/protocols/chsh.hpp"
#include "entver/protocols/single_run.hpp"
#include "entver/protocols/teleport.hpp"
#include "entver/protocols/tomography.hpp"
#include "entver/protocols/witness.hpp"
#include "entver/random.hpp"

using namespace entver;

namespace {

constexpr double kTsirelson = 2.0 * std::numbers::sqrt2;

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

ChshOptions chsh_exact() {
  ChshOptions o;
  o.exact = true;
  return o;
}

}  // namespace

TEST(Decide, SigmaRuleAndTies) {
  EXPECT_EQ(decide(2.5, 2.0, 0.1, Direction::above), Verdict::entangled);
  EXPECT_EQ(decide(2.25, 2.0, 0.1, Direction::above), Verdict::inconclusive);
  EXPECT_EQ(decide(2.0, 2.0, 0.0, Direction::above), Verdict::inconclusive);
  EXPECT_EQ(decide(-0.5, 0.0, 0.1, Direction::below), Verdict::entangled);
  EXPECT_EQ(decide(0.5, 0.0, 0.0, Direction::below), Verdict::inconclusive);
  EXPECT_EQ(decide(std::nan(""), 0.0, 0.0, Direction::above), Verdict::inconclusive);
}

TEST(Chsh, ExactValues) {
  const VerifierReport s = chsh_test(sources::werner(1.0), chsh_exact());
  EXPECT_NEAR(s.statistic, kTsirelson, 1e-12);
  EXPECT_EQ(s.verdict, Verdict::entangled);
  const VerifierReport w = chsh_test(sources::werner(0.6), chsh_exact());
  EXPECT_NEAR(w.statistic, 0.6 * kTsirelson, 1e-12);
  EXPECT_EQ(w.verdict, Verdict::inconclusive);
}

TEST(Chsh, SampledSinglet) {
  ChshOptions o;
  o.shots = 20000;
  o.seed = 3;
  const VerifierReport r = chsh_test(sources::werner(1.0), o);
  EXPECT_NEAR(r.statistic, kTsirelson, 4.0 * r.se);
  EXPECT_GT(r.se, 0.0);
  EXPECT_EQ(r.verdict, Verdict::entangled);
  o.exec = Exec::serial;
  EXPECT_EQ(chsh_test(sources::werner(1.0), o).statistic, r.statistic);
}

TEST(Chsh, HeraldConditioning) {
  const SourceProcess src = sources::heralded(0.1, singlet(), DensityMatrix::maximally_mixed({2, 2}));
  ChshOptions o = chsh_exact();
  EXPECT_NEAR(chsh_test(src, o).statistic, 0.1 * kTsirelson, 1e-12);
  o.condition_on_herald = true;
  const VerifierReport r = chsh_test(src, o);
  EXPECT_NEAR(r.statistic, kTsirelson, 1e-12);
  EXPECT_NEAR(r.diagnostics.at("pass_probability"), 0.1, 1e-12);
  EXPECT_TRUE(r.audit.all_respected());
}

TEST(Chsh, Errors) {
  ChshOptions o = chsh_exact();
  o.settings.a1 = pauli::Z() * 2.0;
  EXPECT_THROW(chsh_test(sources::werner(1.0), o), Error);
  ChshOptions e = chsh_exact();
  e.detection_eta = 0.0;
  EXPECT_THROW(chsh_test(sources::werner(1.0), e), Error);
}

TEST(Witness, Pauli6DecompositionReconstructs) {
  Rng rng(61);
  for (int t = 0; t < 10; ++t) {
    CMatrix h = random_density(4, rng) - CMatrix::Identity(4, 4) / 4.0;
    const WitnessDecomposition d = pauli6_decomposition(h);
    EXPECT_LT(decomposition_residual(h, d), 1e-9);
    EXPECT_LT(max_abs(d.reconstruct() - h), 1e-9);
  }
  CMatrix lifted = CMatrix::Zero(4, 4);
  lifted(0, 1) = 1.0;  // not Hermitian, not reachable with real coefficients
  EXPECT_THROW(pauli6_decomposition(lifted), Error);
}

TEST(Witness, SingletWitnessOnWernerGrid) {
  WitnessOptions o;
  o.exact = true;
  for (int i = 0; i <= 10; ++i) {
    const double a = i / 10.0;
    const VerifierReport r = witness_test(sources::werner(a), singlet_witness(), o);
    EXPECT_NEAR(r.statistic, (1.0 - 3.0 * a) / 4.0, 1e-12) << "alpha " << a;
    EXPECT_EQ(r.verdict, a > 1.0 / 3.0 + 1e-9 ? Verdict::entangled : Verdict::inconclusive);
  }
}

TEST(Witness, BellOperatorWitness) {
  const Witness w = bell_operator_witness(ChshSettings::optimal());
  EXPECT_LT(decomposition_residual(w.op, w.decomposition), 1e-9);
  WitnessOptions o;
  o.exact = true;
  EXPECT_NEAR(witness_test(sources::werner(0.6), w, o).statistic, 2.0 - 0.6 * kTsirelson, 1e-12);
  EXPECT_EQ(witness_test(sources::werner(0.6), w, o).verdict, Verdict::inconclusive);
  EXPECT_EQ(witness_test(sources::werner(1.0), w, o).verdict, Verdict::entangled);
}

TEST(Witness, SampledMatchesExact) {
  WitnessOptions o;
  o.shots = 36000;
  o.seed = 9;
  const VerifierReport r = witness_test(sources::werner(0.8), singlet_witness(), o);
  EXPECT_NEAR(r.statistic, (1.0 - 2.4) / 4.0, 4.0 * r.se);
  EXPECT_EQ(r.verdict, Verdict::entangled);
}

TEST(Teleport, FidelityOfWernerResource) {
  for (int i = 0; i <= 10; ++i) {
    const double a = i / 10.0;
    EXPECT_NEAR(teleport_fidelity(werner_state(a).mat(), ensembles::mub6()), (1.0 + a) / 2.0, 1e-12);
    EXPECT_NEAR(teleport_fidelity(werner_state(a).mat(), ensembles::tetrahedral()), (1.0 + a) / 2.0, 1e-12);
  }
  EXPECT_NEAR(teleport_fidelity(CMatrix::Identity(4, 4) / 4.0, ensembles::mub6()), 0.5, 1e-12);
}

TEST(Teleport, SingletTeleportsPerfectly) {
  Rng rng(67);
  for (int t = 0; t < 10; ++t) {
    const CVector psi = random_qubit_ket(rng);
    const CMatrix out = teleport_output(singlet().mat(), psi);
    EXPECT_NEAR((psi.adjoint() * out * psi)(0, 0).real(), 1.0, 1e-12);
  }
}

TEST(Teleport, ExactVerdicts) {
  TeleportOptions o;
  o.exact = true;
  const TestEnsemble m = ensembles::mub6();
  EXPECT_EQ(teleport_test(sources::werner(0.5), m, o).verdict, Verdict::entangled);
  const VerifierReport tie = teleport_test(sources::werner(1.0 / 3.0), m, o);
  EXPECT_NEAR(tie.statistic, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(tie.verdict, Verdict::inconclusive);
  EXPECT_TRUE(o.audit().all_respected());
  o.assumed_threshold = 2.0 / 3.0;
  EXPECT_FALSE(o.audit().c2);
}

TEST(Teleport, SampledSinglet) {
  TeleportOptions o;
  o.shots = 12000;
  o.seed = 4;
  const VerifierReport r = teleport_test(sources::werner(1.0), ensembles::mub6(), o);
  EXPECT_NEAR(r.statistic, 1.0, 1e-12);
  EXPECT_EQ(r.verdict, Verdict::entangled);
}

TEST(Teleport, TeleportationWitnessValues) {
  const Witness w = teleportation_witness(ensembles::mub6(), 2.0 / 3.0);
  EXPECT_NEAR((w.op * werner_state(0.5).mat()).trace().real(), -1.0 / 12.0, 1e-12);
  EXPECT_NEAR((w.op * singlet().mat()).trace().real(), -1.0 / 3.0, 1e-12);
  EXPECT_NEAR(w.op.trace().real() / 4.0, 1.0 / 6.0, 1e-12);
  EXPECT_LT(decomposition_residual(w.op, w.decomposition), 1e-9);
}

TEST(Tomography, LinearInversionIsExactOnProbabilities) {
  Rng rng(71);
  for (int t = 0; t < 10; ++t) {
    const CMatrix rho = random_density(4, rng);
    EXPECT_LT(max_abs(linear_inversion(pauli_probabilities(rho)) - rho), 1e-12);
  }
}

TEST(Tomography, ExactMode) {
  TomographyOptions o;
  o.exact = true;
  EXPECT_NEAR(tomography_test(sources::werner(1.0), o).report.statistic, 1.0, 1e-9);
  EXPECT_NEAR(tomography_test(sources::werner(0.5), o).report.statistic, 0.25, 1e-9);
  const TomographyResult mixed = tomography_test(sources::phase_mixed(PhaseDrift{}), o);
  EXPECT_NEAR(mixed.report.statistic, 0.0, 1e-12);
  EXPECT_EQ(mixed.report.verdict, Verdict::inconclusive);
}

TEST(Tomography, SharedPathSeesCoRotatedState) {
  TomographyOptions o;
  o.exact = true;
  o.phase_policy = PhasePolicy::shared_path;
  const SourceProcess leaky = sources::phase_mixed(PhaseDrift{PhaseLaw::uniform, 0.0, true});
  const TomographyResult r = tomography_test(leaky, o);
  EXPECT_NEAR(r.report.statistic, 1.0, 1e-9);
  EXPECT_FALSE(r.report.audit.c4);
  EXPECT_NEAR(leaky.ground_truth_entanglement(), 0.0, 1e-12);
}

TEST(Tomography, LocalSubspaceOnDetectionLoss) {
  TomographyOptions o;
  o.exact = true;
  o.subspace = SubspaceSelection::local;
  const TomographyResult r = tomography_test(sources::a_posteriori(0.01, singlet()), o);
  EXPECT_NEAR(r.report.statistic, 1.0, 1e-9);
  EXPECT_NEAR(r.report.diagnostics.at("pass_fraction"), 0.01, 1e-12);
  EXPECT_NEAR(r.report.diagnostics.at("entanglement_lower_bound"), 0.01, 1e-9);
  EXPECT_TRUE(r.report.audit.all_respected());
}

TEST(Tomography, NonlocalPostselectionFakesEntanglement) {
  TomographyOptions o;
  o.exact = true;
  o.subspace = SubspaceSelection::one_excitation;
  const SourceProcess prod = sources::dual_rail(DualRailVariant::product, 0.1, 0.0);
  const TomographyResult r = tomography_test(prod, o);
  EXPECT_GT(r.report.statistic, 0.9);
  EXPECT_FALSE(r.report.audit.c5);
  EXPECT_FALSE(r.report.audit.c1);
  o.subspace = SubspaceSelection::local;
  EXPECT_NEAR(tomography_test(prod, o).report.statistic, 0.0, 1e-9);
}

TEST(Tomography, SampledSinglet) {
  TomographyOptions o;
  o.shots_per_setting = 1000;
  o.seed = 12;
  const TomographyResult r = tomography_test(sources::werner(1.0), o);
  EXPECT_GT(r.report.statistic, 0.9);
  EXPECT_EQ(r.report.verdict, Verdict::entangled);
  EXPECT_EQ(r.report.diagnostics.at("witness_pass"), 1.0);
  EXPECT_GT(r.report.se, 0.0);
}

TEST(Tomography, Errors) {
  TomographyOptions o;
  o.shots_per_setting = 50;
  EXPECT_THROW(tomography_test(sources::werner(1.0), o), Error);
  TomographyOptions q;
  q.exact = true;
  try {
    tomography_test(sources::dual_rail(DualRailVariant::entangled, 0.1, 0.0), q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("needs a subspace selection"), std::string::npos);
  }
}

TEST(SingleRun, SerialMatchesParallel) {
  const RunSequence seq = sources::singlet_fraction().sample_runs(2000, 5);
  const std::vector<CMatrix> povm = product_povm({(pauli::I() + pauli::Z()) / 2.0, (pauli::I() - pauli::Z()) / 2.0},
                                                 {(pauli::I() + pauli::X()) / 2.0, (pauli::I() - pauli::X()) / 2.0});
  RunPlan plan;
  plan.povm = [&](int) -> const std::vector<CMatrix>& { return povm; };
  EXPECT_EQ(simulate_runs(seq, plan, 6, Exec::serial), simulate_runs(seq, plan, 6, Exec::parallel));
}
