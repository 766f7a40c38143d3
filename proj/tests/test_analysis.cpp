#include "qkalman/analysis.hpp"

#include <gtest/gtest.h>

#include "qkalman/random_systems.hpp"
#include "support.hpp"

namespace qk {
namespace {

QLSystem coupled_pair() {
  ComplexMatrix w(2, 2);
  w << 0, 1,
       1, 0;
  ComplexMatrix cm(1, 2);
  cm << 1, 0;
  return build_general(w, w, cm, ComplexMatrix::Zero(1, 2));
}

PassiveQLSystem symmetric_pair() {
  ComplexMatrix cm(1, 2);
  cm << 1, 1;
  return build_passive(ComplexMatrix::Identity(2, 2), cm);
}

TEST(Classification, CoupledPairHasOneProtectedVariable) {
  const KalmanResult r = decompose(coupled_pair());
  const ModeClassification cls = classify_modes(r);
  EXPECT_TRUE(cls.df_modes.empty());
  ASSERT_EQ(cls.qnd_variables.size(), 1u);
  EXPECT_EQ(cls.qnd_variables[0], "p_h[1]");
  ASSERT_EQ(cls.conjugate_pairs.size(), 1u);
  EXPECT_EQ(cls.conjugate_pairs[0].first, "q_h[1]");
  EXPECT_EQ(cls.qmfs_dim, 1);
  EXPECT_TRUE(cls.qnd_structure_ok);
  EXPECT_LT(cls.qnd_dynamics_residual, 1e-12);
  EXPECT_LT(cls.qnd_input_residual, 1e-12);
}

TEST(Classification, SymmetricPairHasDecoherenceFreeQuadratures) {
  const PassiveDecomposition pd = decompose_passive(symmetric_pair());
  const ModeClassification cls = classify_modes(pd.doubled);
  ASSERT_EQ(cls.df_modes.size(), 2u);
  EXPECT_EQ(cls.df_modes[0], "q_df[1] (DF)");
  EXPECT_EQ(cls.df_modes[1], "p_df[1] (DF)");
  EXPECT_TRUE(cls.qnd_variables.empty());
  EXPECT_EQ(cls.qmfs_dim, 0);
}

TEST(BackActionEvasion, CoupledPairEvadesInBothDirections) {
  const KalmanResult r = decompose(coupled_pair());
  const BAEReport p2q = bae_check(r, BAEDirection::kPinToQout);
  const BAEReport q2p = bae_check(r, BAEDirection::kQinToPout);
  EXPECT_TRUE(p2q.verdict);
  EXPECT_TRUE(q2p.verdict);
  EXPECT_LT(p2q.markov_residual, 1e-12);
  EXPECT_LT(p2q.transfer_residual, 1e-10);
  EXPECT_LT(q2p.markov_residual, 1e-12);
}

TEST(BackActionEvasion, DetunedSingleModeDoesNot) {
  // A single damped mode with detuning rotates q into p, so neither
  // quadrature transfer vanishes.
  const PassiveQLSystem sys =
      build_passive(ComplexMatrix::Identity(1, 1), ComplexMatrix::Identity(1, 1));
  const KalmanResult r = decompose(embed_passive(sys));
  ASSERT_EQ(r.n1, 1);
  EXPECT_FALSE(bae_check(r, BAEDirection::kPinToQout).verdict);
  EXPECT_FALSE(bae_check(r, BAEDirection::kQinToPout).verdict);
  EXPECT_GT(bae_check(r, BAEDirection::kPinToQout).markov_residual, 1e-3);
}

TEST(BackActionEvasion, TriviallyTrueWithoutCoSubsystem) {
  // Fully decoherence-free system: n1 = 0, nothing reaches the outputs.
  const PassiveQLSystem sys = build_passive(ComplexMatrix::Identity(2, 2),
                                            ComplexMatrix::Zero(1, 2));
  const KalmanResult r = decompose(embed_passive(sys));
  EXPECT_EQ(r.n1, 0);
  EXPECT_TRUE(bae_check(r, BAEDirection::kPinToQout).verdict);
  EXPECT_TRUE(bae_check(r, BAEDirection::kQinToPout).verdict);
}

TEST(SplitSector, MarkovCouplingVanishes) {
  const KalmanResult r = decompose(coupled_pair());
  EXPECT_LT(h_markov_residual(r), 1e-12);

  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 5; ++trial) {
    const QLSystem planted = testing::plant_position_measurement(rng, 3, 1);
    const QLSystem rotated =
        testing::rotate_general(planted, testing::random_passive_bogoliubov(rng, 3));
    EXPECT_LT(h_markov_residual(decompose(rotated)), 1e-9);
  }
}

TEST(SpecialCases, CoupledPairTriggersBothFlags) {
  const QLSystem sys = coupled_pair();
  const KalmanResult r = decompose(sys);
  const SpecialCaseFlags flags = special_case_flags(sys, r);
  // The Hamiltonian maps the unobservable direction to zero, and the coupling
  // row avoids the controllable complement: both structural flags hold, and
  // their canonical consequences must follow.
  EXPECT_TRUE(flags.hamiltonian_preserves_unobservable);
  EXPECT_TRUE(flags.coupling_avoids_h_sector);
  EXPECT_TRUE(flags.consistent);
  EXPECT_LT(flags.bh_residual, 1e-12);
  EXPECT_LT(flags.ch_residual, 1e-12);
  EXPECT_TRUE(flags.report.empty());
}

TEST(SpecialCases, ConsistentOnRandomDraws) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    const QLSystem sys = testing::random_general(rng, 3, 1);
    const KalmanResult r = decompose(sys);
    const SpecialCaseFlags flags = special_case_flags(sys, r);
    EXPECT_TRUE(flags.consistent) << flags.report;
  }
}

}  // namespace
}  // namespace qk
