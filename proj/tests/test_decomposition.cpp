#include "qkalman/decomposition.hpp"

#include <gtest/gtest.h>

#include "qkalman/random_systems.hpp"
#include "support.hpp"

namespace qk {
namespace {

using testing::diff;
using testing::grouped_j;
using testing::grouped_j_sym;
using testing::ray_diff;

constexpr Complex kI{0.0, 1.0};

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

// Greedy nearest-neighbour matching of eigenvalue multisets; returns the
// worst pairing distance.  Sorting complex lists is discontinuous when real
// parts nearly tie, so matching is the only robust comparison.
double spectrum_mismatch(const ComplexMatrix& a, const ComplexMatrix& b) {
  Eigen::ComplexEigenSolver<ComplexMatrix> ea(a, false), eb(b, false);
  std::vector<Complex> rest(eb.eigenvalues().data(),
                            eb.eigenvalues().data() + eb.eigenvalues().size());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < ea.eigenvalues().size(); ++i) {
    const Complex lambda = ea.eigenvalues()(i);
    size_t best = 0;
    for (size_t j = 1; j < rest.size(); ++j) {
      if (std::abs(lambda - rest[j]) < std::abs(lambda - rest[best])) best = j;
    }
    worst = std::max(worst, std::abs(lambda - rest[best]));
    rest.erase(rest.begin() + best);
  }
  return worst;
}

TEST(PiMatrix, SingleSwapLayout) {
  RealMatrix expected(4, 4);
  expected << 1, 0, 0, 0,
              0, 0, 0, -1,
              0, 0, 1, 0,
              0, 1, 0, 0;
  EXPECT_EQ(diff(pi_matrix(1, 1), expected), 0.0);
  EXPECT_EQ(diff(pi_matrix(0, 0), RealMatrix::Zero(0, 0)), 0.0);
  // Pure-X and pure-Y sectors reduce to the identity and the quadrature swap.
  EXPECT_EQ(diff(pi_matrix(2, 0), RealMatrix::Identity(4, 4)), 0.0);
  RealMatrix swap(2, 2);
  swap << 0, -1,
          1, 0;
  EXPECT_EQ(diff(pi_matrix(0, 1), swap), 0.0);
}

TEST(PairedBasis, RecoversPlantedConjugatePair) {
  // Subspace spanned by [z; 0] and [0; z.conj()] for a single mode vector z:
  // J-invariant and conjugation-symmetric, so the sweep must emit exactly z
  // (up to the phase convention).
  ComplexVector z(2);
  z << Complex(1.0) / std::sqrt(2.0), kI / std::sqrt(2.0);
  SubspaceBasis s;
  s.ambient_dim = 4;
  s.basis = ComplexMatrix::Zero(4, 2);
  s.basis.col(0).head(2) = z;
  s.basis.col(1).tail(2) = z.conjugate();
  const ComplexMatrix out = build_paired_basis(s, StructureTolerance{});
  ASSERT_EQ(out.cols(), 1);
  EXPECT_LT(ray_diff(ComplexVector(out.col(0)), z), 1e-12);
  // The emitted vector carries the fixed phase convention.
  EXPECT_LT(diff(out, ComplexMatrix(phase_fix(ComplexVector(out.col(0))))), 1e-14);
}

TEST(HBasis, CoupledPairLandsInTheYFamily) {
  const QLSystem sys = coupled_pair();
  const KalmanSubspaces ks = kalman_subspaces(sys, StructureTolerance{});
  const HBasis h = build_h_basis(ks.r_cobar, StructureTolerance{});
  EXPECT_EQ(h.X.cols(), 0);
  ASSERT_EQ(h.Y.cols(), 1);
  ComplexVector e2(2);
  e2 << 0, 1;
  EXPECT_LT(ray_diff(ComplexVector(h.Y.col(0)), e2), 1e-12);
}

TEST(Transform, AssembledFromCoupledPairBlocks) {
  const QLSystem sys = coupled_pair();
  const KalmanResult r = decompose(sys);
  ComplexMatrix expected(4, 4);
  expected << 0, 0, 1, 0,
              1, 0, 0, 0,
              0, 0, 0, 1,
              0, 1, 0, 0;
  EXPECT_LT(diff(r.T, expected), 1e-12);
  // T is unitary and turns the metric block diagonal per group; Ttilde and
  // Stilde are the honest Bogoliubov / symplectic group members.
  EXPECT_LT(diff(ComplexMatrix(r.T.adjoint() * r.T), ComplexMatrix(ComplexMatrix::Identity(4, 4))),
            1e-12);
  EXPECT_LT(diff(ComplexMatrix(r.T.adjoint() * j_diag(2) * r.T), grouped_j(1, 1, 0)), 1e-12);
  EXPECT_TRUE(is_bogoliubov(r.Ttilde, 1e-10));
  EXPECT_TRUE(is_symplectic(r.Stilde, 1e-10));
  EXPECT_LT(diff(RealMatrix(r.S.transpose() * r.S), RealMatrix(RealMatrix::Identity(4, 4))),
            1e-12);
  EXPECT_LT(diff(RealMatrix(r.S.transpose() * j_sym_real(2) * r.S), grouped_j_sym(1, 1, 0)),
            1e-12);
}

TEST(Decomposition, CoupledPairCanonicalBlocks) {
  const KalmanResult r = decompose(coupled_pair());
  EXPECT_EQ(r.n1, 1);
  EXPECT_EQ(r.n2, 0);
  EXPECT_EQ(r.n3, 1);
  EXPECT_EQ(r.na, 0);
  EXPECT_EQ(r.nb, 1);

  ComplexMatrix a12(2, 2);
  a12 << -kI, -kI,
          kI, kI;
  EXPECT_LT(diff(r.cform.A_12, a12), 1e-12);
  EXPECT_LT(diff(r.cform.A_21, a12), 1e-12);
  EXPECT_LT(diff(r.cform.A_co, ComplexMatrix(-0.5 * ComplexMatrix::Identity(2, 2))), 1e-12);
  EXPECT_LT(diff(r.cform.B_co, ComplexMatrix(-ComplexMatrix::Identity(2, 2))), 1e-12);
  EXPECT_LT(diff(r.cform.C_co, ComplexMatrix(ComplexMatrix::Identity(2, 2))), 1e-12);
  EXPECT_LT(max_abs(r.cform.B_h), 1e-12);
  EXPECT_LT(max_abs(r.cform.C_h), 1e-12);
  // The split sector is Hamiltonian-only: A_h has no damping part.
  EXPECT_LT(max_abs(r.cform.A_h), 1e-12);
}

TEST(Decomposition, CoupledPairRealForm) {
  const KalmanResult r = decompose(coupled_pair());
  RealMatrix abar(4, 4), bbar(4, 2), cbar(2, 4);
  abar << 0, 0, 2, 0,
          0, 0, 0, 0,
          0, 0, -0.5, 0,
          0, -2, 0, -0.5;
  bbar << 0, 0,
          0, 0,
          -1, 0,
          0, -1;
  cbar << 0, 0, 1, 0,
          0, 0, 0, 1;
  EXPECT_LT(diff(r.rform.Abar, abar), 1e-12);
  EXPECT_LT(diff(r.rform.Bbar, bbar), 1e-12);
  EXPECT_LT(diff(r.rform.Cbar, cbar), 1e-12);

  // x_bar = S^T x maps (q1, q2, p1, p2) to (-p2, q2, q1, p1).
  RealMatrix st(4, 4);
  st << 0, 0, 0, -1,
        0, 1, 0, 0,
        1, 0, 0, 0,
        0, 0, 1, 0;
  EXPECT_LT(diff(RealMatrix(r.S.transpose()), st), 1e-12);

  const std::vector<std::string> expected_labels = {"q_h[1]", "p_h[1] (QND)",
                                                    "q_co[1]", "p_co[1]"};
  EXPECT_EQ(r.mode_labels, expected_labels);
}

TEST(Decomposition, RearrangedFormIsUpperBlockTriangular) {
  const KalmanResult r = decompose(coupled_pair());
  // Ordering (q_h, x_co, x_df, p_h): everything below the diagonal blocks
  // must vanish.
  const Eigen::Index n3 = r.n3, n1 = r.n1, n2 = r.n2;
  const Eigen::Index dim = 2 * (n1 + n2 + n3);
  ASSERT_EQ(r.rform.A_re.rows(), dim);
  double below = 0.0;
  const Eigen::Index cuts[] = {n3, n3 + 2 * n1, n3 + 2 * n1 + 2 * n2, dim};
  Eigen::Index row0 = 0;
  for (int blk = 0; blk < 4; ++blk) {
    const Eigen::Index row1 = cuts[blk];
    for (Eigen::Index i = row0; i < row1; ++i) {
      for (Eigen::Index j = 0; j < row0; ++j) {
        below = std::max(below, std::abs(r.rform.A_re(i, j)));
      }
    }
    row0 = row1;
  }
  EXPECT_LT(below, 1e-12);
}

TEST(Decomposition, SymmetricPairMatchesPassivePath) {
  const PassiveDecomposition pd = decompose_passive(symmetric_pair());
  EXPECT_EQ(pd.n1, 1);
  EXPECT_EQ(pd.n2, 1);

  const double s2 = std::sqrt(2.0);
  ComplexVector u1(2), u2(2);
  u1 << 1 / s2, 1 / s2;
  u2 << -1 / s2, 1 / s2;
  EXPECT_LT(ray_diff(ComplexVector(pd.U1.col(0)), u1), 1e-12);
  EXPECT_LT(ray_diff(ComplexVector(pd.U2.col(0)), u2), 1e-12);

  ComplexMatrix abar(2, 2);
  abar << Complex(-1.0, -1.0), 0,
          0, Complex(0.0, -1.0);
  EXPECT_LT(diff(pd.Abar, abar), 1e-12);
  ComplexMatrix bbar(2, 1);
  bbar << -s2, 0;
  EXPECT_LT(diff(pd.Bbar, bbar), 1e-12);
  ComplexMatrix cbar(1, 2);
  cbar << s2, 0;
  EXPECT_LT(diff(pd.Cbar, cbar), 1e-12);

  ASSERT_EQ(pd.df_eigenvalues.size(), 1);
  EXPECT_LT(std::abs(pd.df_eigenvalues(0) - Complex(0.0, -1.0)), 1e-12);

  // The doubled-up rerun agrees on the dimension split.
  EXPECT_EQ(pd.doubled.n1, 1);
  EXPECT_EQ(pd.doubled.n2, 1);
  EXPECT_EQ(pd.doubled.n3, 0);
  // Decoherence-free dynamics is lossless: A_df + A_df^flat = 0.
  const ComplexMatrix adf = pd.doubled.cform.A_df;
  EXPECT_LT(max_abs(ComplexMatrix(adf + flat_adjoint(adf))), 1e-12);
}

TEST(Decomposition, RejectsNonRealizableInput) {
  QLSystem sys = coupled_pair();
  sys.A(0, 0) += Complex(1e-3, 0.0);
  EXPECT_THROW(decompose(sys), ValidationError);
}

TEST(Decomposition, PlantedDecoupledModesKeepDimensionsUnderRotation) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const QLSystem planted = testing::plant_decoupled_modes(rng, 3, 1, 1);
    const QLSystem rotated =
        testing::rotate_general(planted, testing::random_passive_bogoliubov(rng, 3));
    const KalmanResult r = decompose(rotated);
    EXPECT_EQ(r.n1, 2);
    EXPECT_EQ(r.n2, 1);
    EXPECT_EQ(r.n3, 0);
  }
}

TEST(Decomposition, PlantedPositionMeasurementKeepsDimensionsUnderRotation) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    const QLSystem planted = testing::plant_position_measurement(rng, 3, 1);
    const QLSystem rotated =
        testing::rotate_general(planted, testing::random_passive_bogoliubov(rng, 3));
    const KalmanResult r = decompose(rotated);
    EXPECT_EQ(r.n1, 1);
    EXPECT_EQ(r.n2, 1);
    EXPECT_EQ(r.n3, 1);
  }
}

TEST(Decomposition, RandomSystemsSatisfyGroupAndSpectrumInvariants) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 3);
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % 2);
    const QLSystem sys = testing::random_general(rng, n, m);
    const KalmanResult r = decompose(sys);
    EXPECT_TRUE(is_bogoliubov(r.Ttilde, 1e-10));
    EXPECT_TRUE(is_symplectic(r.Stilde, 1e-10));
    EXPECT_LT(diff(ComplexMatrix(r.T.adjoint() * j_diag(n) * r.T),
                   grouped_j(r.n3, r.n1, r.n2)),
              1e-10);
    EXPECT_LT(diff(RealMatrix(r.S.transpose() * j_sym_real(n) * r.S),
                   grouped_j_sym(r.n3, r.n1, r.n2)),
              1e-10);
    EXPECT_LT(spectrum_mismatch(sys.A, r.cform.Abar), 1e-8);
    // Conjugating back recovers the original dynamics.
    EXPECT_LT(diff(ComplexMatrix(r.T * r.cform.Abar * r.T.inverse()), sys.A), 1e-9);
  }
}

TEST(Decomposition, PassiveDfsMatchesEigenvectorCharacterization) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 5; ++trial) {
    const PassiveQLSystem planted = testing::plant_passive_df(rng, 3, 1, 1);
    const PassiveQLSystem rotated =
        testing::rotate_passive(planted, testing::random_unitary(rng, 3));
    const PassiveDecomposition pd = decompose_passive(rotated);
    EXPECT_EQ(pd.n1, 2);
    EXPECT_EQ(pd.n2, 1);
    // Every reported decoherence-free eigenvalue sits on the imaginary axis.
    for (Eigen::Index i = 0; i < pd.df_eigenvalues.size(); ++i) {
      EXPECT_LT(std::abs(pd.df_eigenvalues(i).real()), 1e-8);
    }
  }
}

}  // namespace
}  // namespace qk
