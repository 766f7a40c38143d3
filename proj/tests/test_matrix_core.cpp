#include "qkalman/matrix_core.hpp"

#include <gtest/gtest.h>

#include "qkalman/random_systems.hpp"
#include "support.hpp"

namespace qk {
namespace {

using testing::diff;

constexpr Complex kI{0.0, 1.0};

TEST(BasisMatrices, JDiagEntries) {
  const ComplexMatrix j = j_diag(2);
  ASSERT_EQ(j.rows(), 4);
  EXPECT_EQ(j(0, 0), Complex(1.0));
  EXPECT_EQ(j(1, 1), Complex(1.0));
  EXPECT_EQ(j(2, 2), Complex(-1.0));
  EXPECT_EQ(j(3, 3), Complex(-1.0));
  EXPECT_NEAR(max_abs(ComplexMatrix(j * j - ComplexMatrix::Identity(4, 4))), 0.0, 0.0);
}

TEST(BasisMatrices, SymplecticFormEntries) {
  const RealMatrix js = j_sym_real(2);
  RealMatrix expected(4, 4);
  expected << 0, 0, 1, 0,
              0, 0, 0, 1,
             -1, 0, 0, 0,
              0, -1, 0, 0;
  EXPECT_EQ(diff(js, expected), 0.0);
  EXPECT_EQ(max_abs(ComplexMatrix(j_sym(2) - js.cast<Complex>())), 0.0);
}

TEST(BasisMatrices, VMatrixSingleMode) {
  const ComplexMatrix v = v_matrix(1);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(v(0, 0) - Complex(s)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(v(0, 1) - Complex(s)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(v(1, 0) + kI * s), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(v(1, 1) - kI * s), 0.0, 1e-15);
}

TEST(BasisMatrices, VMatrixIsUnitaryAndMapsForms) {
  const Eigen::Index n = 3;
  const ComplexMatrix v = v_matrix(n);
  EXPECT_LT(max_abs(ComplexMatrix(v * v.adjoint() - ComplexMatrix::Identity(2 * n, 2 * n))),
            1e-14);
  // V J V^dag = i Js: the doubled-up pairing goes over to the symplectic form.
  EXPECT_LT(max_abs(ComplexMatrix(v * j_diag(n) * v.adjoint() - kI * j_sym(n))), 1e-14);
}

TEST(Adjoints, FlatMatchesDefinition) {
  std::mt19937_64 rng(7);
  const ComplexMatrix x = testing::random_complex(rng, 4, 6);  // 2m x 2n with m=2, n=3
  const ComplexMatrix expected = j_diag(3) * x.adjoint() * j_diag(2);
  EXPECT_LT(diff(flat_adjoint(x), expected), 1e-15);
}

TEST(Adjoints, FlatIsAnAntihomomorphism) {
  std::mt19937_64 rng(8);
  const ComplexMatrix x = testing::random_complex(rng, 4, 6);
  const ComplexMatrix y = testing::random_complex(rng, 6, 2);
  EXPECT_LT(diff(flat_adjoint(ComplexMatrix(x * y)),
                 ComplexMatrix(flat_adjoint(y) * flat_adjoint(x))),
            1e-13);
}

TEST(Adjoints, SharpMatchesDefinition) {
  std::mt19937_64 rng(9);
  const RealMatrix x = testing::random_real(rng, 4, 6);
  const RealMatrix expected = -j_sym_real(3) * x.transpose() * j_sym_real(2);
  EXPECT_LT(diff(sharp_adjoint(x), expected), 1e-15);
}

TEST(DoubledUp, FullLayout) {
  ComplexMatrix u(1, 1), v(1, 1);
  u << Complex(1.0, 2.0);
  v << Complex(3.0, -1.0);
  const DoubledUpMatrix d(u, v);
  ComplexMatrix expected(2, 2);
  expected << Complex(1.0, 2.0), Complex(3.0, -1.0),
              Complex(3.0, 1.0), Complex(1.0, -2.0);
  EXPECT_EQ(diff(d.full(), expected), 0.0);
}

TEST(DoubledUp, BlockArithmeticMatchesFullArithmetic) {
  std::mt19937_64 rng(10);
  const DoubledUpMatrix a(testing::random_complex(rng, 2, 3),
                          testing::random_complex(rng, 2, 3));
  const DoubledUpMatrix b(testing::random_complex(rng, 3, 2),
                          testing::random_complex(rng, 3, 2));
  EXPECT_LT(diff((a * b).full(), ComplexMatrix(a.full() * b.full())), 1e-13);
  EXPECT_LT(diff(a.flat().full(), flat_adjoint(a.full())), 1e-15);
  const DoubledUpMatrix c(testing::random_complex(rng, 2, 3),
                          testing::random_complex(rng, 2, 3));
  EXPECT_LT(diff((a + c).full(), ComplexMatrix(a.full() + c.full())), 1e-15);
  EXPECT_LT(diff((a - c).full(), ComplexMatrix(a.full() - c.full())), 1e-15);
}

TEST(DoubledUp, FlatOnBlocksMatchesDeltaIdentity) {
  // Delta(U, V)^flat = Delta(U^dag, -V^T).
  std::mt19937_64 rng(11);
  const ComplexMatrix u = testing::random_complex(rng, 2, 3);
  const ComplexMatrix v = testing::random_complex(rng, 2, 3);
  const DoubledUpMatrix d = DoubledUpMatrix(u, v).flat();
  EXPECT_LT(diff(d.U, ComplexMatrix(u.adjoint())), 1e-15);
  EXPECT_LT(diff(d.V, ComplexMatrix(-v.transpose())), 1e-15);
}

TEST(DoubledUp, FromFullRoundTripAndRejection) {
  std::mt19937_64 rng(12);
  const DoubledUpMatrix d(testing::random_complex(rng, 3, 3),
                          testing::random_complex(rng, 3, 3));
  const DoubledUpMatrix back = doubled_up_from_full(d.full(), 1e-12);
  EXPECT_LT(diff(back.U, d.U), 1e-15);
  EXPECT_LT(diff(back.V, d.V), 1e-15);

  ComplexMatrix broken = d.full();
  broken(4, 1) += Complex(1e-3, 0.0);
  EXPECT_THROW(doubled_up_from_full(broken, 1e-8), StructureError);
}

TEST(Predicates, SqueezerIsBogoliubovScalingIsNot) {
  ComplexMatrix u(1, 1), v(1, 1);
  u << std::cosh(0.3);
  v << std::sinh(0.3);
  EXPECT_TRUE(is_bogoliubov(DoubledUpMatrix(u, v).full(), 1e-12));
  EXPECT_FALSE(is_bogoliubov(ComplexMatrix(2.0 * ComplexMatrix::Identity(2, 2)), 1e-12));
}

TEST(Predicates, BogoliubovGroupClosure) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix t1 = testing::random_bogoliubov(rng, 2);
    const ComplexMatrix t2 = testing::random_bogoliubov(rng, 2);
    EXPECT_TRUE(is_bogoliubov(t1, 1e-10));
    EXPECT_TRUE(is_bogoliubov(t2, 1e-10));
    EXPECT_TRUE(is_bogoliubov(ComplexMatrix(t1 * t2), 1e-10));
  }
}

TEST(Predicates, SymplecticScalingPairs) {
  RealMatrix s(2, 2);
  s << 2.0, 0.0,
       0.0, 0.5;
  EXPECT_TRUE(is_symplectic(s, 1e-12));
  RealMatrix bad(2, 2);
  bad << 2.0, 0.0,
         0.0, 2.0;
  EXPECT_FALSE(is_symplectic(bad, 1e-12));
}

TEST(Predicates, DoubledUpDetection) {
  std::mt19937_64 rng(14);
  const DoubledUpMatrix d(testing::random_complex(rng, 2, 2),
                          testing::random_complex(rng, 2, 2));
  EXPECT_TRUE(is_doubled_up(d.full(), 1e-12));
  EXPECT_FALSE(is_doubled_up(testing::random_complex(rng, 4, 4), 1e-6));
}

TEST(PhaseFix, AnchorsLargestEntryRealPositive) {
  ComplexVector z(2);
  z << Complex(0.0), kI;
  const ComplexVector fixed = phase_fix(z);
  EXPECT_LT(std::abs(fixed(0)), 1e-15);
  EXPECT_LT(std::abs(fixed(1) - Complex(1.0)), 1e-15);
}

TEST(PhaseFix, HighestIndexBreaksMagnitudeTies) {
  const double s = 1.0 / std::sqrt(2.0);
  ComplexVector z(2);
  z << Complex(s), kI * s;  // entries tie in magnitude; index 1 anchors
  const ComplexVector fixed = phase_fix(z);
  EXPECT_LT(std::abs(fixed(1) - Complex(s)), 1e-15);
  EXPECT_LT(std::abs(fixed(0) + kI * s), 1e-15);
}

TEST(PhaseFix, PreservesNormAndRejectsZero) {
  std::mt19937_64 rng(15);
  const ComplexVector z = testing::random_complex(rng, 5, 1);
  EXPECT_NEAR(phase_fix(z).norm(), z.norm(), 1e-14);
  EXPECT_THROW(phase_fix(ComplexVector::Zero(3)), ValidationError);
}

TEST(MaxAbs, EmptyMatrixIsZero) {
  EXPECT_EQ(max_abs(ComplexMatrix(0, 3)), 0.0);
  EXPECT_EQ(max_abs(RealMatrix(2, 0)), 0.0);
}

}  // namespace
}  // namespace qk
