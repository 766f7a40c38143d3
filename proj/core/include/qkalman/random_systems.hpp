#pragma once

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "qkalman/system_model.hpp"

// Seeded generators for random physically realizable systems, used by the
// property tests and benchmarks.
namespace qk::testing {

inline RealMatrix random_real(std::mt19937_64& rng, Eigen::Index rows,
                              Eigen::Index cols) {
  std::normal_distribution<double> dist(0.0, 1.0);
  RealMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

inline ComplexMatrix random_complex(std::mt19937_64& rng, Eigen::Index rows,
                                    Eigen::Index cols) {
  const double s = 1.0 / std::sqrt(2.0);
  const RealMatrix re = random_real(rng, rows, cols);
  const RealMatrix im = random_real(rng, rows, cols);
  return s * (re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>());
}

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
  const ComplexMatrix x = random_complex(rng, n, n);
  return 0.5 * (x + x.adjoint());
}

inline ComplexMatrix random_symmetric(std::mt19937_64& rng, Eigen::Index n) {
  const ComplexMatrix x = random_complex(rng, n, n);
  return 0.5 * (x + x.transpose());
}

// Generic realizable system with unit-scale Hamiltonian and coupling.
inline QLSystem random_general(std::mt19937_64& rng, Eigen::Index n, Eigen::Index m) {
  return build_general(random_hermitian(rng, n), random_symmetric(rng, n),
                       random_complex(rng, m, n), random_complex(rng, m, n));
}

inline PassiveQLSystem random_passive(std::mt19937_64& rng, Eigen::Index n,
                                      Eigen::Index m) {
  return build_passive(random_hermitian(rng, n), random_complex(rng, m, n));
}

// Random Bogoliubov transformation as the flow of a random quadratic
// Hamiltonian; strength controls how far it sits from the identity.
inline ComplexMatrix random_bogoliubov(std::mt19937_64& rng, Eigen::Index n,
                                       double strength = 0.3) {
  const DoubledUpMatrix omega(random_hermitian(rng, n), random_symmetric(rng, n));
  const ComplexMatrix gen =
      Complex(0.0, -strength) * (j_diag(n) * omega.full());
  return gen.exp();
}

inline ComplexMatrix random_unitary(std::mt19937_64& rng, Eigen::Index n,
                                    double strength = 0.5) {
  const ComplexMatrix gen = Complex(0.0, -strength) * random_hermitian(rng, n);
  return gen.exp();
}

// Unitary member of the Bogoliubov group (a beam-splitter network, no
// squeezing).  These are the Bogoliubov transformations that also preserve
// Euclidean orthogonality, so every Kalman sector keeps its dimension when a
// system is conjugated by one; squeezing members do not have that property.
inline ComplexMatrix random_passive_bogoliubov(std::mt19937_64& rng, Eigen::Index n,
                                               double strength = 0.5) {
  const ComplexMatrix u = random_unitary(rng, n, strength);
  return DoubledUpMatrix(u, ComplexMatrix::Zero(n, n)).full();
}

// Conjugates the system by a Bogoliubov transformation: the Hamiltonian
// becomes T0^dag Omega T0 and the coupling C T0.  Physical realizability is
// always preserved; sector dimensions are guaranteed to survive only when t0
// is unitary as well (see random_passive_bogoliubov).
inline QLSystem rotate_general(const QLSystem& sys, const ComplexMatrix& t0) {
  const DoubledUpMatrix omega =
      doubled_up_from_full(ComplexMatrix(t0.adjoint() * sys.Omega.full() * t0), 1e-8);
  const DoubledUpMatrix c =
      doubled_up_from_full(ComplexMatrix(sys.coupling() * t0), 1e-8);
  return build_general(omega.U, omega.V, c.U, c.V);
}

inline PassiveQLSystem rotate_passive(const PassiveQLSystem& sys,
                                      const ComplexMatrix& u0) {
  return build_passive(ComplexMatrix(u0.adjoint() * sys.Omega_minus * u0),
                       ComplexMatrix(sys.Cminus * u0));
}

}  // namespace qk::testing
