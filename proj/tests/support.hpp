#pragma once

#include <random>

#include "qkalman/decomposition.hpp"
#include "qkalman/random_systems.hpp"

// Shared helpers for the test binaries: max-norm comparisons, ray (phase-free)
// comparisons, and generators for systems with planted decoherence-free or
// split-sector structure.  Unstructured random draws have n2 = n3 = 0 almost
// surely, so the property suites need plants to exercise those sweeps.
namespace qk::testing {

inline double diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  return max_abs(ComplexMatrix(a - b));
}

inline double diff(const RealMatrix& a, const RealMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  return max_abs(RealMatrix(a - b));
}

// Distance between the rays spanned by a and b: b is phase-aligned onto a
// before the entrywise comparison, so a global unit phase is free.
inline double ray_diff(const ComplexVector& a, const ComplexVector& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  Eigen::Index anchor = 0;
  a.cwiseAbs().maxCoeff(&anchor);
  if (std::abs(a(anchor)) == 0.0 || std::abs(b(anchor)) == 0.0) {
    return max_abs(ComplexVector(a - b));
  }
  const Complex phase = a(anchor) / b(anchor);
  if (std::abs(std::abs(phase) - 1.0) > 1e-6) {
    return std::numeric_limits<double>::infinity();
  }
  return max_abs(ComplexVector(a - phase * b));
}

// The metric T^dag J T of a mode transform that orders the groups as
// (split, co, df): one J block per group.  T itself is unitary but not
// doubled-up, so this block-diagonal form replaces the plain Bogoliubov
// identity; Ttilde is the member of the Bogoliubov group.
inline ComplexMatrix grouped_j(Eigen::Index n3, Eigen::Index n1, Eigen::Index n2) {
  const Eigen::Index n = n1 + n2 + n3;
  ComplexMatrix out = ComplexMatrix::Zero(2 * n, 2 * n);
  Eigen::Index at = 0;
  for (Eigen::Index k : {n3, n1, n2}) {
    out.block(at, at, 2 * k, 2 * k) = j_diag(k);
    at += 2 * k;
  }
  return out;
}

// Real counterpart: S^T J_sym S for the quadrature transform S, again one
// symplectic-form block per group.
inline RealMatrix grouped_j_sym(Eigen::Index n3, Eigen::Index n1, Eigen::Index n2) {
  const Eigen::Index n = n1 + n2 + n3;
  RealMatrix out = RealMatrix::Zero(2 * n, 2 * n);
  Eigen::Index at = 0;
  for (Eigen::Index k : {n3, n1, n2}) {
    out.block(at, at, 2 * k, 2 * k) = j_sym_real(k);
    at += 2 * k;
  }
  return out;
}

// System whose last n_df modes carry their own (generally active) Hamiltonian
// block and never appear in the coupling: those modes are uncontrollable and
// unobservable by construction, so the decomposition must report n2 = n_df
// with n3 = 0 and everything else controllable-observable.
inline QLSystem plant_decoupled_modes(std::mt19937_64& rng, Eigen::Index n,
                                      Eigen::Index n_df, Eigen::Index m) {
  const Eigen::Index na = n - n_df;
  ComplexMatrix wm = ComplexMatrix::Zero(n, n);
  ComplexMatrix wp = ComplexMatrix::Zero(n, n);
  wm.topLeftCorner(na, na) = random_hermitian(rng, na);
  wm.bottomRightCorner(n_df, n_df) = random_hermitian(rng, n_df);
  wp.topLeftCorner(na, na) = random_symmetric(rng, na);
  wp.bottomRightCorner(n_df, n_df) = random_symmetric(rng, n_df);
  ComplexMatrix cm = ComplexMatrix::Zero(m, n);
  ComplexMatrix cp = ComplexMatrix::Zero(m, n);
  cm.leftCols(na) = random_complex(rng, m, na);
  cp.leftCols(na) = random_complex(rng, m, na);
  return build_general(wm, wp, cm, cp);
}

// System with a position-only Hamiltonian (Omega_minus = Omega_plus = real
// symmetric G) measured through a real coupling row: the generator J Omega is
// then nilpotent of order two in the quadrature picture, which forces a
// nonempty controllable-unobservable sector.  Generic draws give
//   n3 = min(n - m, m),  n2 = max(n - 2m, 0),  n1 = n - n2 - n3.
inline QLSystem plant_position_measurement(std::mt19937_64& rng, Eigen::Index n,
                                           Eigen::Index m) {
  const RealMatrix gr = random_real(rng, n, n);
  const ComplexMatrix g = (0.5 * (gr + gr.transpose())).cast<Complex>();
  const ComplexMatrix cm = random_real(rng, m, n).cast<Complex>();
  return build_general(g, g, cm, ComplexMatrix::Zero(m, n));
}

// Passive system whose last n_df modes decouple from both the coupling and
// the rest of the Hamiltonian: a planted decoherence-free subspace.
inline PassiveQLSystem plant_passive_df(std::mt19937_64& rng, Eigen::Index n,
                                        Eigen::Index n_df, Eigen::Index m) {
  const Eigen::Index na = n - n_df;
  ComplexMatrix wm = ComplexMatrix::Zero(n, n);
  wm.topLeftCorner(na, na) = random_hermitian(rng, na);
  wm.bottomRightCorner(n_df, n_df) = random_hermitian(rng, n_df);
  ComplexMatrix cm = ComplexMatrix::Zero(m, n);
  cm.leftCols(na) = random_complex(rng, m, na);
  return build_passive(wm, cm);
}

}  // namespace qk::testing
