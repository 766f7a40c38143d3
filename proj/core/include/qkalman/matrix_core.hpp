#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace qk {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Raised when an input fails a precondition (bad shape, non-Hermitian data,
// violated realizability of user-supplied matrices, malformed spec fields).
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an internally computed object fails one of its structural
// identities at the working tolerance (lost orthonormality, nonzero block
// that the theory requires to vanish, ...).  This signals either numerically
// hostile input or a genuine bug, never a user error.
class StructureError : public std::runtime_error {
public:
  explicit StructureError(const std::string& what) : std::runtime_error(what) {}
};

// Raised by transfer-function evaluation when the requested frequency is too
// close to a pole; carries the offending eigenvalue.
class PoleProximityError : public ValidationError {
public:
  PoleProximityError(const std::string& what, Complex nearest)
      : ValidationError(what), nearest_pole(nearest) {}
  Complex nearest_pole;
};

// Tolerance bundle used throughout the pipeline.
//  rank_tol: relative singular-value cutoff for every rank decision
//  zero_tol: absolute max-norm threshold for "this matrix is zero"
//  eig_tol:  eigenvalue proximity threshold (imaginary-axis tests, poles)
struct StructureTolerance {
  double rank_tol = 1e-10;
  double zero_tol = 1e-9;
  double eig_tol = 1e-8;
};

// Largest entry magnitude; 0 for empty matrices.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

// J_k = diag(I_k, -I_k)  (signature matrix of the doubled-up pairing).
ComplexMatrix j_diag(Eigen::Index k);

// 2k x 2k real symplectic form [[0, I], [-I, 0]] in (q, p) ordering.
ComplexMatrix j_sym(Eigen::Index k);
RealMatrix j_sym_real(Eigen::Index k);

// Unitary change of basis between quadrature and annihilation-creation
// coordinates: V_k = (1/sqrt 2) [[I, I], [-iI, iI]], so x = V a-doubled.
ComplexMatrix v_matrix(Eigen::Index k);

// flat adjoint on 2m x 2n doubled-up-shaped blocks: X^flat = J_n X^dag J_m.
ComplexMatrix flat_adjoint(const ComplexMatrix& x);

// sharp adjoint on 2m x 2n quadrature-shaped blocks: X^sharp = -Js_n X^T Js_m
// for real X (general form uses the conjugate transpose).
RealMatrix sharp_adjoint(const RealMatrix& x);

// A 2k x 2r matrix stored by its two defining blocks:
//   full() = [[U, V], [V.conj(), U.conj()]].
// Sums, products and flat adjoints of doubled-up matrices are again
// doubled-up, and the arithmetic below stays in block form.
struct DoubledUpMatrix {
  Eigen::Index k = 0;  // row block size
  Eigen::Index r = 0;  // column block size
  ComplexMatrix U;     // k x r
  ComplexMatrix V;     // k x r

  DoubledUpMatrix() = default;
  DoubledUpMatrix(ComplexMatrix u, ComplexMatrix v);

  ComplexMatrix full() const;

  DoubledUpMatrix operator+(const DoubledUpMatrix& rhs) const;
  DoubledUpMatrix operator-(const DoubledUpMatrix& rhs) const;
  DoubledUpMatrix operator*(const DoubledUpMatrix& rhs) const;
  DoubledUpMatrix flat() const;

  static DoubledUpMatrix identity(Eigen::Index k);
};

// Reads the blocks back out of a full 2k x 2r matrix, verifying the
// doubled-up symmetry within tol (max-norm).  Throws StructureError.
DoubledUpMatrix doubled_up_from_full(const ComplexMatrix& full, double tol);

// Structural predicates (max-norm residual against tol.zero_tol).
bool is_doubled_up(const ComplexMatrix& x, double tol);
bool is_bogoliubov(const ComplexMatrix& t, double tol);   // doubled-up and T J T^dag = T^dag J T = J
bool is_symplectic(const RealMatrix& s, double tol);      // S Js S^T = S^T Js S = Js

// Multiplies z by the unit phase that makes its largest-magnitude entry real
// and positive.  Among entries whose magnitude ties with the maximum within a
// relative 1e-9 window the highest index anchors the phase; this keeps the
// convention stable when leading entries tie at machine precision.
ComplexVector phase_fix(const ComplexVector& z);

}  // namespace qk
