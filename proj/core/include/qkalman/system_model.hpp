#pragma once

#include "qkalman/matrix_core.hpp"

namespace qk {

// Linear open system in doubled-up (annihilation-creation) coordinates.
// State a-doubled = (a_1..a_n, a_1*..a_n*), inputs/outputs likewise with m
// channels.  The generator matrices follow from the Hamiltonian blocks and
// coupling blocks:
//   A = -i J_n Omega - 1/2 C^flat C,   B = -C^flat,   D = I_{2m},
// with Omega = Delta(Omega_minus, Omega_plus) Hermitian and
// C = Delta(C_minus, C_plus).
struct QLSystem {
  Eigen::Index n = 0;  // modes
  Eigen::Index m = 0;  // input/output channels
  DoubledUpMatrix Omega;  // 2n x 2n Hermitian doubled-up
  ComplexMatrix Cminus;   // m x n
  ComplexMatrix Cplus;    // m x n
  ComplexMatrix A;        // 2n x 2n
  ComplexMatrix B;        // 2n x 2m
  ComplexMatrix C;        // 2m x 2n
  ComplexMatrix coupling() const { return DoubledUpMatrix(Cminus, Cplus).full(); }
};

// Passive special case: no a*-a* Hamiltonian terms and no a* couplings, so
// the annihilation sector closes on itself:
//   A = -i Omega_minus - 1/2 C_minus^dag C_minus,  B = -C_minus^dag,
//   C = C_minus,  D = I_m.
struct PassiveQLSystem {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  ComplexMatrix Omega_minus;  // n x n Hermitian
  ComplexMatrix Cminus;       // m x n
  ComplexMatrix A;            // n x n
  ComplexMatrix B;            // n x m
  ComplexMatrix C;            // m x n
};

// Real quadrature picture, state x = (q_1..q_n, p_1..p_n):
//   A = Js_n H - 1/2 C^sharp C,  B = -C^sharp,  D = I_{2m},
// with H real symmetric (H = V Omega V^dag for the complex system).
struct RealQLSystem {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  RealMatrix H;  // 2n x 2n symmetric
  RealMatrix A;  // 2n x 2n
  RealMatrix B;  // 2n x 2m
  RealMatrix C;  // 2m x 2n
};

// Residuals of the physical-realizability identities; ok means every
// residual is within tol.zero_tol.
struct RealizabilityReport {
  bool ok = false;
  double dynamics_residual = 0.0;  // ||A + A^adj + B B^adj||_max
  double coupling_residual = 0.0;  // ||B + C^adj||_max
};

// Builds the general system from Hamiltonian and coupling blocks.
// Omega_minus must be Hermitian and Omega_plus symmetric; deviations up to
// 1e-6 (max-norm) are symmetrized away, larger ones raise ValidationError.
// symmetrized (optional out) reports whether any adjustment happened.
QLSystem build_general(const ComplexMatrix& omega_minus, const ComplexMatrix& omega_plus,
                       const ComplexMatrix& cminus, const ComplexMatrix& cplus,
                       bool* symmetrized = nullptr);

PassiveQLSystem build_passive(const ComplexMatrix& omega_minus, const ComplexMatrix& cminus,
                              bool* symmetrized = nullptr);

// Views a passive system as a general one (Omega_plus = 0, C_plus = 0).
QLSystem embed_passive(const PassiveQLSystem& sys);

// Builds the real system directly from quadrature data (H, C).
RealQLSystem build_real(const RealMatrix& h, const RealMatrix& c, bool* symmetrized = nullptr);

// Conjugates the general system by V: A_real = V A V^dag and so on.  The
// results are real whenever the system is doubled-up; residual imaginary
// parts above tol raise StructureError before truncation.
RealQLSystem to_real(const QLSystem& sys, double tol = 1e-9);

// Inverse direction: recovers the doubled-up blocks from a real system and
// rebuilds the complex model, checking that the real data is consistent
// with a doubled-up (and physically realizable) origin.
QLSystem to_complex(const RealQLSystem& sys, double tol = 1e-9);

// Physical-realizability checks for each representation.
RealizabilityReport check_realizability(const QLSystem& sys, double tol = 1e-9);
RealizabilityReport check_realizability(const PassiveQLSystem& sys, double tol = 1e-9);
RealizabilityReport check_realizability(const RealQLSystem& sys, double tol = 1e-9);

// Input-output transfer function Xi(s) = D + C (sI - A)^{-1} B evaluated by
// linear solve.  Throws PoleProximityError when s lies within tol.eig_tol of
// an eigenvalue of A.
ComplexMatrix transfer_function(const ComplexMatrix& a, const ComplexMatrix& b,
                                const ComplexMatrix& c, const ComplexMatrix& d,
                                Complex s, double eig_tol = 1e-8);
ComplexMatrix transfer_function(const QLSystem& sys, Complex s, double eig_tol = 1e-8);
ComplexMatrix transfer_function(const PassiveQLSystem& sys, Complex s, double eig_tol = 1e-8);
ComplexMatrix transfer_function(const RealQLSystem& sys, Complex s, double eig_tol = 1e-8);

}  // namespace qk
