#pragma once

#include "qkalman/system_model.hpp"

namespace qk {

// Orthonormal basis of a subspace of C^{ambient_dim}; basis has one column
// per dimension (possibly zero columns), ordered by the singular values of
// the matrix the subspace was extracted from.
struct SubspaceBasis {
  Eigen::Index ambient_dim = 0;
  ComplexMatrix basis;  // ambient_dim x dim, orthonormal columns

  Eigen::Index dim() const { return basis.cols(); }
};

// Which stacked observability matrix to form for a general system:
//   kGenerator: rows C A^k            (plain Kalman observability)
//   kHamiltonianOnly: rows C (J Omega)^k  (damping-free variant; same
//     kernel as the generator version for realizable systems)
enum class ObservabilityKind { kGenerator, kHamiltonianOnly };

// Stacked Krylov matrix [C; C M; ...; C M^{order-1}] with every block row
// rescaled by its own max-norm.  Rescaling leaves all kernels unchanged and
// keeps the singular-value spread manageable when M has large powers.
ComplexMatrix stacked_krylov(const ComplexMatrix& m, const ComplexMatrix& c,
                             Eigen::Index order);

// Controllability matrix [B, A B, ..., A^{order-1} B] with per-block
// max-norm rescaling (the transposed analogue of stacked_krylov).
ComplexMatrix controllability_matrix(const ComplexMatrix& a, const ComplexMatrix& b,
                                     Eigen::Index order);

ComplexMatrix observability_matrix(const QLSystem& sys, ObservabilityKind kind);

// SVD-based subspace extraction.  Rank = number of singular values above
// rank_tol relative to the largest one.
SubspaceBasis kernel(const ComplexMatrix& m, const StructureTolerance& tol);
SubspaceBasis image(const ComplexMatrix& m, const StructureTolerance& tol);

// Orthogonal complement of a subspace within its ambient space.
SubspaceBasis complement(const SubspaceBasis& s);

// Intersection via principal angles: SVD of S1^dag S2, keep directions with
// cosine >= 1 - zero_tol, re-orthonormalize.
SubspaceBasis intersect(const SubspaceBasis& s1, const SubspaceBasis& s2,
                        const StructureTolerance& tol);

// True when the two spaces have equal dimension and all principal angles
// have cosine >= 1 - angle_tol.
bool same_subspace(const SubspaceBasis& s1, const SubspaceBasis& s2, double angle_tol);

// Largest principal-angle sine between span(s1) and span(s2) (0 when equal);
// infinity when dimensions differ.
double subspace_distance(const SubspaceBasis& s1, const SubspaceBasis& s2);

// The four Kalman subspaces of the doubled-up state space, computed from
// the damping-free observability matrix O_s:
//   R_co      = Ker(O_s J)^perp  intersect  Ker(O_s)^perp
//   R_cobar   = Ker(O_s J)^perp  intersect  Ker(O_s)
//   R_cbar_o  = Ker(O_s J)      intersect  Ker(O_s)^perp
//   R_cbar_obar = Ker(O_s J)    intersect  Ker(O_s)
// (controllable = orthogonal complement of Ker(O_s J), observable =
// orthogonal complement of Ker(O_s)).
struct KalmanSubspaces {
  SubspaceBasis r_co;         // controllable and observable, dim 2 n1
  SubspaceBasis r_cobar;      // controllable, unobservable, dim n3
  SubspaceBasis r_cbar_o;     // uncontrollable, observable, dim n3
  SubspaceBasis r_cbar_obar;  // uncontrollable and unobservable, dim 2 n2
  Eigen::Index n1 = 0;
  Eigen::Index n2 = 0;
  Eigen::Index n3 = 0;
};

// Computes the four subspaces and verifies their structural identities:
// pairwise orthogonality, completeness 2(n1 + n2 + n3) = 2n, and the
// J-images J R_cobar = R_cbar_o, J R_co = R_co, J R_cbar_obar = R_cbar_obar.
KalmanSubspaces kalman_subspaces(const QLSystem& sys, const StructureTolerance& tol);

// Passive counterpart on the annihilation sector only: controllable space
// Im(C_G), uncontrollable space Ker(C_G^dag); for realizable passive systems
// the latter equals the unobservable space Ker(O_G), which is verified.
struct PassiveSubspaces {
  SubspaceBasis controllable;    // Im(C_G)
  SubspaceBasis uncontrollable;  // Ker(C_G^dag) = Ker(O_G)
};

PassiveSubspaces passive_subspaces(const PassiveQLSystem& sys,
                                   const StructureTolerance& tol);

}  // namespace qk
