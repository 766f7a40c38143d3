#pragma once

#include <string>
#include <vector>

#include "qkalman/subspaces.hpp"

namespace qk {

// Mode bases extracted from the Kalman subspaces, all expressed in the
// annihilation sector (n-dimensional columns):
//   Z1: controllable-and-observable modes        (n1 columns)
//   Z2: uncontrollable-and-unobservable modes    (n2 columns)
//   X:  quadrature-split modes whose q-part is controllable   (na columns)
//   Y:  quadrature-split modes whose p-part is controllable   (nb columns)
// Z3 = [X Y] spans the controllable-unobservable sector (n3 = na + nb).
struct BlockBases {
  ComplexMatrix Z1;
  ComplexMatrix Z2;
  ComplexMatrix X;
  ComplexMatrix Y;
  ComplexMatrix Z3() const;
};

// Canonical form after conjugating by the Bogoliubov transformation T,
// block order (h, co, df) with sizes (2 n3, 2 n1, 2 n2):
//   Abar = [[A_h, A_12, A_13], [A_21, A_co, 0], [A_31, 0, A_df]]
//   Bbar = [[B_h], [B_co], [0]],   Cbar = [C_h, C_co, 0].
struct ComplexCanonicalForm {
  ComplexMatrix Abar, Bbar, Cbar;
  ComplexMatrix A_h, A_12, A_13, A_21, A_31, A_co, A_df;
  ComplexMatrix B_h, B_co;
  ComplexMatrix C_h, C_co;
};

// Real canonical form in the ordering (q_h, p_h, x_co, x_df) with sizes
// (n3, n3, 2 n1, 2 n2):
//   Abar = [[A_h11, A_h12, A_12, A_13],
//           [0,     A_h22, 0,    0   ],
//           [0,     A_21,  A_co, 0   ],
//           [0,     A_31,  0,    A_df]]
//   Bbar = [[B_h], [0], [B_co], [0]],   Cbar = [0, C_h, C_co, 0].
// The rearranged ordering (q_h, x_co, x_df, p_h) exposes the same matrices
// as upper block triangular.
struct RealCanonicalForm {
  RealMatrix Abar, Bbar, Cbar;
  RealMatrix A_h11, A_h12, A_h22, A_12, A_13, A_21, A_31, A_co, A_df;
  RealMatrix B_h, B_co;
  RealMatrix C_h, C_co;
  RealMatrix A_re, B_re, C_re;              // rearranged ordering
  std::vector<Eigen::Index> rearrangement;  // canonical index of each rearranged row
};

// Full decomposition output.
struct KalmanResult {
  Eigen::Index n = 0, m = 0;
  Eigen::Index n1 = 0, n2 = 0, n3 = 0;  // co / df / split mode counts
  Eigen::Index na = 0, nb = 0;          // split of n3 into X and Y columns
  KalmanSubspaces subspaces;
  BlockBases blocks;
  ComplexMatrix T;        // 2n x 2n Bogoliubov, columns ordered (h, co, df)
  ComplexMatrix Ttilde;   // 2n x 2n Bogoliubov with Delta(W, 0) shape
  RealMatrix S;           // 2n x 2n real orthogonal, x_bar = S^T x
  RealMatrix Stilde;      // 2n x 2n real orthogonal symplectic
  RealMatrix Pi;          // 2 n3 x 2 n3 quadrature swap used in the h sector
  ComplexCanonicalForm cform;
  RealCanonicalForm rform;
  std::vector<std::string> mode_labels;  // one per canonical real variable
  StructureTolerance tol;
};

// Passive decomposition: everything happens in the annihilation sector.
struct PassiveDecomposition {
  Eigen::Index n = 0, m = 0;
  Eigen::Index n1 = 0, n2 = 0;  // controllable / decoherence-free mode counts
  ComplexMatrix U1;             // n x n1, basis of Im(C_G), columns phase-fixed
  ComplexMatrix U2;             // n x n2, basis of the decoherence-free subspace
  ComplexMatrix Abar, Bbar, Cbar;  // canonical passive matrices, order (co, df)
  ComplexMatrix A_co, A_df, B_co, C_co;
  ComplexVector df_eigenvalues;  // spectrum of A_df (imaginary within eig_tol)
  KalmanResult doubled;          // same content in the doubled-up picture
};

// 2(na+nb) x 2(na+nb) permutation-with-signs that swaps the roles of q and
// p for the Y (nb) part of the split sector:
//   [[ I_na, 0,    0,    0    ],
//    [ 0,    0,    0,   -I_nb ],
//    [ 0,    0,    I_na, 0    ],
//    [ 0,    I_nb, 0,    0    ]].
RealMatrix pi_matrix(Eigen::Index na, Eigen::Index nb);

// Extracts one annihilation-sector mode per conjugate pair from a J-invariant,
// conjugation-symmetric subspace of even dimension 2d (the co and df cases).
// Returns the n x d matrix Z of phase-fixed mode vectors.
ComplexMatrix build_paired_basis(const SubspaceBasis& s, const StructureTolerance& tol,
                                 double classify_tol = 1e-7);

// Splits the controllable-unobservable sector into X and Y mode families.
// The sector is closed under the antilinear swap (u, v) -> (conj v, conj u),
// so it has an orthonormal basis of swap-fixed vectors [x; conj x].  A mode
// joins Y when the anchor entry of x is imaginary up to classify_tol (it is
// then rewritten as y = i x with a real anchor), and X otherwise; only signs
// are normalized, since a complex rephasing would break the pairing.
struct HBasis {
  ComplexMatrix X;
  ComplexMatrix Y;
};
HBasis build_h_basis(const SubspaceBasis& r_cobar, const StructureTolerance& tol,
                     double classify_tol = 1e-7);

// Assembles T and Ttilde from the mode bases and verifies the Bogoliubov
// identities and T^dag J T = diag(J_{n3}, J_{n1}, J_{n2}).
struct TransformPair {
  ComplexMatrix T;
  ComplexMatrix Ttilde;
};
TransformPair assemble_transform(const BlockBases& blocks, Eigen::Index n);

// Conjugates the system by T and checks the canonical zero pattern and the
// subsystem realizability identities.
ComplexCanonicalForm canonical_complex(const QLSystem& sys, const ComplexMatrix& t,
                                       Eigen::Index n1, Eigen::Index n2, Eigen::Index n3,
                                       const StructureTolerance& tol);

// Full pipeline for the general (doubled-up) system.
KalmanResult decompose(const QLSystem& sys, const StructureTolerance& tol = {},
                       double classify_tol = 1e-7);

// Passive pipeline: controllable/decoherence-free splitting from the
// controllability matrix, the eigenvector characterization of the
// decoherence-free subspace as a cross-check, then the doubled-up canonical
// machinery on the embedded system.
PassiveDecomposition decompose_passive(const PassiveQLSystem& sys,
                                       const StructureTolerance& tol = {});

}  // namespace qk
