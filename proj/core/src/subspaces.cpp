#include "qkalman/subspaces.hpp"

#include <Eigen/SVD>
#include <sstream>

namespace qk {

namespace {

constexpr Complex kI{0.0, 1.0};

Eigen::Index svd_rank(const Eigen::JacobiSVD<ComplexMatrix>& svd, double rank_tol) {
  if (svd.singularValues().size() == 0) return 0;
  const double cutoff = rank_tol * svd.singularValues()(0);
  Eigen::Index r = 0;
  while (r < svd.singularValues().size() && svd.singularValues()(r) > cutoff) ++r;
  return r;
}

// Re-orthonormalizes the columns of m (used after forming intersection
// representatives, which are only orthonormal up to the angle tolerance).
ComplexMatrix orthonormalize(const ComplexMatrix& m) {
  if (m.cols() == 0) return m;
  Eigen::HouseholderQR<ComplexMatrix> qr(m);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(m.rows(), m.cols());
  // Fix the QR sign/phase ambiguity so the result is deterministic.
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const Complex d = qr.matrixQR()(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= std::conj(d) / std::abs(d);
  }
  return q;
}

void check_orthonormal(const SubspaceBasis& s, const char* what) {
  if (s.dim() == 0) return;
  const double res = max_abs(ComplexMatrix(s.basis.adjoint() * s.basis -
                                           ComplexMatrix::Identity(s.dim(), s.dim())));
  if (res > 1e-8) {
    std::ostringstream os;
    os << what << ": basis lost orthonormality (residual " << res << ")";
    throw StructureError(os.str());
  }
}

}  // namespace

namespace {

// A Krylov block produced from a max-norm-one predecessor is treated as zero
// once it falls this far below the multiplier's scale.  Such a block is
// rounding residue (e.g. powers of a nilpotent generator) and rescaling it
// back to unit norm would inject full-strength noise rows; dropping it is
// consistent with the relative rank tolerance used downstream.
double krylov_zero_cutoff(const ComplexMatrix& m) {
  return 1e-12 * (1.0 + max_abs(m));
}

}  // namespace

ComplexMatrix stacked_krylov(const ComplexMatrix& m, const ComplexMatrix& c,
                             Eigen::Index order) {
  if (m.rows() != m.cols() || c.cols() != m.rows()) {
    throw ValidationError("stacked_krylov: incompatible shapes");
  }
  const double cutoff = krylov_zero_cutoff(m);
  ComplexMatrix out = ComplexMatrix::Zero(order * c.rows(), c.cols());
  ComplexMatrix block = c;
  for (Eigen::Index k = 0; k < order; ++k) {
    const double scale = max_abs(block);
    if (k > 0 && scale <= cutoff) break;
    out.middleRows(k * c.rows(), c.rows()) = scale > 0.0 ? (block / scale).eval() : block;
    if (k + 1 < order) block = (block / (scale > 0.0 ? scale : 1.0)) * m;
  }
  return out;
}

ComplexMatrix controllability_matrix(const ComplexMatrix& a, const ComplexMatrix& b,
                                     Eigen::Index order) {
  if (a.rows() != a.cols() || b.rows() != a.rows()) {
    throw ValidationError("controllability_matrix: incompatible shapes");
  }
  const double cutoff = krylov_zero_cutoff(a);
  ComplexMatrix out = ComplexMatrix::Zero(b.rows(), order * b.cols());
  ComplexMatrix block = b;
  for (Eigen::Index k = 0; k < order; ++k) {
    const double scale = max_abs(block);
    if (k > 0 && scale <= cutoff) break;
    out.middleCols(k * b.cols(), b.cols()) = scale > 0.0 ? (block / scale).eval() : block;
    if (k + 1 < order) block = a * (block / (scale > 0.0 ? scale : 1.0));
  }
  return out;
}

ComplexMatrix observability_matrix(const QLSystem& sys, ObservabilityKind kind) {
  const ComplexMatrix c = sys.C;
  switch (kind) {
    case ObservabilityKind::kGenerator:
      return stacked_krylov(sys.A, c, 2 * sys.n);
    case ObservabilityKind::kHamiltonianOnly:
      // The -i factor of the Hamiltonian generator scales each Krylov block
      // by a unit modulus and cannot change any kernel, so it is dropped.
      return stacked_krylov(ComplexMatrix(j_diag(sys.n) * sys.Omega.full()), c, 2 * sys.n);
  }
  throw ValidationError("observability_matrix: unknown kind");
}

SubspaceBasis kernel(const ComplexMatrix& m, const StructureTolerance& tol) {
  SubspaceBasis out;
  out.ambient_dim = m.cols();
  if (m.cols() == 0) {
    out.basis = ComplexMatrix::Zero(0, 0);
    return out;
  }
  if (m.rows() == 0 || max_abs(m) == 0.0) {
    out.basis = ComplexMatrix::Identity(m.cols(), m.cols());
    return out;
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  const Eigen::Index r = svd_rank(svd, tol.rank_tol);
  out.basis = svd.matrixV().rightCols(m.cols() - r);
  return out;
}

SubspaceBasis image(const ComplexMatrix& m, const StructureTolerance& tol) {
  SubspaceBasis out;
  out.ambient_dim = m.rows();
  if (m.rows() == 0 || m.cols() == 0 || max_abs(m) == 0.0) {
    out.basis = ComplexMatrix::Zero(m.rows(), 0);
    return out;
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU);
  const Eigen::Index r = svd_rank(svd, tol.rank_tol);
  out.basis = svd.matrixU().leftCols(r);
  return out;
}

SubspaceBasis complement(const SubspaceBasis& s) {
  SubspaceBasis out;
  out.ambient_dim = s.ambient_dim;
  if (s.dim() == 0) {
    out.basis = ComplexMatrix::Identity(s.ambient_dim, s.ambient_dim);
    return out;
  }
  if (s.dim() == s.ambient_dim) {
    out.basis = ComplexMatrix::Zero(s.ambient_dim, 0);
    return out;
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(s.basis, Eigen::ComputeFullU);
  out.basis = svd.matrixU().rightCols(s.ambient_dim - s.dim());
  return out;
}

SubspaceBasis intersect(const SubspaceBasis& s1, const SubspaceBasis& s2,
                        const StructureTolerance& tol) {
  if (s1.ambient_dim != s2.ambient_dim) {
    throw ValidationError("intersect: ambient dimensions differ");
  }
  SubspaceBasis out;
  out.ambient_dim = s1.ambient_dim;
  if (s1.dim() == 0 || s2.dim() == 0) {
    out.basis = ComplexMatrix::Zero(s1.ambient_dim, 0);
    return out;
  }
  // Principal angles between the spans: cos(theta_i) are the singular values
  // of S1^dag S2; directions with cosine within zero_tol of 1 are common.
  Eigen::JacobiSVD<ComplexMatrix> svd(ComplexMatrix(s1.basis.adjoint() * s2.basis),
                                      Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Index k = 0;
  while (k < svd.singularValues().size() &&
         svd.singularValues()(k) >= 1.0 - tol.zero_tol) {
    ++k;
  }
  if (k == 0) {
    out.basis = ComplexMatrix::Zero(s1.ambient_dim, 0);
    return out;
  }
  out.basis = orthonormalize(ComplexMatrix(s1.basis * svd.matrixU().leftCols(k)));
  return out;
}

bool same_subspace(const SubspaceBasis& s1, const SubspaceBasis& s2, double angle_tol) {
  if (s1.ambient_dim != s2.ambient_dim || s1.dim() != s2.dim()) return false;
  if (s1.dim() == 0) return true;
  Eigen::JacobiSVD<ComplexMatrix> svd(ComplexMatrix(s1.basis.adjoint() * s2.basis));
  return svd.singularValues().minCoeff() >= 1.0 - angle_tol;
}

double subspace_distance(const SubspaceBasis& s1, const SubspaceBasis& s2) {
  if (s1.ambient_dim != s2.ambient_dim || s1.dim() != s2.dim()) {
    return std::numeric_limits<double>::infinity();
  }
  if (s1.dim() == 0) return 0.0;
  // sin(theta_max) is the spectral norm of (I - S1 S1^dag) S2.  Computing the
  // residual directly keeps full accuracy for tiny angles, where the
  // alternative sqrt(1 - cos^2) loses half the significant digits once the
  // cosine saturates at 1 - ulp.
  const ComplexMatrix residual =
      s2.basis - s1.basis * ComplexMatrix(s1.basis.adjoint() * s2.basis);
  Eigen::JacobiSVD<ComplexMatrix> svd(residual);
  return std::min(1.0, svd.singularValues()(0));
}

KalmanSubspaces kalman_subspaces(const QLSystem& sys, const StructureTolerance& tol) {
  const ComplexMatrix os = observability_matrix(sys, ObservabilityKind::kHamiltonianOnly);
  const ComplexMatrix j = j_diag(sys.n);
  const ComplexMatrix osj = os * j;

  const SubspaceBasis ker_o = kernel(os, tol);
  const SubspaceBasis ker_c = kernel(osj, tol);
  const SubspaceBasis obs = complement(ker_o);   // observable directions
  const SubspaceBasis ctrl = complement(ker_c);  // controllable directions

  KalmanSubspaces ks;
  ks.r_co = intersect(ctrl, obs, tol);
  ks.r_cobar = intersect(ctrl, ker_o, tol);
  ks.r_cbar_o = intersect(ker_c, obs, tol);
  ks.r_cbar_obar = intersect(ker_c, ker_o, tol);

  if (ks.r_co.dim() % 2 != 0 || ks.r_cbar_obar.dim() % 2 != 0) {
    throw StructureError("kalman_subspaces: co/uncontrollable-unobservable spaces have odd dimension");
  }
  ks.n1 = ks.r_co.dim() / 2;
  ks.n2 = ks.r_cbar_obar.dim() / 2;
  ks.n3 = ks.r_cobar.dim();
  if (ks.r_cbar_o.dim() != ks.n3) {
    std::ostringstream oserr;
    oserr << "kalman_subspaces: dim R_cbar_o = " << ks.r_cbar_o.dim()
          << " differs from dim R_cobar = " << ks.n3;
    throw StructureError(oserr.str());
  }
  if (2 * (ks.n1 + ks.n2 + ks.n3) != 2 * sys.n) {
    std::ostringstream oserr;
    oserr << "kalman_subspaces: dimensions (" << ks.n1 << ", " << ks.n2 << ", "
          << ks.n3 << ") do not fill the state space of " << sys.n << " modes";
    throw StructureError(oserr.str());
  }

  // Pairwise orthogonality of the four pieces.
  const SubspaceBasis* parts[] = {&ks.r_co, &ks.r_cobar, &ks.r_cbar_o, &ks.r_cbar_obar};
  for (int i = 0; i < 4; ++i) {
    check_orthonormal(*parts[i], "kalman_subspaces");
    for (int l = i + 1; l < 4; ++l) {
      if (parts[i]->dim() == 0 || parts[l]->dim() == 0) continue;
      const double res = max_abs(ComplexMatrix(parts[i]->basis.adjoint() * parts[l]->basis));
      if (res > 1e-7) {
        std::ostringstream oserr;
        oserr << "kalman_subspaces: pieces " << i << " and " << l
              << " are not orthogonal (overlap " << res << ")";
        throw StructureError(oserr.str());
      }
    }
  }

  // J maps R_cobar onto R_cbar_o and preserves the other two pieces.
  auto j_image = [&](const SubspaceBasis& s) {
    SubspaceBasis out = s;
    out.basis = j * s.basis;
    return out;
  };
  const double angle_tol = 1e-8;
  if (!same_subspace(j_image(ks.r_cobar), ks.r_cbar_o, angle_tol) ||
      !same_subspace(j_image(ks.r_co), ks.r_co, angle_tol) ||
      !same_subspace(j_image(ks.r_cbar_obar), ks.r_cbar_obar, angle_tol)) {
    throw StructureError("kalman_subspaces: J-images violate the pairing structure");
  }
  return ks;
}

PassiveSubspaces passive_subspaces(const PassiveQLSystem& sys,
                                   const StructureTolerance& tol) {
  const ComplexMatrix cg = controllability_matrix(sys.A, sys.B, sys.n);
  PassiveSubspaces ps;
  ps.controllable = image(cg, tol);
  ps.uncontrollable = complement(ps.controllable);

  // For realizable passive systems the uncontrollable and unobservable
  // spaces coincide; verify against the plain observability kernel.
  const SubspaceBasis ker_obs = kernel(stacked_krylov(sys.A, sys.C, sys.n), tol);
  if (!same_subspace(ps.uncontrollable, ker_obs, 1e-8)) {
    throw StructureError(
        "passive_subspaces: Ker(C_G^dag) and Ker(O_G) disagree; system is not "
        "physically realizable at the working tolerance");
  }
  return ps;
}

}  // namespace qk
