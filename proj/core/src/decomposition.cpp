#include "qkalman/decomposition.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace qk {

namespace {

constexpr double kGuardTol = 1e-8;  // internal orthonormality/span guard

ComplexMatrix hstack(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

// Residual of v against the span of the orthonormal columns of basis.
double span_residual(const ComplexMatrix& basis, const ComplexVector& v) {
  if (basis.cols() == 0) return v.norm();
  return (v - basis * (basis.adjoint() * v)).norm();
}

void require_in_span(const ComplexMatrix& basis, const ComplexVector& v,
                     const char* what) {
  const double res = span_residual(basis, v);
  if (res > kGuardTol) {
    std::ostringstream os;
    os << what << ": constructed mode leaves the subspace by " << res
       << "; the space is not closed under the conjugate pairing";
    throw StructureError(os.str());
  }
}

// Largest-norm column of the original basis after projecting out the
// already-emitted directions; returns its index or throws when the sweep
// stalls before the expected number of steps.
ComplexVector next_sweep_direction(const ComplexMatrix& original,
                                   const ComplexMatrix& emitted, const char* what) {
  ComplexMatrix p = original;
  if (emitted.cols() > 0) p -= emitted * (emitted.adjoint() * original);
  Eigen::Index jbest = 0;
  double best = -1.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    const double nj = p.col(j).norm();
    if (nj > best) {
      best = nj;
      jbest = j;
    }
  }
  if (best < kGuardTol) {
    std::ostringstream os;
    os << what << ": sweep stalled with residual " << best
       << " before exhausting the subspace";
    throw StructureError(os.str());
  }
  return p.col(jbest) / best;
}

void check_gram(const ComplexMatrix& z, const char* what) {
  if (z.cols() == 0) return;
  const double res = max_abs(
      ComplexMatrix(z.adjoint() * z - ComplexMatrix::Identity(z.cols(), z.cols())));
  if (res > kGuardTol) {
    std::ostringstream os;
    os << what << ": extracted modes lost orthonormality (residual " << res << ")";
    throw StructureError(os.str());
  }
}

ComplexMatrix block_diag3(const ComplexMatrix& a, const ComplexMatrix& b,
                          const ComplexMatrix& c) {
  ComplexMatrix out = ComplexMatrix::Zero(a.rows() + b.rows() + c.rows(),
                                          a.cols() + b.cols() + c.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.block(a.rows(), a.cols(), b.rows(), b.cols()) = b;
  out.bottomRightCorner(c.rows(), c.cols()) = c;
  return out;
}

RealMatrix real_part_checked(const ComplexMatrix& x, double tol, const char* what) {
  const double imag_res = x.size() == 0 ? 0.0 : x.imag().cwiseAbs().maxCoeff();
  if (imag_res > tol) {
    std::ostringstream os;
    os << what << ": imaginary residue " << imag_res << " exceeds tolerance " << tol;
    throw StructureError(os.str());
  }
  return x.real();
}

template <typename Derived>
void check_zero(const Eigen::MatrixBase<Derived>& x, double tol, const char* what) {
  const double res = max_abs(x);
  if (res > tol) {
    std::ostringstream os;
    os << what << ": block that must vanish has max entry " << res << " (tol " << tol
       << ")";
    throw StructureError(os.str());
  }
}

std::vector<Eigen::Index> index_range(Eigen::Index begin, Eigen::Index count) {
  std::vector<Eigen::Index> idx(static_cast<size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) idx[static_cast<size_t>(i)] = begin + i;
  return idx;
}

}  // namespace

ComplexMatrix BlockBases::Z3() const {
  ComplexMatrix z3(X.rows(), X.cols() + Y.cols());
  z3.leftCols(X.cols()) = X;
  z3.rightCols(Y.cols()) = Y;
  return z3;
}

RealMatrix pi_matrix(Eigen::Index na, Eigen::Index nb) {
  const Eigen::Index n3 = na + nb;
  RealMatrix pi = RealMatrix::Zero(2 * n3, 2 * n3);
  pi.block(0, 0, na, na).setIdentity();
  pi.block(na, n3 + na, nb, nb) = -RealMatrix::Identity(nb, nb);
  pi.block(n3, n3, na, na).setIdentity();
  pi.block(n3 + na, na, nb, nb).setIdentity();
  return pi;
}

ComplexMatrix build_paired_basis(const SubspaceBasis& s, const StructureTolerance& tol,
                                 double classify_tol) {
  (void)tol;
  (void)classify_tol;
  if (s.ambient_dim % 2 != 0) {
    throw ValidationError("build_paired_basis: ambient dimension must be even");
  }
  const Eigen::Index n = s.ambient_dim / 2;
  if (s.dim() % 2 != 0) {
    throw StructureError(
        "build_paired_basis: subspace dimension is odd, conjugate pairing "
        "impossible");
  }
  const Eigen::Index d = s.dim() / 2;
  if (d == 0) return ComplexMatrix(n, 0);
  // The sector is closed under J and under the antilinear swap, so it splits
  // into a pure-annihilation part and its conjugate image: the top halves of
  // an orthonormal basis have singular values 1 (d times) and 0.  The leading
  // left singular vectors therefore recover the mode space without the noise
  // amplification that normalizing a small half would cause.
  Eigen::JacobiSVD<ComplexMatrix> svd(ComplexMatrix(s.basis.topRows(n)),
                                      Eigen::ComputeFullU);
  if (svd.singularValues()(d - 1) < 0.5) {
    throw StructureError(
        "build_paired_basis: subspace does not split into conjugate halves, "
        "conjugate pairing impossible");
  }
  ComplexMatrix z(n, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const ComplexVector zi = phase_fix(ComplexVector(svd.matrixU().col(k)));
    ComplexVector t1 = ComplexVector::Zero(s.ambient_dim);
    ComplexVector t2 = ComplexVector::Zero(s.ambient_dim);
    t1.head(n) = zi;
    t2.tail(n) = zi.conjugate();
    require_in_span(s.basis, t1, "build_paired_basis");
    require_in_span(s.basis, t2, "build_paired_basis");
    z.col(k) = zi;
  }
  check_gram(z, "build_paired_basis");
  return z;
}

namespace {

// Largest-modulus entry, ties resolved toward the highest index, matching the
// anchor rule of phase_fix.
Eigen::Index anchor_entry(const ComplexVector& z) {
  const double mx = z.cwiseAbs().maxCoeff();
  Eigen::Index anchor = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (std::abs(z(i)) >= (1.0 - 1e-9) * mx) anchor = i;
  }
  return anchor;
}

}  // namespace

HBasis build_h_basis(const SubspaceBasis& r_cobar, const StructureTolerance& tol,
                     double classify_tol) {
  (void)tol;
  if (r_cobar.ambient_dim % 2 != 0) {
    throw ValidationError("build_h_basis: ambient dimension must be even");
  }
  const Eigen::Index n = r_cobar.ambient_dim / 2;
  const Eigen::Index n3 = r_cobar.dim();
  const double sqrt2 = std::sqrt(2.0);
  std::vector<ComplexVector> xs, ys;
  ComplexMatrix emitted(r_cobar.ambient_dim, 0);
  for (Eigen::Index step = 0; step < n3; ++step) {
    const ComplexVector w = next_sweep_direction(r_cobar.basis, emitted, "build_h_basis");
    // The sector maps to itself under the antilinear swap (u, v) ->
    // (conj v, conj u), so it is spanned over the reals by swap-fixed
    // vectors, which have the shape [x; conj x].  Combine the sweep
    // direction with its swap image; the two candidates have squared norms
    // summing to 4, so the larger one is never degenerate.
    ComplexVector sw(r_cobar.ambient_dim);
    sw.head(n) = w.tail(n).conjugate();
    sw.tail(n) = w.head(n).conjugate();
    const ComplexVector f_sym = w + sw;
    const ComplexVector f_skew = Complex(0.0, 1.0) * (w - sw);
    ComplexVector f = f_sym.norm() >= f_skew.norm() ? f_sym : f_skew;
    if (emitted.cols() > 0) f -= emitted * (emitted.adjoint() * f);
    f /= f.norm();
    ComplexVector x = sqrt2 * f.head(n);
    // Only a sign may be adjusted from here on: a complex phase would break
    // the [x; conj x] pairing.  The anchor entry decides the family: an
    // imaginary anchor is the Y family (the conserved quadrature then sits
    // in the q slot and pi_matrix swaps it back), anything else is X.
    const Eigen::Index a = anchor_entry(x);
    if (std::abs(x(a).real()) <= classify_tol * std::abs(x(a))) {
      ComplexVector y = Complex(0.0, 1.0) * x;
      if (y(a).real() < 0.0) y = -y;
      ys.push_back(y);
    } else {
      if (x(a).real() < 0.0) x = -x;
      xs.push_back(x);
    }
    require_in_span(r_cobar.basis, f, "build_h_basis");
    emitted = hstack(emitted, f);
  }
  HBasis out;
  out.X.resize(n, static_cast<Eigen::Index>(xs.size()));
  for (size_t j = 0; j < xs.size(); ++j) out.X.col(static_cast<Eigen::Index>(j)) = xs[j];
  out.Y.resize(n, static_cast<Eigen::Index>(ys.size()));
  for (size_t j = 0; j < ys.size(); ++j) out.Y.col(static_cast<Eigen::Index>(j)) = ys[j];
  check_gram(hstack(out.X, out.Y), "build_h_basis");
  return out;
}

TransformPair assemble_transform(const BlockBases& blocks, Eigen::Index n) {
  const Eigen::Index n1 = blocks.Z1.cols();
  const Eigen::Index n2 = blocks.Z2.cols();
  const ComplexMatrix z3 = blocks.Z3();
  const Eigen::Index n3 = z3.cols();
  if (n1 + n2 + n3 != n) {
    std::ostringstream os;
    os << "assemble_transform: mode counts " << n3 << " + " << n1 << " + " << n2
       << " do not fill " << n << " modes";
    throw StructureError(os.str());
  }
  ComplexMatrix w(n, n);
  w.leftCols(n3) = z3;
  w.middleCols(n3, n1) = blocks.Z1;
  w.rightCols(n2) = blocks.Z2;

  TransformPair tp;
  tp.Ttilde = DoubledUpMatrix(w, ComplexMatrix::Zero(n, n)).full();

  tp.T = ComplexMatrix::Zero(2 * n, 2 * n);
  auto place = [&](const ComplexMatrix& zg, Eigen::Index col0) {
    tp.T.block(0, col0, n, zg.cols()) = zg;
    tp.T.block(n, col0 + zg.cols(), n, zg.cols()) = zg.conjugate();
  };
  place(z3, 0);
  place(blocks.Z1, 2 * n3);
  place(blocks.Z2, 2 * n3 + 2 * n1);

  if (!is_bogoliubov(tp.Ttilde, kGuardTol)) {
    throw StructureError("assemble_transform: Ttilde fails the Bogoliubov identities");
  }
  check_zero(ComplexMatrix(tp.T.adjoint() * tp.T -
                           ComplexMatrix::Identity(2 * n, 2 * n)),
             kGuardTol, "assemble_transform: T unitarity");
  const ComplexMatrix jblocks = block_diag3(j_diag(n3), j_diag(n1), j_diag(n2));
  check_zero(ComplexMatrix(tp.T.adjoint() * j_diag(n) * tp.T - jblocks), kGuardTol,
             "assemble_transform: T^dag J T block structure");
  return tp;
}

ComplexCanonicalForm canonical_complex(const QLSystem& sys, const ComplexMatrix& t,
                                       Eigen::Index n1, Eigen::Index n2, Eigen::Index n3,
                                       const StructureTolerance& tol) {
  ComplexCanonicalForm f;
  f.Abar = t.adjoint() * sys.A * t;
  f.Bbar = t.adjoint() * sys.B;
  f.Cbar = sys.C * t;

  const Eigen::Index h0 = 0, co0 = 2 * n3, df0 = 2 * n3 + 2 * n1;
  f.A_h = f.Abar.block(h0, h0, 2 * n3, 2 * n3);
  f.A_12 = f.Abar.block(h0, co0, 2 * n3, 2 * n1);
  f.A_13 = f.Abar.block(h0, df0, 2 * n3, 2 * n2);
  f.A_21 = f.Abar.block(co0, h0, 2 * n1, 2 * n3);
  f.A_31 = f.Abar.block(df0, h0, 2 * n2, 2 * n3);
  f.A_co = f.Abar.block(co0, co0, 2 * n1, 2 * n1);
  f.A_df = f.Abar.block(df0, df0, 2 * n2, 2 * n2);
  f.B_h = f.Bbar.topRows(2 * n3);
  f.B_co = f.Bbar.middleRows(co0, 2 * n1);
  f.C_h = f.Cbar.leftCols(2 * n3);
  f.C_co = f.Cbar.middleCols(co0, 2 * n1);

  check_zero(f.Abar.block(co0, df0, 2 * n1, 2 * n2), tol.zero_tol,
             "canonical_complex: co/df coupling");
  check_zero(f.Abar.block(df0, co0, 2 * n2, 2 * n1), tol.zero_tol,
             "canonical_complex: df/co coupling");
  check_zero(ComplexMatrix(f.Bbar.bottomRows(2 * n2)), tol.zero_tol,
             "canonical_complex: df input rows");
  check_zero(ComplexMatrix(f.Cbar.rightCols(2 * n2)), tol.zero_tol,
             "canonical_complex: df output columns");

  // Subsystem realizability: the co block is itself a realizable system and
  // the df block generates a closed (lossless) evolution.
  check_zero(ComplexMatrix(f.B_co + flat_adjoint(f.C_co)), tol.zero_tol,
             "canonical_complex: co coupling identity");
  check_zero(ComplexMatrix(f.A_co + flat_adjoint(f.A_co) + f.B_co * flat_adjoint(f.B_co)),
             tol.zero_tol, "canonical_complex: co dynamics identity");
  check_zero(ComplexMatrix(f.A_df + flat_adjoint(f.A_df)), tol.zero_tol,
             "canonical_complex: df lossless identity");
  return f;
}

namespace {

// Real canonical form, the orthogonal change of basis S, the symplectic
// Stilde, and the h-sector quadrature swap Pi.
struct RealFormBundle {
  RealCanonicalForm form;
  RealMatrix S, Stilde, Pi;
};

RealFormBundle make_real_form(const QLSystem& sys, const ComplexCanonicalForm& cform,
                              const TransformPair& tp, Eigen::Index n1, Eigen::Index n2,
                              Eigen::Index na, Eigen::Index nb,
                              const StructureTolerance& tol) {
  const Eigen::Index n3 = na + nb;
  const Eigen::Index n = sys.n;
  const Eigen::Index m = sys.m;

  RealFormBundle out;
  out.Pi = pi_matrix(na, nb);
  const ComplexMatrix vt = block_diag3(
      ComplexMatrix(out.Pi.cast<Complex>() * v_matrix(n3)), v_matrix(n1), v_matrix(n2));
  const ComplexMatrix vn = v_matrix(n);
  const ComplexMatrix vm = v_matrix(m);

  out.S = real_part_checked(ComplexMatrix(vn * tp.T * vt.adjoint()), tol.zero_tol,
                            "make_real_form: S");
  out.Stilde = real_part_checked(ComplexMatrix(vn * tp.Ttilde * vn.adjoint()),
                                 tol.zero_tol, "make_real_form: Stilde");
  check_zero(RealMatrix(out.S.transpose() * out.S - RealMatrix::Identity(2 * n, 2 * n)),
             kGuardTol, "make_real_form: S orthogonality");
  const RealMatrix js_blocks =
      block_diag3(j_sym(n3), j_sym(n1), j_sym(n2)).real();
  check_zero(RealMatrix(out.S.transpose() * j_sym_real(n) * out.S - js_blocks),
             kGuardTol, "make_real_form: S symplectic block structure");
  if (!is_symplectic(out.Stilde, kGuardTol)) {
    throw StructureError("make_real_form: Stilde is not orthogonal symplectic");
  }

  RealCanonicalForm& f = out.form;
  f.Abar = real_part_checked(ComplexMatrix(vt * cform.Abar * vt.adjoint()), tol.zero_tol,
                             "make_real_form: Abar");
  f.Bbar = real_part_checked(ComplexMatrix(vt * cform.Bbar * vm.adjoint()), tol.zero_tol,
                             "make_real_form: Bbar");
  f.Cbar = real_part_checked(ComplexMatrix(vm * cform.Cbar * vt.adjoint()), tol.zero_tol,
                             "make_real_form: Cbar");

  const auto qh = index_range(0, n3);
  const auto ph = index_range(n3, n3);
  const auto co = index_range(2 * n3, 2 * n1);
  const auto df = index_range(2 * n3 + 2 * n1, 2 * n2);

  f.A_h11 = f.Abar(qh, qh);
  f.A_h12 = f.Abar(qh, ph);
  f.A_h22 = f.Abar(ph, ph);
  f.A_12 = f.Abar(qh, co);
  f.A_13 = f.Abar(qh, df);
  f.A_21 = f.Abar(co, ph);
  f.A_31 = f.Abar(df, ph);
  f.A_co = f.Abar(co, co);
  f.A_df = f.Abar(df, df);

  check_zero(RealMatrix(f.Abar(ph, qh)), tol.zero_tol, "make_real_form: A(p_h, q_h)");
  check_zero(RealMatrix(f.Abar(ph, co)), tol.zero_tol, "make_real_form: A(p_h, x_co)");
  check_zero(RealMatrix(f.Abar(ph, df)), tol.zero_tol, "make_real_form: A(p_h, x_df)");
  check_zero(RealMatrix(f.Abar(co, qh)), tol.zero_tol, "make_real_form: A(x_co, q_h)");
  check_zero(RealMatrix(f.Abar(co, df)), tol.zero_tol, "make_real_form: A(x_co, x_df)");
  check_zero(RealMatrix(f.Abar(df, qh)), tol.zero_tol, "make_real_form: A(x_df, q_h)");
  check_zero(RealMatrix(f.Abar(df, co)), tol.zero_tol, "make_real_form: A(x_df, x_co)");

  const auto all_cols_b = index_range(0, 2 * m);
  f.B_h = f.Bbar(qh, all_cols_b);
  f.B_co = f.Bbar(co, all_cols_b);
  check_zero(RealMatrix(f.Bbar(ph, all_cols_b)), tol.zero_tol,
             "make_real_form: B(p_h)");
  check_zero(RealMatrix(f.Bbar(df, all_cols_b)), tol.zero_tol,
             "make_real_form: B(x_df)");

  const auto all_rows_c = index_range(0, 2 * m);
  f.C_h = f.Cbar(all_rows_c, ph);
  f.C_co = f.Cbar(all_rows_c, co);
  check_zero(RealMatrix(f.Cbar(all_rows_c, qh)), tol.zero_tol,
             "make_real_form: C(q_h)");
  check_zero(RealMatrix(f.Cbar(all_rows_c, df)), tol.zero_tol,
             "make_real_form: C(x_df)");

  // Rearranged ordering (q_h, x_co, x_df, p_h): upper block triangular.
  f.rearrangement.clear();
  f.rearrangement.insert(f.rearrangement.end(), qh.begin(), qh.end());
  f.rearrangement.insert(f.rearrangement.end(), co.begin(), co.end());
  f.rearrangement.insert(f.rearrangement.end(), df.begin(), df.end());
  f.rearrangement.insert(f.rearrangement.end(), ph.begin(), ph.end());
  f.A_re = f.Abar(f.rearrangement, f.rearrangement);
  f.B_re = f.Bbar(f.rearrangement, all_cols_b);
  f.C_re = f.Cbar(all_rows_c, f.rearrangement);
  return out;
}

std::vector<std::string> make_labels(Eigen::Index n1, Eigen::Index n2, Eigen::Index n3) {
  std::vector<std::string> labels;
  auto add = [&](const std::string& stem, Eigen::Index count, const char* suffix) {
    for (Eigen::Index i = 1; i <= count; ++i) {
      labels.push_back(stem + "[" + std::to_string(i) + "]" + suffix);
    }
  };
  add("q_h", n3, "");
  add("p_h", n3, " (QND)");
  for (Eigen::Index i = 1; i <= n1; ++i) labels.push_back("q_co[" + std::to_string(i) + "]");
  for (Eigen::Index i = 1; i <= n1; ++i) labels.push_back("p_co[" + std::to_string(i) + "]");
  for (Eigen::Index i = 1; i <= n2; ++i) labels.push_back("q_df[" + std::to_string(i) + "] (DF)");
  for (Eigen::Index i = 1; i <= n2; ++i) labels.push_back("p_df[" + std::to_string(i) + "] (DF)");
  return labels;
}

KalmanResult finish_decomposition(const QLSystem& sys, const KalmanSubspaces& ks,
                                  const BlockBases& blocks, const StructureTolerance& tol) {
  KalmanResult res;
  res.n = sys.n;
  res.m = sys.m;
  res.n1 = blocks.Z1.cols();
  res.n2 = blocks.Z2.cols();
  res.na = blocks.X.cols();
  res.nb = blocks.Y.cols();
  res.n3 = res.na + res.nb;
  res.subspaces = ks;
  res.blocks = blocks;
  res.tol = tol;

  const TransformPair tp = assemble_transform(blocks, sys.n);
  res.T = tp.T;
  res.Ttilde = tp.Ttilde;
  res.cform = canonical_complex(sys, tp.T, res.n1, res.n2, res.n3, tol);
  RealFormBundle rb =
      make_real_form(sys, res.cform, tp, res.n1, res.n2, res.na, res.nb, tol);
  res.rform = std::move(rb.form);
  res.S = std::move(rb.S);
  res.Stilde = std::move(rb.Stilde);
  res.Pi = std::move(rb.Pi);
  res.mode_labels = make_labels(res.n1, res.n2, res.n3);
  return res;
}

}  // namespace

KalmanResult decompose(const QLSystem& sys, const StructureTolerance& tol,
                       double classify_tol) {
  const RealizabilityReport pr = check_realizability(sys, 1e-7);
  if (!pr.ok) {
    std::ostringstream os;
    os << "decompose: system is not physically realizable (dynamics residual "
       << pr.dynamics_residual << ", coupling residual " << pr.coupling_residual << ")";
    throw ValidationError(os.str());
  }
  const KalmanSubspaces ks = kalman_subspaces(sys, tol);
  BlockBases blocks;
  blocks.Z1 = build_paired_basis(ks.r_co, tol, classify_tol);
  blocks.Z2 = build_paired_basis(ks.r_cbar_obar, tol, classify_tol);
  const HBasis h = build_h_basis(ks.r_cobar, tol, classify_tol);
  blocks.X = h.X;
  blocks.Y = h.Y;
  return finish_decomposition(sys, ks, blocks, tol);
}

PassiveDecomposition decompose_passive(const PassiveQLSystem& sys,
                                       const StructureTolerance& tol) {
  const RealizabilityReport pr = check_realizability(sys, 1e-7);
  if (!pr.ok) {
    std::ostringstream os;
    os << "decompose_passive: system is not physically realizable (dynamics residual "
       << pr.dynamics_residual << ", coupling residual " << pr.coupling_residual << ")";
    throw ValidationError(os.str());
  }
  const PassiveSubspaces ps = passive_subspaces(sys, tol);

  PassiveDecomposition out;
  out.n = sys.n;
  out.m = sys.m;
  out.n1 = ps.controllable.dim();
  out.n2 = ps.uncontrollable.dim();
  out.U1.resize(sys.n, out.n1);
  for (Eigen::Index j = 0; j < out.n1; ++j) {
    out.U1.col(j) = phase_fix(ps.controllable.basis.col(j));
  }
  out.U2.resize(sys.n, out.n2);
  for (Eigen::Index j = 0; j < out.n2; ++j) {
    out.U2.col(j) = phase_fix(ps.uncontrollable.basis.col(j));
  }

  // Eigenvector characterization of the decoherence-free subspace: it is
  // spanned by the eigenvectors of A whose eigenvalues sit on the imaginary
  // axis, and those eigenvalues admit no generalized eigenvectors.
  Eigen::ComplexEigenSolver<ComplexMatrix> es(sys.A);
  std::vector<Eigen::Index> imag_idx;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()(i).real()) <= tol.eig_tol) imag_idx.push_back(i);
  }
  if (static_cast<Eigen::Index>(imag_idx.size()) != out.n2) {
    std::ostringstream os;
    os << "decompose_passive: " << imag_idx.size()
       << " imaginary-axis eigenvalues but the decoherence-free subspace has "
          "dimension "
       << out.n2;
    throw StructureError(os.str());
  }
  if (out.n2 > 0) {
    ComplexMatrix w(sys.n, out.n2);
    for (Eigen::Index j = 0; j < out.n2; ++j) {
      w.col(j) = es.eigenvectors().col(imag_idx[static_cast<size_t>(j)]);
    }
    const SubspaceBasis wspan = image(w, tol);
    if (wspan.dim() != out.n2 ||
        !same_subspace(wspan, ps.uncontrollable, kGuardTol)) {
      throw StructureError(
          "decompose_passive: imaginary-axis eigenvectors do not span the "
          "decoherence-free subspace");
    }
  }

  // Canonical passive form in the (co, df) ordering.
  const ComplexMatrix u = hstack(out.U1, out.U2);
  out.Abar = u.adjoint() * sys.A * u;
  out.Bbar = u.adjoint() * sys.B;
  out.Cbar = sys.C * u;
  out.A_co = out.Abar.topLeftCorner(out.n1, out.n1);
  out.A_df = out.Abar.bottomRightCorner(out.n2, out.n2);
  out.B_co = out.Bbar.topRows(out.n1);
  out.C_co = out.Cbar.leftCols(out.n1);
  check_zero(ComplexMatrix(out.Abar.topRightCorner(out.n1, out.n2)), tol.zero_tol,
             "decompose_passive: co/df coupling");
  check_zero(ComplexMatrix(out.Abar.bottomLeftCorner(out.n2, out.n1)), tol.zero_tol,
             "decompose_passive: df/co coupling");
  check_zero(ComplexMatrix(out.Bbar.bottomRows(out.n2)), tol.zero_tol,
             "decompose_passive: df input rows");
  check_zero(ComplexMatrix(out.Cbar.rightCols(out.n2)), tol.zero_tol,
             "decompose_passive: df output columns");

  if (out.n2 > 0) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es_df(out.A_df);
    out.df_eigenvalues = es_df.eigenvalues();
    std::sort(out.df_eigenvalues.begin(), out.df_eigenvalues.end(),
              [](Complex a, Complex b) {
                return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
              });
    for (Eigen::Index i = 0; i < out.df_eigenvalues.size(); ++i) {
      if (std::abs(out.df_eigenvalues(i).real()) > tol.eig_tol) {
        throw StructureError(
            "decompose_passive: decoherence-free block has an eigenvalue away "
            "from the imaginary axis");
      }
    }
  } else {
    out.df_eigenvalues.resize(0);
  }

  // Doubled-up picture built from the same mode bases.
  const QLSystem gsys = embed_passive(sys);
  BlockBases blocks;
  blocks.Z1 = out.U1;
  blocks.Z2 = out.U2;
  blocks.X = ComplexMatrix::Zero(sys.n, 0);
  blocks.Y = ComplexMatrix::Zero(sys.n, 0);

  KalmanSubspaces ks;
  auto doubled_span = [&](const ComplexMatrix& z) {
    SubspaceBasis s;
    s.ambient_dim = 2 * sys.n;
    s.basis = ComplexMatrix::Zero(2 * sys.n, 2 * z.cols());
    s.basis.block(0, 0, sys.n, z.cols()) = z;
    s.basis.block(sys.n, z.cols(), sys.n, z.cols()) = z.conjugate();
    return s;
  };
  ks.r_co = doubled_span(out.U1);
  ks.r_cbar_obar = doubled_span(out.U2);
  ks.r_cobar.ambient_dim = 2 * sys.n;
  ks.r_cobar.basis = ComplexMatrix::Zero(2 * sys.n, 0);
  ks.r_cbar_o = ks.r_cobar;
  ks.n1 = out.n1;
  ks.n2 = out.n2;
  ks.n3 = 0;

  out.doubled = finish_decomposition(gsys, ks, blocks, tol);
  return out;
}

}  // namespace qk
