#include "qkalman/analysis.hpp"

#include <sstream>

namespace qk {

namespace {

constexpr double kAngleTol = 1e-8;

std::string h_label(const char* stem, Eigen::Index i) {
  return std::string(stem) + "[" + std::to_string(i + 1) + "]";
}

}  // namespace

ModeClassification classify_modes(const KalmanResult& r) {
  ModeClassification out;
  out.qmfs_dim = r.n3;
  for (const std::string& label : r.mode_labels) {
    if (label.find("(DF)") != std::string::npos) out.df_modes.push_back(label);
  }
  for (Eigen::Index i = 0; i < r.n3; ++i) {
    out.qnd_variables.push_back(h_label("p_h", i));
    out.conjugate_pairs.emplace_back(h_label("q_h", i), h_label("p_h", i));
  }

  // The p_h span is a noiseless autonomous subsystem exactly when its rows
  // of the canonical A touch nothing but the p_h block and its rows of the
  // canonical B vanish.
  const Eigen::Index n3 = r.n3;
  const Eigen::Index total = 2 * (r.n1 + r.n2 + n3);
  if (n3 > 0) {
    RealMatrix ph_rows = r.rform.Abar.middleRows(n3, n3);
    ph_rows.middleCols(n3, n3).setZero();
    out.qnd_dynamics_residual = max_abs(ph_rows);
    out.qnd_input_residual = max_abs(RealMatrix(r.rform.Bbar.middleRows(n3, n3)));
  }
  (void)total;
  out.qnd_structure_ok = out.qnd_dynamics_residual <= r.tol.zero_tol &&
                         out.qnd_input_residual <= r.tol.zero_tol;
  return out;
}

BAEReport bae_check(const KalmanResult& r, BAEDirection direction, double zero_tol) {
  BAEReport rep;
  rep.direction = direction;
  const Eigen::Index m = r.m;
  const Eigen::Index n1 = r.n1;
  // Inputs are ordered (q_in, p_in) and outputs (q_out, p_out).
  const Eigen::Index in0 = direction == BAEDirection::kPinToQout ? m : 0;
  const Eigen::Index out0 = direction == BAEDirection::kPinToQout ? 0 : m;

  if (n1 == 0) {
    // No controllable-observable dynamics: the transfer function is the
    // identity feedthrough, whose off-diagonal quadrants vanish.
    rep.verdict = true;
    return rep;
  }

  const RealMatrix& a = r.rform.A_co;
  const RealMatrix bsel = r.rform.B_co.middleCols(in0, m);
  const RealMatrix csel = r.rform.C_co.middleRows(out0, m);

  RealMatrix blk = bsel;
  for (Eigen::Index k = 0; k < 2 * n1; ++k) {
    rep.markov_residual = std::max(rep.markov_residual, max_abs(RealMatrix(csel * blk)));
    blk = a * blk;
  }

  // Spot-check the transfer function itself well away from the spectrum of
  // A_co (which lies in the closed left half plane).
  const Complex samples[] = {Complex(0.7, 0.0), Complex(1.3, 0.4), Complex(2.1, 0.0)};
  const ComplexMatrix d = ComplexMatrix::Identity(2 * m, 2 * m);
  for (const Complex& s : samples) {
    const ComplexMatrix xi =
        transfer_function(a.cast<Complex>(), r.rform.B_co.cast<Complex>(),
                          r.rform.C_co.cast<Complex>(), d, s, r.tol.eig_tol);
    rep.transfer_residual =
        std::max(rep.transfer_residual, max_abs(ComplexMatrix(xi.block(out0, in0, m, m))));
  }
  rep.verdict = rep.markov_residual <= zero_tol && rep.transfer_residual <= zero_tol;
  return rep;
}

double h_markov_residual(const KalmanResult& r) {
  const Eigen::Index n3 = r.n3;
  if (n3 == 0) return 0.0;
  const Eigen::Index rows = 2 * (r.n1 + r.n2);
  ComplexMatrix left(rows, 2 * n3);
  left.topRows(2 * r.n1) = r.cform.A_21;
  left.bottomRows(2 * r.n2) = r.cform.A_31;
  ComplexMatrix right(2 * n3, rows);
  right.leftCols(2 * r.n1) = r.cform.A_12;
  right.rightCols(2 * r.n2) = r.cform.A_13;

  double res = 0.0;
  ComplexMatrix blk = right;
  for (Eigen::Index k = 0; k < 2 * n3; ++k) {
    res = std::max(res, max_abs(ComplexMatrix(left * blk)));
    blk = r.cform.A_h * blk;
  }
  return res;
}

SpecialCaseFlags special_case_flags(const QLSystem& sys, const KalmanResult& r) {
  SpecialCaseFlags f;
  const StructureTolerance& tol = r.tol;
  const ComplexMatrix os = observability_matrix(sys, ObservabilityKind::kHamiltonianOnly);
  const SubspaceBasis ker_o = kernel(os, tol);

  // Flag 1: the Hamiltonian maps the unobservable space into itself.
  double invariance_res = 0.0;
  if (ker_o.dim() > 0) {
    const ComplexMatrix w = sys.Omega.full() * ker_o.basis;
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double nrm = w.col(j).norm();
      if (nrm < 1e-12) continue;
      const ComplexVector res_vec =
          w.col(j) - ker_o.basis * (ker_o.basis.adjoint() * w.col(j));
      invariance_res = std::max(invariance_res, res_vec.norm() / nrm);
    }
  }
  f.hamiltonian_preserves_unobservable = invariance_res <= kAngleTol;
  f.a13_residual = max_abs(r.cform.A_13);
  f.a31_residual = max_abs(r.cform.A_31);

  // Flag 2: the coupling row space avoids the uncontrollable directions, so
  // the split sector can neither be driven nor seen.
  const SubspaceBasis row_c = image(ComplexMatrix(sys.C.adjoint()), tol);
  const SubspaceBasis ker_cj = kernel(ComplexMatrix(os * j_diag(sys.n)), tol);
  double overlap = 0.0;
  if (row_c.dim() > 0 && ker_cj.dim() > 0) {
    overlap = max_abs(ComplexMatrix(row_c.basis.adjoint() * ker_cj.basis));
  }
  f.coupling_avoids_h_sector = overlap <= kAngleTol;
  f.bh_residual = max_abs(r.cform.B_h);
  f.ch_residual = max_abs(r.cform.C_h);

  std::ostringstream rep;
  if (f.hamiltonian_preserves_unobservable &&
      (f.a13_residual > tol.zero_tol || f.a31_residual > tol.zero_tol)) {
    f.consistent = false;
    rep << "Hamiltonian preserves the unobservable space but the split/df "
           "couplings do not vanish (|A_13| = "
        << f.a13_residual << ", |A_31| = " << f.a31_residual << "). ";
  }
  if (f.coupling_avoids_h_sector &&
      (f.bh_residual > tol.zero_tol || f.ch_residual > tol.zero_tol)) {
    f.consistent = false;
    rep << "Coupling avoids the uncontrollable directions but the split "
           "sector still couples to the field (|B_h| = "
        << f.bh_residual << ", |C_h| = " << f.ch_residual << "). ";
  }
  f.report = rep.str();
  return f;
}

}  // namespace qk
