#include "qkalman/system_model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace qk {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kSymmetrizeLimit = 1e-6;

// Symmetrizes x against the involution given by ref (Hermitian or
// transpose-symmetric); asymmetry beyond kSymmetrizeLimit is rejected.
ComplexMatrix enforce(const ComplexMatrix& x, const ComplexMatrix& xr,
                      const char* what, bool* adjusted) {
  const double res = max_abs(ComplexMatrix(x - xr));
  if (res > kSymmetrizeLimit) {
    std::ostringstream os;
    os << what << " asymmetry " << res << " exceeds the symmetrization limit "
       << kSymmetrizeLimit;
    throw ValidationError(os.str());
  }
  if (adjusted != nullptr && res > 0.0) *adjusted = true;
  return 0.5 * (x + xr);
}

void require_shape(const ComplexMatrix& x, Eigen::Index rows, Eigen::Index cols,
                   const char* what) {
  if (x.rows() != rows || x.cols() != cols) {
    std::ostringstream os;
    os << what << " must be " << rows << "x" << cols << ", got " << x.rows()
       << "x" << x.cols();
    throw ValidationError(os.str());
  }
}

}  // namespace

QLSystem build_general(const ComplexMatrix& omega_minus, const ComplexMatrix& omega_plus,
                       const ComplexMatrix& cminus, const ComplexMatrix& cplus,
                       bool* symmetrized) {
  const Eigen::Index n = omega_minus.rows();
  if (n == 0) throw ValidationError("build_general: need at least one mode");
  require_shape(omega_minus, n, n, "Omega_minus");
  require_shape(omega_plus, n, n, "Omega_plus");
  const Eigen::Index m = cminus.rows();
  if (m == 0) throw ValidationError("build_general: need at least one channel");
  require_shape(cminus, m, n, "C_minus");
  require_shape(cplus, m, n, "C_plus");

  if (symmetrized != nullptr) *symmetrized = false;
  QLSystem sys;
  sys.n = n;
  sys.m = m;
  sys.Omega = DoubledUpMatrix(
      enforce(omega_minus, omega_minus.adjoint(), "Omega_minus", symmetrized),
      enforce(omega_plus, omega_plus.transpose(), "Omega_plus", symmetrized));
  sys.Cminus = cminus;
  sys.Cplus = cplus;

  const ComplexMatrix cfull = sys.coupling();
  const ComplexMatrix cflat = flat_adjoint(cfull);
  sys.A = -kI * j_diag(n) * sys.Omega.full() - 0.5 * cflat * cfull;
  sys.B = -cflat;
  sys.C = cfull;
  return sys;
}

PassiveQLSystem build_passive(const ComplexMatrix& omega_minus, const ComplexMatrix& cminus,
                              bool* symmetrized) {
  const Eigen::Index n = omega_minus.rows();
  if (n == 0) throw ValidationError("build_passive: need at least one mode");
  require_shape(omega_minus, n, n, "Omega_minus");
  const Eigen::Index m = cminus.rows();
  if (m == 0) throw ValidationError("build_passive: need at least one channel");
  require_shape(cminus, m, n, "C_minus");

  if (symmetrized != nullptr) *symmetrized = false;
  PassiveQLSystem sys;
  sys.n = n;
  sys.m = m;
  sys.Omega_minus = enforce(omega_minus, omega_minus.adjoint(), "Omega_minus", symmetrized);
  sys.Cminus = cminus;
  sys.A = -kI * sys.Omega_minus - 0.5 * cminus.adjoint() * cminus;
  sys.B = -cminus.adjoint();
  sys.C = cminus;
  return sys;
}

QLSystem embed_passive(const PassiveQLSystem& sys) {
  return build_general(sys.Omega_minus, ComplexMatrix::Zero(sys.n, sys.n), sys.Cminus,
                       ComplexMatrix::Zero(sys.m, sys.n));
}

RealQLSystem build_real(const RealMatrix& h, const RealMatrix& c, bool* symmetrized) {
  if (h.rows() == 0 || h.rows() % 2 != 0 || h.rows() != h.cols()) {
    throw ValidationError("build_real: H must be square with even dimension");
  }
  const Eigen::Index n = h.rows() / 2;
  if (c.cols() != 2 * n || c.rows() == 0 || c.rows() % 2 != 0) {
    std::ostringstream os;
    os << "build_real: C must be 2m x " << 2 * n << " with m >= 1, got " << c.rows()
       << "x" << c.cols();
    throw ValidationError(os.str());
  }
  const double asym = max_abs(RealMatrix(h - h.transpose()));
  if (asym > kSymmetrizeLimit) {
    std::ostringstream os;
    os << "H asymmetry " << asym << " exceeds the symmetrization limit "
       << kSymmetrizeLimit;
    throw ValidationError(os.str());
  }
  if (symmetrized != nullptr) *symmetrized = asym > 0.0;

  RealQLSystem sys;
  sys.n = n;
  sys.m = c.rows() / 2;
  sys.H = 0.5 * (h + h.transpose());
  sys.C = c;
  sys.A = j_sym_real(n) * sys.H - 0.5 * sharp_adjoint(c) * c;
  sys.B = -sharp_adjoint(c);
  return sys;
}

RealQLSystem to_real(const QLSystem& sys, double tol) {
  const ComplexMatrix vn = v_matrix(sys.n);
  const ComplexMatrix vm = v_matrix(sys.m);
  const ComplexMatrix a = vn * sys.A * vn.adjoint();
  const ComplexMatrix b = vn * sys.B * vm.adjoint();
  const ComplexMatrix c = vm * sys.C * vn.adjoint();
  const ComplexMatrix h = vn * sys.Omega.full() * vn.adjoint();
  const double imag_res = std::max({max_abs(ComplexMatrix(a.imag().cast<Complex>())),
                                    max_abs(ComplexMatrix(b.imag().cast<Complex>())),
                                    max_abs(ComplexMatrix(c.imag().cast<Complex>())),
                                    max_abs(ComplexMatrix(h.imag().cast<Complex>()))});
  if (imag_res > tol) {
    std::ostringstream os;
    os << "to_real: conjugated matrices have imaginary residue " << imag_res
       << " (tol " << tol << "); input is not doubled-up";
    throw StructureError(os.str());
  }
  RealQLSystem out;
  out.n = sys.n;
  out.m = sys.m;
  out.H = h.real();
  out.A = a.real();
  out.B = b.real();
  out.C = c.real();
  return out;
}

QLSystem to_complex(const RealQLSystem& sys, double tol) {
  const ComplexMatrix vn = v_matrix(sys.n);
  const ComplexMatrix vm = v_matrix(sys.m);
  const ComplexMatrix omega = vn.adjoint() * sys.H.cast<Complex>() * vn;
  const ComplexMatrix cfull = vm.adjoint() * sys.C.cast<Complex>() * vn;
  const DoubledUpMatrix omega_d = doubled_up_from_full(omega, tol);
  const DoubledUpMatrix c_d = doubled_up_from_full(cfull, tol);
  QLSystem out = build_general(omega_d.U, omega_d.V, c_d.U, c_d.V);
  // The quadrature data must agree with the model rebuilt from (Omega, C);
  // a mismatch means A or B were not generated by this Hamiltonian/coupling.
  const double res =
      std::max(max_abs(ComplexMatrix(vn.adjoint() * sys.A.cast<Complex>() * vn - out.A)),
               max_abs(ComplexMatrix(vn.adjoint() * sys.B.cast<Complex>() * vm - out.B)));
  if (res > std::max(tol, 1e-9 * std::max(1.0, max_abs(sys.A)))) {
    std::ostringstream os;
    os << "to_complex: real dynamics deviate from the (H, C) model by " << res;
    throw StructureError(os.str());
  }
  return out;
}

RealizabilityReport check_realizability(const QLSystem& sys, double tol) {
  RealizabilityReport rep;
  const ComplexMatrix aflat = flat_adjoint(sys.A);
  const ComplexMatrix bflat = flat_adjoint(sys.B);
  rep.dynamics_residual = max_abs(ComplexMatrix(sys.A + aflat + sys.B * bflat));
  rep.coupling_residual = max_abs(ComplexMatrix(sys.B + flat_adjoint(sys.C)));
  rep.ok = rep.dynamics_residual <= tol && rep.coupling_residual <= tol;
  return rep;
}

RealizabilityReport check_realizability(const PassiveQLSystem& sys, double tol) {
  RealizabilityReport rep;
  rep.dynamics_residual =
      max_abs(ComplexMatrix(sys.A + sys.A.adjoint() + sys.B * sys.B.adjoint()));
  rep.coupling_residual = max_abs(ComplexMatrix(sys.B + sys.C.adjoint()));
  rep.ok = rep.dynamics_residual <= tol && rep.coupling_residual <= tol;
  return rep;
}

RealizabilityReport check_realizability(const RealQLSystem& sys, double tol) {
  RealizabilityReport rep;
  rep.dynamics_residual = max_abs(
      RealMatrix(sys.A + sharp_adjoint(sys.A) + sys.B * sharp_adjoint(sys.B)));
  rep.coupling_residual = max_abs(RealMatrix(sys.B + sharp_adjoint(sys.C)));
  rep.ok = rep.dynamics_residual <= tol && rep.coupling_residual <= tol;
  return rep;
}

ComplexMatrix transfer_function(const ComplexMatrix& a, const ComplexMatrix& b,
                                const ComplexMatrix& c, const ComplexMatrix& d,
                                Complex s, double eig_tol) {
  Eigen::ComplexEigenSolver<ComplexMatrix> es(a, /*computeEigenvectors=*/false);
  Complex nearest{0.0, 0.0};
  double dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double di = std::abs(s - es.eigenvalues()(i));
    if (di < dist) {
      dist = di;
      nearest = es.eigenvalues()(i);
    }
  }
  if (dist <= eig_tol) {
    std::ostringstream os;
    os << "transfer_function: s = (" << s.real() << ", " << s.imag()
       << ") lies within " << eig_tol << " of the pole (" << nearest.real() << ", "
       << nearest.imag() << ")";
    throw PoleProximityError(os.str(), nearest);
  }
  const ComplexMatrix shifted = s * ComplexMatrix::Identity(a.rows(), a.cols()) - a;
  return d + c * shifted.partialPivLu().solve(b);
}

ComplexMatrix transfer_function(const QLSystem& sys, Complex s, double eig_tol) {
  return transfer_function(sys.A, sys.B, sys.C,
                           ComplexMatrix::Identity(2 * sys.m, 2 * sys.m), s, eig_tol);
}

ComplexMatrix transfer_function(const PassiveQLSystem& sys, Complex s, double eig_tol) {
  return transfer_function(sys.A, sys.B, sys.C, ComplexMatrix::Identity(sys.m, sys.m),
                           s, eig_tol);
}

ComplexMatrix transfer_function(const RealQLSystem& sys, Complex s, double eig_tol) {
  return transfer_function(sys.A.cast<Complex>(), sys.B.cast<Complex>(),
                           sys.C.cast<Complex>(),
                           ComplexMatrix::Identity(2 * sys.m, 2 * sys.m), s, eig_tol);
}

}  // namespace qk
