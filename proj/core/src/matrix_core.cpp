#include "qkalman/matrix_core.hpp"

#include <cmath>
#include <sstream>

namespace qk {

namespace {

constexpr Complex kI{0.0, 1.0};

std::string shape_of(Eigen::Index rows, Eigen::Index cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

}  // namespace

ComplexMatrix j_diag(Eigen::Index k) {
  ComplexMatrix j = ComplexMatrix::Zero(2 * k, 2 * k);
  j.topLeftCorner(k, k).setIdentity();
  j.bottomRightCorner(k, k) = -ComplexMatrix::Identity(k, k);
  return j;
}

ComplexMatrix j_sym(Eigen::Index k) {
  ComplexMatrix j = ComplexMatrix::Zero(2 * k, 2 * k);
  j.topRightCorner(k, k).setIdentity();
  j.bottomLeftCorner(k, k) = -ComplexMatrix::Identity(k, k);
  return j;
}

RealMatrix j_sym_real(Eigen::Index k) {
  RealMatrix j = RealMatrix::Zero(2 * k, 2 * k);
  j.topRightCorner(k, k).setIdentity();
  j.bottomLeftCorner(k, k) = -RealMatrix::Identity(k, k);
  return j;
}

ComplexMatrix v_matrix(Eigen::Index k) {
  const double s = 1.0 / std::sqrt(2.0);
  ComplexMatrix v = ComplexMatrix::Zero(2 * k, 2 * k);
  v.topLeftCorner(k, k) = s * ComplexMatrix::Identity(k, k);
  v.topRightCorner(k, k) = s * ComplexMatrix::Identity(k, k);
  v.bottomLeftCorner(k, k) = -kI * s * ComplexMatrix::Identity(k, k);
  v.bottomRightCorner(k, k) = kI * s * ComplexMatrix::Identity(k, k);
  return v;
}

ComplexMatrix flat_adjoint(const ComplexMatrix& x) {
  if (x.rows() % 2 != 0 || x.cols() % 2 != 0) {
    throw ValidationError("flat_adjoint: matrix must have even dimensions, got " +
                          shape_of(x.rows(), x.cols()));
  }
  const Eigen::Index m = x.rows() / 2;
  const Eigen::Index n = x.cols() / 2;
  return j_diag(n) * x.adjoint() * j_diag(m);
}

RealMatrix sharp_adjoint(const RealMatrix& x) {
  if (x.rows() % 2 != 0 || x.cols() % 2 != 0) {
    throw ValidationError("sharp_adjoint: matrix must have even dimensions, got " +
                          shape_of(x.rows(), x.cols()));
  }
  const Eigen::Index m = x.rows() / 2;
  const Eigen::Index n = x.cols() / 2;
  return -j_sym_real(n) * x.transpose() * j_sym_real(m);
}

DoubledUpMatrix::DoubledUpMatrix(ComplexMatrix u, ComplexMatrix v)
    : k(u.rows()), r(u.cols()), U(std::move(u)), V(std::move(v)) {
  if (U.rows() != V.rows() || U.cols() != V.cols()) {
    throw ValidationError("DoubledUpMatrix: U is " + shape_of(U.rows(), U.cols()) +
                          " but V is " + shape_of(V.rows(), V.cols()));
  }
}

ComplexMatrix DoubledUpMatrix::full() const {
  ComplexMatrix f(2 * k, 2 * r);
  f.topLeftCorner(k, r) = U;
  f.topRightCorner(k, r) = V;
  f.bottomLeftCorner(k, r) = V.conjugate();
  f.bottomRightCorner(k, r) = U.conjugate();
  return f;
}

DoubledUpMatrix DoubledUpMatrix::operator+(const DoubledUpMatrix& rhs) const {
  if (k != rhs.k || r != rhs.r) {
    throw ValidationError("DoubledUpMatrix: incompatible block sizes in sum");
  }
  return DoubledUpMatrix(U + rhs.U, V + rhs.V);
}

DoubledUpMatrix DoubledUpMatrix::operator-(const DoubledUpMatrix& rhs) const {
  if (k != rhs.k || r != rhs.r) {
    throw ValidationError("DoubledUpMatrix: incompatible block sizes in difference");
  }
  return DoubledUpMatrix(U - rhs.U, V - rhs.V);
}

DoubledUpMatrix DoubledUpMatrix::operator*(const DoubledUpMatrix& rhs) const {
  if (r != rhs.k) {
    throw ValidationError("DoubledUpMatrix: incompatible block sizes in product");
  }
  // [[U1,V1],[V1#,U1#]] [[U2,V2],[V2#,U2#]] keeps the doubled-up shape:
  return DoubledUpMatrix(U * rhs.U + V * rhs.V.conjugate(),
                         U * rhs.V + V * rhs.U.conjugate());
}

DoubledUpMatrix DoubledUpMatrix::flat() const {
  // Delta(U, V)^flat = Delta(U^dag, -V^T).
  return DoubledUpMatrix(U.adjoint(), -V.transpose());
}

DoubledUpMatrix DoubledUpMatrix::identity(Eigen::Index k) {
  return DoubledUpMatrix(ComplexMatrix::Identity(k, k), ComplexMatrix::Zero(k, k));
}

DoubledUpMatrix doubled_up_from_full(const ComplexMatrix& full, double tol) {
  if (full.rows() % 2 != 0 || full.cols() % 2 != 0) {
    throw ValidationError("doubled_up_from_full: matrix must have even dimensions, got " +
                          shape_of(full.rows(), full.cols()));
  }
  const Eigen::Index k = full.rows() / 2;
  const Eigen::Index r = full.cols() / 2;
  const ComplexMatrix u = full.topLeftCorner(k, r);
  const ComplexMatrix v = full.topRightCorner(k, r);
  const double res =
      std::max(max_abs(full.bottomLeftCorner(k, r) - v.conjugate()),
               max_abs(full.bottomRightCorner(k, r) - u.conjugate()));
  if (res > tol) {
    std::ostringstream os;
    os << "doubled_up_from_full: lower blocks deviate from the conjugate "
          "pattern by "
       << res << " (tol " << tol << ")";
    throw StructureError(os.str());
  }
  return DoubledUpMatrix(u, v);
}

bool is_doubled_up(const ComplexMatrix& x, double tol) {
  if (x.rows() % 2 != 0 || x.cols() % 2 != 0) return false;
  const Eigen::Index k = x.rows() / 2;
  const Eigen::Index r = x.cols() / 2;
  const double res =
      std::max(max_abs(x.bottomLeftCorner(k, r) - x.topRightCorner(k, r).conjugate()),
               max_abs(x.bottomRightCorner(k, r) - x.topLeftCorner(k, r).conjugate()));
  return res <= tol;
}

bool is_bogoliubov(const ComplexMatrix& t, double tol) {
  if (t.rows() != t.cols() || t.rows() % 2 != 0) return false;
  if (!is_doubled_up(t, tol)) return false;
  const ComplexMatrix j = j_diag(t.rows() / 2);
  return max_abs(t * j * t.adjoint() - j) <= tol &&
         max_abs(t.adjoint() * j * t - j) <= tol;
}

bool is_symplectic(const RealMatrix& s, double tol) {
  if (s.rows() != s.cols() || s.rows() % 2 != 0) return false;
  const RealMatrix j = j_sym_real(s.rows() / 2);
  return max_abs(RealMatrix(s * j * s.transpose() - j)) <= tol &&
         max_abs(RealMatrix(s.transpose() * j * s - j)) <= tol;
}

ComplexVector phase_fix(const ComplexVector& z) {
  if (z.size() == 0) return z;
  const double mx = z.cwiseAbs().maxCoeff();
  if (mx == 0.0) {
    throw ValidationError("phase_fix: zero vector has no phase");
  }
  Eigen::Index anchor = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (std::abs(z(i)) >= (1.0 - 1e-9) * mx) anchor = i;
  }
  const Complex ph = std::conj(z(anchor)) / std::abs(z(anchor));
  return ph * z;
}

}  // namespace qk
