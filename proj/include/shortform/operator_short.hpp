#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "shortform/forms.hpp"
#include "shortform/linalg.hpp"

namespace shortform {

/// Factorization A = J J^* over the induced space of A: the columns of J are
/// sqrt(lambda)-scaled eigenvectors spanning ran A^{1/2}, so J realizes the
/// canonical embedding of the induced space into C^n as an explicit matrix.
class InducedSpaceFactor {
 public:
  InducedSpaceFactor(HermitianMatrix a, Matrix j, const Tolerance& tol = {})
      : a_(std::move(a)), j_(std::move(j)) {
    require(j_.rows() == a_.dim() && j_.cols() <= a_.dim(), ErrorKind::DimensionMismatch,
            "induced-space factor has wrong shape");
    const double gap = (j_ * j_.adjoint() - a_.mat()).norm();
    require(gap <= tol.residual_atol() * (1.0 + a_.frobenius()), ErrorKind::PreconditionViolated,
            "factor does not reproduce its source: ||JJ* - A|| = " + std::to_string(gap));
  }

  const HermitianMatrix& source() const { return a_; }
  const Matrix& embedding() const { return j_; }
  int rank() const { return static_cast<int>(j_.cols()); }

 private:
  HermitianMatrix a_;
  Matrix j_;
};

/// Builds the factor J with J J^* = A from the strictly positive eigenpairs.
inline InducedSpaceFactor build_factor(const HermitianMatrix& a, const Tolerance& tol = {}) {
  const auto eig = detail::psd_eigen(a, tol, "build_factor");
  return InducedSpaceFactor(a, detail::narrow(detail::truncated_root_factor(eig)), tol);
}

/// Short of A to the subspace M, via the factor-space route: project the
/// factor coordinates of {Am : m in M} out of J and form the Gram product,
///   A_M = J (I - P) J^*.
/// The result vanishes on M; the short whose range lies inside M is
/// obtained by passing the orthogonal complement of M instead.
inline HermitianMatrix krein_short(const HermitianMatrix& a, const Subspace& m,
                                   const Tolerance& tol = {}) {
  require(m.ambient_dim() == a.dim(), ErrorKind::DimensionMismatch,
          "krein_short: subspace ambient dimension " + std::to_string(m.ambient_dim()) +
              " vs operator dimension " + std::to_string(a.dim()));
  const auto eig = detail::psd_eigen(a, tol, "krein_short");
  const detail::LMatrix j = detail::truncated_root_factor(eig);
  if (m.dim() == 0 || j.cols() == 0) return a;
  // Coordinates of A<M> inside the factor space: J^* m spans them.
  const detail::LMatrix image = j.adjoint() * detail::widen(m.basis());
  Eigen::JacobiSVD<detail::LMatrix> svd(image, Eigen::ComputeThinU);
  const int rank = detail::rank_from_singular_values(svd.singularValues(), tol.rank_rtol());
  const detail::LMatrix u = svd.matrixU().leftCols(rank);
  const detail::LMatrix residual = j - (j * u) * u.adjoint();  // J (I - P)
  return detail::hermitian_from_ld(residual * residual.adjoint());
}

/// Quadratic form of the short of A to M at x through the dual formula
///   (Ax|x) - sup{ |(Ax|y)|^2 : y in M, (Ay|y) <= 1 },
/// whose closed form is x^*Ax - (Y^*Ax)^* (Y^*AY)^+ (Y^*Ax).
inline double short_quadratic_sup(const HermitianMatrix& a, const Subspace& m, const Vector& x,
                                  const Tolerance& tol = {}) {
  require(m.ambient_dim() == a.dim(), ErrorKind::DimensionMismatch,
          "short_quadratic_sup: dimension mismatch between operator and subspace");
  require(x.size() == a.dim(), ErrorKind::DimensionMismatch,
          "short_quadratic_sup: vector length " + std::to_string(x.size()) +
              " vs operator dimension " + std::to_string(a.dim()));
  detail::psd_eigen(a, tol, "short_quadratic_sup");  // PSD gate
  const Complex full = x.dot(a.mat() * x);
  double value = full.real();
  if (m.dim() > 0) {
    const detail::LMatrix y = detail::widen(m.basis());
    const detail::LMatrix am = detail::widen(a.mat());
    const detail::LVector ax = am * detail::widen(Matrix(x));
    const detail::LVector compressed_x = y.adjoint() * ax;
    const auto block = detail::psd_eigen((y.adjoint() * am * y).eval(), tol,
                                         "short_quadratic_sup", max_abs(a.mat()));
    detail::LRealVector inv(block.values.size());
    for (Eigen::Index i = 0; i < block.values.size(); ++i)
      inv(i) = block.values(i) > block.cut ? 1.0L / block.values(i) : 0.0L;
    const detail::LComplex sup =
        (compressed_x.adjoint() * block.vectors * inv.asDiagonal() *
         block.vectors.adjoint() * compressed_x)(0, 0);
    value -= static_cast<double>(sup.real());
  }
  const double slack = tol.residual_atol() * (1.0 + std::abs(full.real()));
  require(value >= -slack, ErrorKind::InternalInconsistency,
          "short_quadratic_sup: supremum exceeds the full quadratic form by " +
              std::to_string(-value));
  return std::max(value, 0.0);
}

struct OperatorDecomposition {
  HermitianMatrix a_ll;    ///< B-absolutely continuous part
  HermitianMatrix a_perp;  ///< B-singular part
  bool unique;             ///< a_ll dominated by B (always true in finite dimension)
};

/// Splits A into a B-absolutely-continuous part (the short of A to ker B)
/// and a B-singular remainder, mirroring the form-level decomposition
/// through the operator correspondence.
inline OperatorDecomposition operator_decompose(const HermitianMatrix& a, const HermitianMatrix& b,
                                                const Tolerance& tol = {}) {
  check_same_dim(a, b, "operator_decompose");
  const double scale = max_abs(a.mat());
  HermitianMatrix a_ll = krein_short(a, null_basis(b, tol), tol);
  HermitianMatrix a_perp(a.mat() - a_ll.mat());
  const bool unique = is_dominated(PsdForm::from_computation(a_ll, tol, scale), PsdForm(b, tol),
                                   tol, scale)
                          .has_value();
  return OperatorDecomposition{std::move(a_ll), std::move(a_perp), unique};
}

}  // namespace shortform
