#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "shortform/errors.hpp"

namespace shortform {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Numerical knobs shared by every operation. `rank_rtol` decides which
/// eigenvalues count as zero, relative to the largest eigenvalue of the
/// matrix at hand; `residual_atol` bounds acceptable residuals of matrix
/// identities, relative to 1 + the norm of the operands.
class Tolerance {
 public:
  Tolerance() = default;
  Tolerance(double rank_rtol, double residual_atol)
      : rank_rtol_(rank_rtol), residual_atol_(residual_atol) {
    require(rank_rtol_ > 0.0 && residual_atol_ > 0.0, ErrorKind::InvalidArgument,
            "tolerances must be strictly positive");
  }

  double rank_rtol() const { return rank_rtol_; }
  double residual_atol() const { return residual_atol_; }

 private:
  double rank_rtol_ = 1e-10;
  double residual_atol_ = 1e-9;
};

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Dense Hermitian matrix. Construction rejects inputs whose asymmetry
/// exceeds 1e-12*(1+max|entry|) and stores the symmetrized (M+M*)/2.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(Matrix entries) {
    require(entries.rows() == entries.cols(), ErrorKind::DimensionMismatch,
            "matrix must be square");
    require(entries.rows() >= 1, ErrorKind::InvalidArgument,
            "matrix dimension must be positive");
    const double asym = max_abs(entries - entries.adjoint());
    const double atol_sym = 1e-12 * (1.0 + max_abs(entries));
    require(asym <= atol_sym, ErrorKind::NotHermitian,
            "input not Hermitian: max asymmetry " + std::to_string(asym));
    mat_ = 0.5 * (entries + entries.adjoint().eval());
  }

  static HermitianMatrix zero(int n) { return HermitianMatrix(Matrix::Zero(n, n)); }
  static HermitianMatrix identity(int n) { return HermitianMatrix(Matrix::Identity(n, n)); }

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Matrix& mat() const { return mat_; }
  double frobenius() const { return mat_.norm(); }
  double max_abs_entry() const { return max_abs(mat_); }

 private:
  Matrix mat_;
};

/// Linear subspace of C^n given by an orthonormal column basis (k may be 0).
class Subspace {
 public:
  Subspace(int ambient_dim, Matrix basis) : ambient_(ambient_dim), basis_(std::move(basis)) {
    require(ambient_ >= 1, ErrorKind::InvalidArgument, "ambient dimension must be positive");
    require(basis_.rows() == ambient_ && basis_.cols() <= ambient_,
            ErrorKind::DimensionMismatch, "subspace basis has wrong shape");
    const int k = static_cast<int>(basis_.cols());
    if (k > 0) {
      const double gap = max_abs(basis_.adjoint() * basis_ - Matrix::Identity(k, k));
      require(gap <= 1e-12, ErrorKind::PreconditionViolated,
              "subspace basis columns are not orthonormal (gap " + std::to_string(gap) + ")");
    }
  }

  static Subspace zero(int ambient) { return Subspace(ambient, Matrix(ambient, 0)); }
  static Subspace full(int ambient) { return Subspace(ambient, Matrix::Identity(ambient, ambient)); }

  int ambient_dim() const { return ambient_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Matrix& basis() const { return basis_; }

 private:
  int ambient_;
  Matrix basis_;
};

namespace detail {

// Eigendecompositions run in 80-bit precision and round the results back
// to double; rank decisions near the cutoff stay stable under the
// ill-conditioned compressions taken downstream.
using LReal = long double;
using LComplex = std::complex<long double>;
using LMatrix = Eigen::Matrix<LComplex, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<LComplex, Eigen::Dynamic, 1>;
using LRealVector = Eigen::Matrix<LReal, Eigen::Dynamic, 1>;

inline LMatrix widen(const Matrix& m) { return m.cast<LComplex>(); }
inline Matrix narrow(const LMatrix& m) { return m.cast<Complex>(); }

struct HermitianEigen {
  LRealVector values;  // ascending
  LMatrix vectors;
  LReal lambda_max = 0;  // max(largest eigenvalue, 0)
  LReal cut = 0;         // rank_rtol * lambda_max
};

/// Ascending eigensystem of a Hermitian matrix plus the rank cutoff.
/// Raises NotPsd when an eigenvalue falls below -rank_rtol*lambda_max.
/// `gate_scale` widens the gate (not the rank cutoff) for matrices produced
/// by intermediate arithmetic, whose rounding noise scales with the source
/// operands rather than with the block itself.
inline HermitianEigen psd_eigen(const LMatrix& m, const Tolerance& tol, const char* who,
                                double gate_scale = 0.0) {
  HermitianEigen out;
  if (m.rows() == 0) {
    out.values = LRealVector(0);
    out.vectors = LMatrix(0, 0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<LMatrix> solver(0.5 * (m + m.adjoint().eval()));
  require(solver.info() == Eigen::Success, ErrorKind::InternalInconsistency,
          std::string(who) + ": eigendecomposition failed");
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  out.lambda_max = std::max<LReal>(out.values(out.values.size() - 1), 0.0L);
  out.cut = static_cast<LReal>(tol.rank_rtol()) * out.lambda_max;
  const LReal gate = static_cast<LReal>(tol.rank_rtol()) *
                     std::max(out.lambda_max, static_cast<LReal>(gate_scale));
  const LReal lambda_min = out.values(0);
  if (lambda_min < -gate) {
    fail(ErrorKind::NotPsd, std::string(who) + ": eigenvalue " +
                                std::to_string(static_cast<double>(lambda_min)) +
                                " below PSD tolerance");
  }
  return out;
}

inline HermitianEigen psd_eigen(const HermitianMatrix& m, const Tolerance& tol, const char* who,
                                double gate_scale = 0.0) {
  return psd_eigen(widen(m.mat()), tol, who, gate_scale);
}

/// Rotates v so its first coordinate with |v_i| > 1e-12*max|v| is real
/// and positive; fixes the phase ambiguity of eigenvectors.
inline void canonicalize_phase(Eigen::Ref<LVector> column) {
  const LReal peak = column.cwiseAbs().maxCoeff();
  if (peak <= 0) return;
  for (Eigen::Index i = 0; i < column.size(); ++i) {
    const LReal mag = std::abs(column(i));
    if (mag > 1e-12L * peak) {
      column *= std::conj(column(i)) / mag;
      column(i) = LComplex(std::abs(column(i)), 0.0L);
      return;
    }
  }
}

inline int rank_from_singular_values(const LRealVector& sigma, double rtol) {
  if (sigma.size() == 0) return 0;
  const LReal sigma_max = sigma.maxCoeff();
  if (sigma_max <= 0) return 0;
  const LReal cut = static_cast<LReal>(rtol) * sigma_max;
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cut) ++rank;
  return rank;
}

/// Columns v_i*sqrt(lambda_i) over the eigenvalues above the rank cutoff,
/// ascending; J*J^* reconstructs the matrix restricted to its numerical range.
/// `shared_cut` (when positive) overrides the matrix-local cutoff so paired
/// matrices can be truncated on a common scale.
inline LMatrix truncated_root_factor(const HermitianEigen& eig, LReal shared_cut = -1.0L) {
  const Eigen::Index n = eig.vectors.rows();
  const LReal cut = shared_cut >= 0.0L ? shared_cut : eig.cut;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > cut) kept.push_back(i);
  LMatrix j(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    j.col(static_cast<Eigen::Index>(c)) =
        eig.vectors.col(kept[c]) * std::sqrt(eig.values(kept[c]));
    canonicalize_phase(j.col(static_cast<Eigen::Index>(c)));
  }
  return j;
}

inline HermitianMatrix hermitian_from_ld(const LMatrix& m) {
  return HermitianMatrix(narrow(0.5 * (m + m.adjoint().eval())));
}

}  // namespace detail

inline void check_same_dim(const HermitianMatrix& a, const HermitianMatrix& b, const char* who) {
  require(a.dim() == b.dim(), ErrorKind::DimensionMismatch,
          std::string(who) + ": operands have dimensions " + std::to_string(a.dim()) +
              " and " + std::to_string(b.dim()));
}

/// Moore-Penrose pseudo-inverse of a Hermitian PSD matrix; eigenvalues at or
/// below rank_rtol*lambda_max are treated as exact zeros.
inline HermitianMatrix pinv(const HermitianMatrix& m, const Tolerance& tol = {}) {
  const auto eig = detail::psd_eigen(m, tol, "pinv");
  detail::LRealVector inv(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i)
    inv(i) = eig.values(i) > eig.cut ? 1.0L / eig.values(i) : 0.0L;
  return detail::hermitian_from_ld(eig.vectors * inv.asDiagonal() * eig.vectors.adjoint());
}

/// Hermitian PSD square root; eigenvalues in [-rank_rtol*lambda_max, 0) are
/// clipped to zero before the root.
inline HermitianMatrix psd_sqrt(const HermitianMatrix& a, const Tolerance& tol = {}) {
  const auto eig = detail::psd_eigen(a, tol, "psd_sqrt");
  detail::LRealVector root(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i)
    root(i) = eig.values(i) > 0.0L ? std::sqrt(eig.values(i)) : 0.0L;
  return detail::hermitian_from_ld(eig.vectors * root.asDiagonal() * eig.vectors.adjoint());
}

/// Orthonormal basis of the kernel: eigenvectors with eigenvalue at or below
/// rank_rtol*lambda_max, ordered by ascending eigenvalue (lexicographic
/// tie-break) with the first significant coordinate made real positive.
inline Subspace null_basis(const HermitianMatrix& a, const Tolerance& tol = {}) {
  const auto eig = detail::psd_eigen(a, tol, "null_basis");
  const int n = a.dim();
  std::vector<std::pair<double, Vector>> kernel;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values(i) <= eig.cut) {
      detail::LMatrix column = eig.vectors.col(i);
      detail::canonicalize_phase(column.col(0));
      kernel.emplace_back(static_cast<double>(eig.values(i)), detail::narrow(column).col(0));
    }
  }
  std::stable_sort(kernel.begin(), kernel.end(), [](const auto& lhs, const auto& rhs) {
    if (lhs.first != rhs.first) return lhs.first < rhs.first;
    for (Eigen::Index i = 0; i < lhs.second.size(); ++i) {
      const Complex l = lhs.second(i), r = rhs.second(i);
      if (l.real() != r.real()) return l.real() < r.real();
      if (l.imag() != r.imag()) return l.imag() < r.imag();
    }
    return false;
  });
  Matrix basis(n, static_cast<Eigen::Index>(kernel.size()));
  for (std::size_t c = 0; c < kernel.size(); ++c) basis.col(static_cast<Eigen::Index>(c)) = kernel[c].second;
  return Subspace(n, std::move(basis));
}

/// Orthogonal projection basis*basis^* onto the subspace.
inline HermitianMatrix orth_project(const Subspace& s) {
  return HermitianMatrix(s.basis() * s.basis().adjoint());
}

/// True iff ran A^{1/2} and ran B^{1/2} meet only in 0, decided through the
/// rank identity rank[A^{1/2}|B^{1/2}] = rank A^{1/2} + rank B^{1/2} on the
/// truncated root factors. Both roots are truncated on the pair's shared
/// eigenvalue scale, so a summand that is rounding noise next to its partner
/// contributes no rank.
inline bool range_intersection_trivial(const HermitianMatrix& a, const HermitianMatrix& b,
                                       const Tolerance& tol = {}) {
  check_same_dim(a, b, "range_intersection_trivial");
  const auto eig_a = detail::psd_eigen(a, tol, "range_intersection_trivial");
  const auto eig_b = detail::psd_eigen(b, tol, "range_intersection_trivial");
  const detail::LReal shared_cut = static_cast<detail::LReal>(tol.rank_rtol()) *
                                   std::max(eig_a.lambda_max, eig_b.lambda_max);
  const auto ja = detail::truncated_root_factor(eig_a, shared_cut);
  const auto jb = detail::truncated_root_factor(eig_b, shared_cut);
  const int ra = static_cast<int>(ja.cols());
  const int rb = static_cast<int>(jb.cols());
  if (ra + rb == 0) return true;
  detail::LMatrix joint(a.dim(), ra + rb);
  joint.leftCols(ra) = ja;
  joint.rightCols(rb) = jb;
  Eigen::JacobiSVD<detail::LMatrix> svd(joint);
  const int joint_rank = detail::rank_from_singular_values(svd.singularValues(), tol.rank_rtol());
  return joint_rank == ra + rb;
}

}  // namespace shortform
