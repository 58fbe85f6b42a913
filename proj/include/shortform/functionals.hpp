#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "shortform/forms.hpp"
#include "shortform/linalg.hpp"

namespace shortform {

/// Finite-dimensional complex *-algebra, given by structure constants
/// (e_i e_j = sum_k c[i][j][k] e_k) and an involution matrix
/// ((e_i)^* = sum_k s[i][k] e_k, extended antilinearly). Neither a unit nor
/// commutativity is assumed. Construction checks associativity, that the
/// involution is involutive, and the anti-homomorphism law (ab)^* = b^* a^*.
class StarAlgebra {
 public:
  StarAlgebra(std::vector<Matrix> left_multipliers, Matrix involution)
      : left_(std::move(left_multipliers)), involution_(std::move(involution)) {
    const int d = static_cast<int>(left_.size());
    require(d >= 1 && d <= 16, ErrorKind::InvalidArgument,
            "algebra dimension must lie in [1, 16]");
    require(involution_.rows() == d && involution_.cols() == d, ErrorKind::DimensionMismatch,
            "involution matrix must be d x d");
    for (const Matrix& l : left_)
      require(l.rows() == d && l.cols() == d, ErrorKind::DimensionMismatch,
              "structure tensor must be d x d x d");
    validate();
  }

  int dim() const { return static_cast<int>(left_.size()); }

  /// c[i][j][k] as the matrix L_i with L_i(k, j) = c[i][j][k].
  const Matrix& left_multiplier(int i) const { return left_[static_cast<std::size_t>(i)]; }
  const Matrix& involution() const { return involution_; }

  Vector multiply(const Vector& x, const Vector& y) const {
    require(x.size() == dim() && y.size() == dim(), ErrorKind::DimensionMismatch,
            "algebra product needs coefficient vectors of length d");
    Vector out = Vector::Zero(dim());
    for (int i = 0; i < dim(); ++i)
      if (x(i) != Complex(0, 0)) out += x(i) * (left_[static_cast<std::size_t>(i)] * y);
    return out;
  }

  Vector star(const Vector& x) const {
    require(x.size() == dim(), ErrorKind::DimensionMismatch,
            "involution needs a coefficient vector of length d");
    return involution_.transpose() * x.conjugate();
  }

  Vector basis(int i) const { return Vector::Unit(dim(), i); }

  bool operator==(const StarAlgebra& other) const {
    if (dim() != other.dim()) return false;
    if (involution_ != other.involution_) return false;
    for (int i = 0; i < dim(); ++i)
      if (left_[static_cast<std::size_t>(i)] != other.left_[static_cast<std::size_t>(i)])
        return false;
    return true;
  }

  /// Commutative algebra C^d with coordinatewise product and conjugation.
  static StarAlgebra diagonal(int d) {
    std::vector<Matrix> left;
    left.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      Matrix l = Matrix::Zero(d, d);
      l(i, i) = 1.0;
      left.push_back(std::move(l));
    }
    return StarAlgebra(std::move(left), Matrix::Identity(d, d));
  }

  /// Full matrix algebra M_k(C) in the matrix-unit basis e_{ij} -> i*k + j.
  static StarAlgebra matrix_units(int k) {
    const int d = k * k;
    std::vector<Matrix> left(static_cast<std::size_t>(d), Matrix::Zero(d, d));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        for (int m = 0; m < k; ++m)
          left[static_cast<std::size_t>(i * k + j)](i * k + m, j * k + m) = 1.0;
    Matrix inv = Matrix::Zero(d, d);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) inv(i * k + j, j * k + i) = 1.0;
    return StarAlgebra(std::move(left), std::move(inv));
  }

  /// Group algebra of Z/nZ: g_i g_j = g_{i+j mod n}, (g_i)^* = g_{-i mod n}.
  static StarAlgebra cyclic_group(int n) {
    std::vector<Matrix> left(static_cast<std::size_t>(n), Matrix::Zero(n, n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) left[static_cast<std::size_t>(i)]((i + j) % n, j) = 1.0;
    Matrix inv = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) inv(i, (n - i) % n) = 1.0;
    return StarAlgebra(std::move(left), std::move(inv));
  }

 private:
  void validate() const {
    const int d = dim();
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const Vector ij = multiply(basis(i), basis(j));
        for (int k = 0; k < d; ++k) {
          const Vector lhs = multiply(ij, basis(k));
          const Vector rhs = multiply(basis(i), multiply(basis(j), basis(k)));
          require((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10, ErrorKind::PreconditionViolated,
                  "structure constants are not associative at basis triple (" +
                      std::to_string(i) + ", " + std::to_string(j) + ", " + std::to_string(k) +
                      ")");
        }
        const Vector anti = algebra_star_of(multiply(basis(i), basis(j)));
        const Vector swapped = multiply(algebra_star_of(basis(j)), algebra_star_of(basis(i)));
        require((anti - swapped).cwiseAbs().maxCoeff() <= 1e-10, ErrorKind::PreconditionViolated,
                "involution is not an anti-homomorphism at basis pair (" + std::to_string(i) +
                    ", " + std::to_string(j) + ")");
      }
    }
    const Matrix twice = involution_.conjugate() * involution_;
    require(max_abs(twice - Matrix::Identity(d, d)) <= 1e-10, ErrorKind::PreconditionViolated,
            "involution applied twice is not the identity");
  }

  Vector algebra_star_of(const Vector& x) const { return involution_.transpose() * x.conjugate(); }

  std::vector<Matrix> left_;
  Matrix involution_;
};

using StarAlgebraPtr = std::shared_ptr<const StarAlgebra>;

class Functional;
PsdForm induced_gram(const Functional& f, const Tolerance& tol);

/// Positive linear functional on a *-algebra, stored as f(e_i) = coeffs[i].
/// Construction validates positivity: the Gram of (a, b) -> f(a^* b) must be
/// Hermitian PSD. `gate_scale` carries the noise scale of the computation a
/// functional came from (decomposition parts can be legitimate zeros plus
/// rounding); user-made functionals leave it at 0.
class Functional {
 public:
  Functional(StarAlgebraPtr algebra, Vector coeffs, const Tolerance& tol = {},
             double gate_scale = 0.0)
      : algebra_(std::move(algebra)), coeffs_(std::move(coeffs)), gate_scale_(gate_scale) {
    require(algebra_ != nullptr, ErrorKind::InvalidArgument, "functional needs an algebra");
    require(coeffs_.size() == algebra_->dim(), ErrorKind::DimensionMismatch,
            "functional needs one coefficient per basis element");
    induced_gram(*this, tol);  // positivity gate
  }

  const StarAlgebra& algebra() const { return *algebra_; }
  const StarAlgebraPtr& algebra_ptr() const { return algebra_; }
  const Vector& coeffs() const { return coeffs_; }
  double gate_scale() const { return gate_scale_; }

  Complex operator()(const Vector& element) const {
    require(element.size() == algebra_->dim(), ErrorKind::DimensionMismatch,
            "functional evaluated on a vector of wrong length");
    return (coeffs_.array() * element.array()).sum();
  }

 private:
  StarAlgebraPtr algebra_;
  Vector coeffs_;
  double gate_scale_ = 0.0;
};

/// Gram matrix of the induced form t_f(a, b) = f(b^* a), arranged so that
/// quadratic(induced_gram(f), x) = f(x^* x).
inline PsdForm induced_gram(const Functional& f, const Tolerance& tol = {}) {
  const StarAlgebra& alg = f.algebra();
  const int d = alg.dim();
  Matrix gram(d, d);
  for (int i = 0; i < d; ++i) {
    const Vector starred = alg.star(alg.basis(i));
    for (int j = 0; j < d; ++j) gram(i, j) = f(alg.multiply(starred, alg.basis(j)));
  }
  const double asym = max_abs(gram - gram.adjoint());
  require(asym <= 1e-10 * (1.0 + max_abs(gram)), ErrorKind::NotPsd,
          "functional is not positive: induced Gram is not Hermitian");
  try {
    return PsdForm::from_computation(HermitianMatrix(0.5 * (gram + gram.adjoint().eval())), tol,
                                     f.gate_scale());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NotPsd)
      fail(ErrorKind::NotPsd, "functional is not positive: induced Gram has a negative eigenvalue");
    throw;
  }
}

/// Output of the GNS construction over the quotient by N_f = {a : f(a*a)=0}.
/// Quotient coordinates are eigen-coordinates of the Gram restricted to its
/// range; they are not orthonormal, the inner product is carried by `metric`
/// ((x|y)_f = y^* metric x, numerically diagonal).
struct GnsData {
  int quotient_dim = 0;
  Matrix quotient_map;      ///< r x d, a -> coordinates of a + N_f
  std::vector<Matrix> pi;   ///< r x r left-multiplication representatives per basis element
  Vector xi;                ///< cyclic vector: Riesz representative of a + N_f -> f(a)
  Matrix metric;            ///< r x r inner-product matrix of the quotient coordinates

  Matrix represent(const Vector& element) const {
    Matrix out = Matrix::Zero(quotient_dim, quotient_dim);
    for (int i = 0; i < static_cast<int>(pi.size()); ++i)
      out += element(i) * pi[static_cast<std::size_t>(i)];
    return out;
  }
};

/// Classical GNS construction for a positive functional on a
/// finite-dimensional *-algebra. The cyclic vector solves the Riesz system
/// (a + N_f | xi)_f = f(a); an inconsistent system means f is positive but
/// not representable and raises NotRepresentable.
inline GnsData gns(const Functional& f, const Tolerance& tol = {}) {
  const StarAlgebra& alg = f.algebra();
  const int d = alg.dim();
  const PsdForm gram = induced_gram(f, tol);
  const auto eig = detail::psd_eigen(gram.gram(), tol, "gns", f.gate_scale());

  // a quotient direction whose weight is noise next to the parent scale is a zero
  const detail::LReal cut =
      std::max(eig.cut, static_cast<detail::LReal>(tol.rank_rtol() * f.gate_scale()));
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > cut) kept.push_back(i);
  const int r = static_cast<int>(kept.size());

  detail::LMatrix v_kept(d, r);
  detail::LRealVector lambda(r);
  for (int c = 0; c < r; ++c) {
    v_kept.col(c) = eig.vectors.col(kept[static_cast<std::size_t>(c)]);
    detail::canonicalize_phase(v_kept.col(c));
    lambda(c) = eig.values(kept[static_cast<std::size_t>(c)]);
  }

  GnsData data;
  data.quotient_dim = r;
  data.quotient_map = detail::narrow(v_kept.adjoint());
  data.metric = Matrix::Zero(r, r);
  for (int c = 0; c < r; ++c) data.metric(c, c) = static_cast<double>(lambda(c));

  data.pi.reserve(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const detail::LMatrix li = detail::widen(alg.left_multiplier(i));
    data.pi.push_back(detail::narrow(v_kept.adjoint() * li * v_kept));
  }

  // Riesz system V diag(lambda) xi = conj(coeffs); the least-squares solution
  // is exact precisely when conj(coeffs) lies in ran(Gram).
  const detail::LMatrix cbar = detail::widen(f.coeffs().conjugate());
  detail::LMatrix xi(r, 1);
  for (int c = 0; c < r; ++c)
    xi(c, 0) = (v_kept.col(c).adjoint() * cbar)(0, 0) / lambda(c);
  const double riesz_gap = detail::narrow(v_kept * lambda.asDiagonal() * xi - cbar).norm();
  const double coeff_scale = f.coeffs().size() == 0 ? 0.0 : f.coeffs().cwiseAbs().maxCoeff();
  require(riesz_gap <= tol.residual_atol() * (1.0 + coeff_scale), ErrorKind::NotRepresentable,
          "functional is not representable: Riesz system residual " + std::to_string(riesz_gap));
  data.xi = detail::narrow(xi).col(0);

  // pi(a) xi must reproduce the class of a; this pins reconstruction
  // (pi(a) xi | xi)_f = f(a) and cyclicity at once.
  double class_gap = 0.0;
  for (int i = 0; i < d && r > 0; ++i) {
    const Vector lhs = data.pi[static_cast<std::size_t>(i)] * data.xi;
    const Vector rhs = data.quotient_map * alg.basis(i);
    class_gap = std::max(class_gap, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  require(class_gap <= 1e-9 * (1.0 + coeff_scale + max_abs(data.metric)),
          ErrorKind::InternalInconsistency,
          "gns: representation does not reproduce quotient classes (gap " +
              std::to_string(class_gap) + ")");
  return data;
}

struct FunctionalDecomposition {
  Functional f_ll;    ///< g-absolutely continuous part
  Functional f_perp;  ///< g-singular part
};

/// Short-type decomposition of a representable positive functional f with
/// respect to a positive g (only the Gram of g enters). P projects, in the
/// f-inner product, onto the classes of the null space of g's Gram;
///   f_ll(a)   = (pi(a)(I-P)xi | (I-P)xi)_f,
///   f_perp(a) = (pi(a) P xi   | P xi)_f.
inline FunctionalDecomposition functional_decompose(const Functional& f, const Functional& g,
                                                    const Tolerance& tol = {}) {
  require(f.algebra() == g.algebra(), ErrorKind::AlgebraMismatch,
          "functional_decompose: functionals live on different algebras");
  const StarAlgebra& alg = f.algebra();
  const int d = alg.dim();
  const GnsData data = gns(f, tol);
  const Subspace g_kernel = null_basis(induced_gram(g, tol).gram(), tol);

  // Orthonormal frame of the quotient: conjugate by metric^{1/2} so the
  // projection is a plain orthogonal projection there.
  const int r = data.quotient_dim;
  detail::LRealVector root(r);
  for (int c = 0; c < r; ++c)
    root(c) = std::sqrt(static_cast<detail::LReal>(data.metric(c, c).real()));
  const detail::LMatrix q = detail::widen(data.quotient_map);
  detail::LMatrix image = root.asDiagonal() * (q * detail::widen(g_kernel.basis()));
  detail::LMatrix projector = detail::LMatrix::Zero(r, r);
  if (image.cols() > 0 && r > 0) {
    Eigen::JacobiSVD<detail::LMatrix> svd(image, Eigen::ComputeThinU);
    const int rank = detail::rank_from_singular_values(svd.singularValues(), tol.rank_rtol());
    const detail::LMatrix u = svd.matrixU().leftCols(rank);
    projector = u * u.adjoint();
  }

  const detail::LMatrix xi_frame = root.asDiagonal() * detail::widen(data.xi);
  const detail::LMatrix xi_sing = projector * xi_frame;
  const detail::LMatrix xi_reg = xi_frame - xi_sing;

  Vector ll_coeffs(d), perp_coeffs(d);
  for (int i = 0; i < d; ++i) {
    detail::LMatrix pi_frame = root.asDiagonal() * detail::widen(data.pi[static_cast<std::size_t>(i)]);
    for (int c = 0; c < r; ++c) pi_frame.col(c) /= root(c);
    ll_coeffs(i) = static_cast<Complex>((xi_reg.adjoint() * pi_frame * xi_reg)(0, 0));
    perp_coeffs(i) = static_cast<Complex>((xi_sing.adjoint() * pi_frame * xi_sing)(0, 0));
  }

  const double coeff_scale = d == 0 ? 0.0 : f.coeffs().cwiseAbs().maxCoeff();
  const double sum_gap = (ll_coeffs + perp_coeffs - f.coeffs()).cwiseAbs().maxCoeff();
  require(sum_gap <= tol.residual_atol() * (1.0 + coeff_scale), ErrorKind::InternalInconsistency,
          "functional_decompose: parts do not sum back to f (gap " + std::to_string(sum_gap) +
              ")");
  const double parent_scale =
      std::max(f.gate_scale(), r > 0 ? data.metric(r - 1, r - 1).real() : 0.0);
  return FunctionalDecomposition{
      Functional(f.algebra_ptr(), std::move(ll_coeffs), tol, parent_scale),
      Functional(f.algebra_ptr(), std::move(perp_coeffs), tol, parent_scale)};
}

}  // namespace shortform
