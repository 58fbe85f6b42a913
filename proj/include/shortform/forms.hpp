#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "shortform/linalg.hpp"

namespace shortform {

/// Nonnegative sesquilinear form on C^n, represented by its Hermitian PSD
/// Gram matrix. Construction validates positivity; eigenvalues in
/// [-rank_rtol*scale, 0) count as rounding noise and are clipped to zero,
/// anything more negative raises NotPsd.
class PsdForm {
 public:
  explicit PsdForm(HermitianMatrix gram, const Tolerance& tol = {})
      : PsdForm(std::move(gram), tol, -1.0) {}

  /// Accepts Gram matrices produced by internal formulas whose rounding
  /// noise scales with `scale` rather than with the result itself.
  static PsdForm from_computation(HermitianMatrix gram, const Tolerance& tol, double scale) {
    return PsdForm(std::move(gram), tol, scale);
  }

  static PsdForm zero(int n) { return PsdForm(HermitianMatrix::zero(n)); }

  int dim() const { return gram_.dim(); }
  const HermitianMatrix& gram() const { return gram_; }
  const Matrix& gram_mat() const { return gram_.mat(); }

 private:
  PsdForm(HermitianMatrix gram, const Tolerance& tol, double scale) : gram_(std::move(gram)) {
    auto m = detail::widen(gram_.mat());
    Eigen::SelfAdjointEigenSolver<detail::LMatrix> solver(m);
    require(solver.info() == Eigen::Success, ErrorKind::InternalInconsistency,
            "PsdForm: eigendecomposition failed");
    const detail::LRealVector& values = solver.eigenvalues();
    const detail::LReal lambda_max = std::max<detail::LReal>(values(values.size() - 1), 0.0L);
    const detail::LReal gate =
        static_cast<detail::LReal>(tol.rank_rtol()) *
        std::max(lambda_max, static_cast<detail::LReal>(std::max(scale, 0.0)));
    const detail::LReal lambda_min = values(0);
    if (lambda_min < -gate) {
      fail(ErrorKind::NotPsd, "form Gram matrix has eigenvalue " +
                                  std::to_string(static_cast<double>(lambda_min)));
    }
    if (lambda_min < 0.0L) {
      detail::LRealVector clipped = values.cwiseMax(detail::LRealVector::Zero(values.size()));
      gram_ = detail::hermitian_from_ld(solver.eigenvectors() * clipped.asDiagonal() *
                                        solver.eigenvectors().adjoint());
    }
  }

  HermitianMatrix gram_;
};

/// Quadratic form t[x] = x^* G x. The imaginary part is discarded after
/// checking it is rounding-level.
inline double quadratic(const PsdForm& t, const Vector& x) {
  require(x.size() == t.dim(), ErrorKind::DimensionMismatch,
          "quadratic: vector length " + std::to_string(x.size()) + " vs form dimension " +
              std::to_string(t.dim()));
  const Complex value = x.dot(t.gram_mat() * x);
  require(std::abs(value.imag()) <= 1e-10 * (1.0 + std::abs(value.real())),
          ErrorKind::InternalInconsistency, "quadratic form value has a non-real component");
  return value.real();
}

inline PsdForm scaled(const PsdForm& t, double factor) {
  require(factor >= 0.0, ErrorKind::InvalidArgument, "form scale factor must be nonnegative");
  return PsdForm(HermitianMatrix(t.gram_mat() * factor));
}

/// Short of t to the subspace Y: the largest form below t that vanishes on
/// Y. Computed as the generalized Schur complement
///   T - T Y (Y^* T Y)^+ Y^* T,
/// the closed form of inf_{y in Y} t[x-y].
inline PsdForm short_form(const PsdForm& t, const Subspace& y, const Tolerance& tol = {}) {
  require(y.ambient_dim() == t.dim(), ErrorKind::DimensionMismatch,
          "short_form: subspace ambient dimension " + std::to_string(y.ambient_dim()) +
              " vs form dimension " + std::to_string(t.dim()));
  if (y.dim() == 0) return t;
  const detail::LMatrix tm = detail::widen(t.gram_mat());
  const detail::LMatrix yb = detail::widen(y.basis());
  const detail::LMatrix ty = tm * yb;
  // the compressed block inherits rounding noise on the scale of T, not its own
  const auto compressed =
      detail::psd_eigen((yb.adjoint() * ty).eval(), tol, "short_form", max_abs(t.gram_mat()));
  // X X^* = T Y (Y^* T Y)^+ Y^* T with X = T Y V diag(1/sqrt(mu)); grouping
  // the subtrahend as a Gram product keeps it PSD in floating point.
  detail::LMatrix x(t.dim(), 0);
  {
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < compressed.values.size(); ++i)
      if (compressed.values(i) > compressed.cut) kept.push_back(i);
    x.resize(t.dim(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c)
      x.col(static_cast<Eigen::Index>(c)) =
          ty * compressed.vectors.col(kept[c]) / std::sqrt(compressed.values(kept[c]));
  }
  detail::LMatrix schur = tm - x * x.adjoint();
  // the exact short vanishes on Y; project the rounding residue off
  const detail::LMatrix complement =
      detail::LMatrix::Identity(t.dim(), t.dim()) - yb * yb.adjoint();
  schur = complement * schur * complement;
  const double scale = max_abs(t.gram_mat());
  return PsdForm::from_computation(detail::hermitian_from_ld(schur), tol, scale);
}

namespace detail {

/// T (T+W)^+ W through the eigenbasis of T+W; accurate while the scales of
/// T and W are comparable.
inline LMatrix parallel_sum_direct(const LMatrix& tm, const LMatrix& wm, const Tolerance& tol) {
  const auto sum_eig = psd_eigen((tm + wm).eval(), tol, "parallel_sum");
  LRealVector inv(sum_eig.values.size());
  for (Eigen::Index i = 0; i < sum_eig.values.size(); ++i)
    inv(i) = sum_eig.values(i) > sum_eig.cut ? 1.0L / sum_eig.values(i) : 0.0L;
  const LMatrix pseudo = sum_eig.vectors * inv.asDiagonal() * sum_eig.vectors.adjoint();
  return tm * pseudo * wm;
}

/// T (T+W)^+ W via block elimination in the eigenbasis of W, for the regime
/// where W dominates T (the tail of the D_w t iteration, where T+W cannot be
/// eigendecomposed without drowning the structure of T). With W = diag(0, D)
/// the inner inverse of T+W built from C = Trr + D and the Schur complement
/// S = Tkk - Tkr C^{-1} Tkr^* involves only well-conditioned blocks, at any
/// scale ratio; an inner inverse suffices because both flanking factors act
/// inside ran(T+W).
inline LMatrix parallel_sum_w_dominant(const LMatrix& tm, const HermitianMatrix& w,
                                       double t_scale, const Tolerance& tol) {
  const Eigen::Index n = tm.rows();
  const auto weig = psd_eigen(w, tol, "parallel_sum");
  Eigen::Index k = 0;  // ascending eigenvalues: the kernel block comes first
  while (k < n && weig.values(k) <= weig.cut) ++k;
  const Eigen::Index r = n - k;
  if (r == 0) return LMatrix::Zero(n, n);
  const LMatrix u_r = weig.vectors.rightCols(r);
  const LRealVector d = weig.values.tail(r);

  const LMatrix t_in_w = weig.vectors.adjoint() * tm * weig.vectors;
  const LMatrix trr = t_in_w.bottomRightCorner(r, r);
  LMatrix c = trr;
  for (Eigen::Index i = 0; i < r; ++i) c(i, i) += d(i);
  const Eigen::LLT<LMatrix> c_fact(0.5L * (c + c.adjoint().eval()));

  LMatrix z_rr;  // r-block of the inner inverse, times nothing yet
  LMatrix z_kr(k, r);
  if (k > 0) {
    const LMatrix tkr = t_in_w.topRightCorner(k, r);
    const LMatrix x0 = c_fact.solve(tkr.adjoint()).adjoint().eval();  // Tkr C^{-1}
    LMatrix schur = t_in_w.topLeftCorner(k, k) - x0 * tkr.adjoint();
    const auto seig = psd_eigen(schur, tol, "parallel_sum", t_scale);
    LRealVector sinv(seig.values.size());
    for (Eigen::Index i = 0; i < seig.values.size(); ++i)
      sinv(i) = seig.values(i) > seig.cut ? 1.0L / seig.values(i) : 0.0L;
    const LMatrix s_pinv = seig.vectors * sinv.asDiagonal() * seig.vectors.adjoint();
    z_kr = -s_pinv * x0;
    z_rr = x0.adjoint() * s_pinv * x0 + c_fact.solve(LMatrix::Identity(r, r));
  } else {
    z_rr = c_fact.solve(LMatrix::Identity(r, r));
  }

  LMatrix product_rr = t_in_w.bottomRightCorner(r, r) * z_rr;
  if (k > 0) product_rr += t_in_w.topRightCorner(k, r).adjoint() * z_kr;
  for (Eigen::Index j = 0; j < r; ++j) product_rr.col(j) *= d(j);
  // the exact parallel sum vanishes on ker W; only the r-block survives
  return u_r * (0.5L * (product_rr + product_rr.adjoint().eval())) * u_r.adjoint();
}

}  // namespace detail

/// Parallel sum (t:w)[x] = inf_y { t[x-y] + w[y] }, in matrix form
/// T (T+W)^+ W symmetrized. Evaluated in the eigenbasis of T+W while the
/// scales are comparable, and by exact block elimination in the eigenbasis
/// of W once W dominates, which keeps every inverted block well conditioned
/// across the 2^60-fold scalings taken by the D_w t iteration.
inline PsdForm parallel_sum(const PsdForm& t, const PsdForm& w, const Tolerance& tol = {}) {
  check_same_dim(t.gram(), w.gram(), "parallel_sum");
  const detail::LMatrix tm = detail::widen(t.gram_mat());
  const double t_scale = max_abs(t.gram_mat());
  const double w_scale = max_abs(w.gram_mat());
  detail::LMatrix product;
  if (w_scale > 4.0 * t_scale) {
    product = detail::parallel_sum_w_dominant(tm, w.gram(), t_scale, tol);
  } else {
    product = detail::parallel_sum_direct(tm, detail::widen(w.gram_mat()), tol);
  }
  return PsdForm::from_computation(detail::hermitian_from_ld(product), tol, t_scale + w_scale);
}

/// Minimizer realizing the parallel-sum infimum at x: y* = (T+W)^+ T x.
/// Exposed for oracle-style checks of the infimum definition.
inline Vector parallel_sum_minimizer(const PsdForm& t, const PsdForm& w, const Vector& x,
                                     const Tolerance& tol = {}) {
  check_same_dim(t.gram(), w.gram(), "parallel_sum_minimizer");
  const HermitianMatrix sum(t.gram_mat() + w.gram_mat());
  return pinv(sum, tol).mat() * (t.gram_mat() * x);
}

/// True iff ker w is contained in ker t: every kernel vector of w carries a
/// rounding-level quadratic value under t. `context_scale` widens the zero
/// threshold for forms that are derived quantities of a larger computation
/// (a decomposition part next to its parent).
inline bool is_absolutely_continuous(const PsdForm& t, const PsdForm& w, const Tolerance& tol = {},
                                     double context_scale = 0.0) {
  check_same_dim(t.gram(), w.gram(), "is_absolutely_continuous");
  const Subspace kernel = null_basis(w.gram(), tol);
  if (kernel.dim() == 0) return true;
  const auto eig = detail::psd_eigen(t.gram(), tol, "is_absolutely_continuous");
  const double bound =
      tol.rank_rtol() * std::max(static_cast<double>(eig.lambda_max), context_scale);
  for (int c = 0; c < kernel.dim(); ++c) {
    const Vector v = kernel.basis().col(c);
    if (quadratic(t, v) > bound) return false;
  }
  return true;
}

/// True iff the zero form is the only form below both t and w. Evaluates the
/// parallel-sum criterion and the range-intersection criterion and insists
/// they agree.
inline bool is_singular(const PsdForm& t, const PsdForm& w, const Tolerance& tol = {}) {
  check_same_dim(t.gram(), w.gram(), "is_singular");
  const double norm_bound =
      tol.residual_atol() * (1.0 + t.gram().frobenius() + w.gram().frobenius());
  const bool by_parallel_sum = parallel_sum(t, w, tol).gram().frobenius() <= norm_bound;
  const bool by_ranges = range_intersection_trivial(t.gram(), w.gram(), tol);
  require(by_parallel_sum == by_ranges, ErrorKind::InternalInconsistency,
          std::string("is_singular: parallel-sum test says ") +
              (by_parallel_sum ? "singular" : "not singular") +
              " but the range test disagrees");
  return by_ranges;
}

/// Least c with t <= c*w, when ran T is contained in ran W; absent otherwise.
inline std::optional<double> is_dominated(const PsdForm& t, const PsdForm& w,
                                          const Tolerance& tol = {},
                                          double context_scale = 0.0) {
  check_same_dim(t.gram(), w.gram(), "is_dominated");
  if (!is_absolutely_continuous(t, w, tol, context_scale)) return std::nullopt;
  const auto weig = detail::psd_eigen(w.gram(), tol, "is_dominated");
  detail::LRealVector inv_root(weig.values.size());
  for (Eigen::Index i = 0; i < weig.values.size(); ++i)
    inv_root(i) = weig.values(i) > weig.cut ? 1.0L / std::sqrt(weig.values(i)) : 0.0L;
  const detail::LMatrix w_half_pinv =
      weig.vectors * inv_root.asDiagonal() * weig.vectors.adjoint();
  const detail::LMatrix compressed =
      w_half_pinv * detail::widen(t.gram_mat()) * w_half_pinv;
  Eigen::SelfAdjointEigenSolver<detail::LMatrix> solver(
      (0.5 * (compressed + compressed.adjoint().eval())).eval());
  const detail::LReal top = solver.eigenvalues()(solver.eigenvalues().size() - 1);
  return std::max(0.0, static_cast<double>(top));
}

struct LebesgueResult {
  PsdForm ac;         ///< limit of t : (2^k w)
  int iterations;     ///< number of doublings actually taken
  bool hit_cap;       ///< true when k reached the cap before the delta rule fired
  double short_gap;   ///< Frobenius gap to short_form(t, ker w)
};

/// Strongly-w-absolutely-continuous part sup_n (t : n w), iterated with
/// n = 2^k. A stalled increment is only a candidate stop: when t and w live
/// on very different scales the sequence plateaus long before its limit, so
/// the iteration resumes unless the iterate already matches the short of t
/// to ker w (the known limit in finite dimension).
inline LebesgueResult lebesgue_ac_part_detailed(const PsdForm& t, const PsdForm& w,
                                                const Tolerance& tol = {}) {
  check_same_dim(t.gram(), w.gram(), "lebesgue_ac_part");
  constexpr int kCap = 60;
  const double stall = tol.residual_atol() * (1.0 + t.gram().frobenius());
  const double agreement = 1e-6 * (1.0 + t.gram().frobenius());
  const PsdForm shorted = short_form(t, null_basis(w.gram(), tol), tol);

  PsdForm current = parallel_sum(t, w, tol);
  double gap = (current.gram_mat() - shorted.gram_mat()).norm();
  int k = 0;
  while (k < kCap) {
    const double factor = std::ldexp(1.0, k + 1);  // 2^(k+1)
    PsdForm next = parallel_sum(t, scaled(w, factor), tol);
    const double delta = (next.gram_mat() - current.gram_mat()).norm();
    current = std::move(next);
    ++k;
    gap = (current.gram_mat() - shorted.gram_mat()).norm();
    if (delta <= stall && gap <= agreement) break;
  }
  if (gap > agreement) {
    fail(ErrorKind::NoConvergence,
         "lebesgue_ac_part: iteration cap hit with gap " + std::to_string(gap) +
             " to the shorted form");
  }
  return LebesgueResult{std::move(current), k, k == kCap, gap};
}

inline PsdForm lebesgue_ac_part(const PsdForm& t, const PsdForm& w, const Tolerance& tol = {}) {
  return lebesgue_ac_part_detailed(t, w, tol).ac;
}

struct ShortTypeDecomposition {
  PsdForm ac;    ///< short of t to ker w; w-absolutely continuous
  PsdForm sing;  ///< t - ac; w-singular
  bool unique;   ///< true iff ac is dominated by w
};

/// Splits t into a w-absolutely-continuous part (the short of t to ker w)
/// and a w-singular remainder. `unique` reports whether the decomposition
/// is the only one of its kind, i.e. whether ac is dominated by w.
inline ShortTypeDecomposition short_type_decompose(const PsdForm& t, const PsdForm& w,
                                                   const Tolerance& tol = {}) {
  check_same_dim(t.gram(), w.gram(), "short_type_decompose");
  PsdForm ac = short_form(t, null_basis(w.gram(), tol), tol);
  const double scale = max_abs(t.gram_mat());
  PsdForm sing = PsdForm::from_computation(HermitianMatrix(t.gram_mat() - ac.gram_mat()), tol, scale);
  const bool unique = is_dominated(ac, w, tol, scale).has_value();
  return ShortTypeDecomposition{std::move(ac), std::move(sing), unique};
}

namespace detail {

/// max(0, -lambda_min(T - U)): how far u sticks out above t.
inline double sub_form_violation(const PsdForm& u, const PsdForm& t) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(t.gram_mat() - u.gram_mat());
  return std::max(0.0, -solver.eigenvalues()(0));
}

inline void require_sub_form(const PsdForm& u, const PsdForm& t, const Tolerance& tol,
                             const char* who) {
  check_same_dim(u.gram(), t.gram(), who);
  const double slack = tol.rank_rtol() * (1.0 + max_abs(t.gram_mat()));
  const double violation = sub_form_violation(u, t);
  require(violation <= slack, ErrorKind::PreconditionViolated,
          std::string(who) + ": u exceeds t by " + std::to_string(violation));
}

}  // namespace detail

/// True iff u (with u <= t) is a t-quasi-unit: the strongly-u-absolutely-
/// continuous part of t is u itself. On success the parallel-sum identities
///   (a u):(b t) = ab/(a+b) u   and   (a u):t = u:(a t)
/// are cross-checked for a, b in {1/2, 1, 2, 5}.
inline bool is_quasi_unit(const PsdForm& u, const PsdForm& t, const Tolerance& tol = {}) {
  detail::require_sub_form(u, t, tol, "is_quasi_unit");
  const PsdForm regular = lebesgue_ac_part(t, u, tol);
  const double bound = tol.residual_atol() * (1.0 + t.gram().frobenius());
  if ((regular.gram_mat() - u.gram_mat()).norm() > bound) return false;
  for (const double a : {0.5, 1.0, 2.0, 5.0}) {
    for (const double b : {0.5, 1.0, 2.0, 5.0}) {
      const PsdForm lhs = parallel_sum(scaled(u, a), scaled(t, b), tol);
      const Matrix rhs = (a * b / (a + b)) * u.gram_mat();
      require((lhs.gram_mat() - rhs).norm() <= bound, ErrorKind::InternalInconsistency,
              "is_quasi_unit: scaling identity (v) fails at (" + std::to_string(a) + ", " +
                  std::to_string(b) + ")");
    }
    const PsdForm left = parallel_sum(scaled(u, a), t, tol);
    const PsdForm right = parallel_sum(u, scaled(t, a), tol);
    require((left.gram_mat() - right.gram_mat()).norm() <= bound,
            ErrorKind::InternalInconsistency,
            "is_quasi_unit: symmetry identity (vi) fails at " + std::to_string(a));
  }
  return true;
}

/// True iff u (with u <= t) and t - u are singular, i.e. u is a disjoint
/// part of t (equivalently an extreme point of [0, t]).
inline bool is_disjoint_part(const PsdForm& u, const PsdForm& t, const Tolerance& tol = {}) {
  detail::require_sub_form(u, t, tol, "is_disjoint_part");
  const double scale = max_abs(t.gram_mat());
  const PsdForm rest =
      PsdForm::from_computation(HermitianMatrix(t.gram_mat() - u.gram_mat()), tol, scale);
  return is_singular(u, rest, tol);
}

}  // namespace shortform
