#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "shortform/charges.hpp"
#include "shortform/functionals.hpp"
#include "shortform/linalg.hpp"

namespace shortform {

/// Deterministic random source. The raw engine is standard; the real-valued
/// helpers avoid std distributions so that a seed pins the byte-exact stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double normal() {
    // Box-Muller; cache the second deviate.
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = uniform(), v = uniform();
    while (u <= 1e-300) u = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u));
    const double angle = 2.0 * M_PI * v;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  Complex cnormal() { return Complex(normal(), normal()) / std::sqrt(2.0); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline Matrix random_ginibre(Rng& rng, int rows, int cols) {
  Matrix g(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) g(r, c) = rng.cnormal();
  return g;
}

inline Vector random_vector(Rng& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.cnormal();
  return v;
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phase fix.
inline Matrix random_unitary(Rng& rng, int n) {
  const Matrix g = random_ginibre(rng, n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < n; ++c) {
    const Complex diag = r(c, c);
    if (std::abs(diag) > 0) q.col(c) *= diag / std::abs(diag);
  }
  return q;
}

inline Subspace random_subspace(Rng& rng, int ambient, int dim) {
  if (dim == 0) return Subspace::zero(ambient);
  return Subspace(ambient, random_unitary(rng, ambient).leftCols(dim));
}

/// Random Hermitian PSD matrix with prescribed rank, spectral condition
/// number of the nonzero part, and largest eigenvalue.
inline HermitianMatrix random_psd(Rng& rng, int n, int rank, double cond, double scale) {
  Matrix q = random_unitary(rng, n);
  Matrix a = Matrix::Zero(n, n);
  if (rank > 0) {
    std::vector<double> spectrum(static_cast<std::size_t>(rank));
    spectrum[0] = scale;
    for (int i = 1; i < rank; ++i)
      spectrum[static_cast<std::size_t>(i)] =
          scale * std::pow(cond, -(rank == 1 ? 0.0 : rng.uniform()));
    if (rank >= 2) spectrum[static_cast<std::size_t>(rank - 1)] = scale / cond;
    for (int i = 0; i < rank; ++i)
      a += spectrum[static_cast<std::size_t>(i)] * (q.col(i) * q.col(i).adjoint());
  }
  return HermitianMatrix(std::move(a));
}

struct PsdPair {
  HermitianMatrix a;
  HermitianMatrix b;
};

/// Random pair (A, B) for decomposition exercises. B is rank-deficient often
/// enough that the kernel side of the decomposition is regularly nontrivial.
inline PsdPair random_pair(Rng& rng, int max_dim = 12, double max_log10_cond = 8.0) {
  const int n = rng.uniform_int(1, max_dim);
  const double cond_a = std::pow(10.0, rng.uniform(0.0, max_log10_cond));
  const double cond_b = std::pow(10.0, rng.uniform(0.0, max_log10_cond));
  const double scale_a = std::pow(10.0, rng.uniform(-2.0, 2.0));
  const double scale_b = std::pow(10.0, rng.uniform(-2.0, 2.0));
  const int rank_a = rng.uniform_int(0, n);
  const int rank_b = rng.uniform_int(0, n);
  return PsdPair{random_psd(rng, n, rank_a, cond_a, scale_a),
                 random_psd(rng, n, rank_b, cond_b, scale_b)};
}

/// Random PSD contraction sandwich C = A^{1/2} R A^{1/2} with 0 <= R <= I,
/// so C <= A.
inline HermitianMatrix random_contraction_under(Rng& rng, const HermitianMatrix& a,
                                                const Tolerance& tol = {}) {
  const int n = a.dim();
  const Matrix q = random_unitary(rng, n);
  Matrix r = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) r += rng.uniform() * (q.col(i) * q.col(i).adjoint());
  const Matrix root = psd_sqrt(a, tol).mat();
  return HermitianMatrix(root * r * root);
}

/// Random finite set ring: the unions of a random partition of a random
/// subset of the universe.
inline SetRingPtr random_ring(Rng& rng, int universe) {
  std::vector<std::uint32_t> pool;
  for (int e = 0; e < universe; ++e)
    if (rng.uniform() < 0.8) pool.push_back(static_cast<std::uint32_t>(e));
  if (pool.empty()) pool.push_back(0);
  const int blocks = rng.uniform_int(1, static_cast<int>(pool.size()));
  std::vector<std::uint32_t> atom_masks(static_cast<std::size_t>(blocks), 0);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const int block = (static_cast<int>(i) < blocks) ? static_cast<int>(i)
                                                     : rng.uniform_int(0, blocks - 1);
    atom_masks[static_cast<std::size_t>(block)] |= (1u << pool[i]);
  }
  return std::make_shared<SetRing>(SetRing::from_atoms(universe, atom_masks));
}

/// Random charge on a ring: atom values are zero with probability
/// `zero_prob`, otherwise positive on a mild scale; members get exact
/// ascending-order sums of their atoms.
inline Charge random_charge(Rng& rng, const SetRingPtr& ring, double zero_prob) {
  const StepFunctionSpace space(ring);
  std::vector<double> atom_values;
  atom_values.reserve(space.atoms().size());
  for (std::size_t i = 0; i < space.atoms().size(); ++i) {
    const bool zero = rng.uniform() < zero_prob;
    atom_values.push_back(zero ? 0.0 : std::pow(10.0, rng.uniform(-1.0, 1.0)));
  }
  const auto& members = ring->members();
  std::vector<double> values(members.size(), 0.0);
  for (std::size_t m = 0; m < members.size(); ++m) {
    double sum = 0.0;
    for (std::size_t a = 0; a < space.atoms().size(); ++a)
      if ((space.atoms()[a] & members[m]) == space.atoms()[a]) sum += atom_values[a];
    values[m] = sum;
  }
  return Charge(ring, std::move(values));
}

enum class FixtureKind { Diagonal, MatrixUnits, CyclicGroup };

inline StarAlgebraPtr fixture_algebra(FixtureKind kind, int param) {
  switch (kind) {
    case FixtureKind::Diagonal:
      return std::make_shared<StarAlgebra>(StarAlgebra::diagonal(param));
    case FixtureKind::MatrixUnits:
      return std::make_shared<StarAlgebra>(StarAlgebra::matrix_units(param));
    case FixtureKind::CyclicGroup:
      return std::make_shared<StarAlgebra>(StarAlgebra::cyclic_group(param));
  }
  fail(ErrorKind::InvalidArgument, "unknown fixture kind");
}

/// Random positive representable functional on a fixture algebra, built from
/// a random PSD density in the defining (or regular) representation. A rank
/// cap on the density produces functionals with nontrivial null spaces.
inline Functional random_functional(Rng& rng, FixtureKind kind, int param,
                                    const StarAlgebraPtr& algebra, int density_rank,
                                    const Tolerance& tol = {}) {
  const int rep_dim = (kind == FixtureKind::MatrixUnits) ? param : algebra->dim();
  HermitianMatrix density =
      random_psd(rng, rep_dim, density_rank, /*cond=*/10.0, /*scale=*/1.0);
  Vector coeffs(algebra->dim());
  switch (kind) {
    case FixtureKind::Diagonal: {
      // The Gram is diag(coeffs); put the rank directly into the coordinates.
      std::vector<int> order(static_cast<std::size_t>(param));
      for (int i = 0; i < param; ++i) order[static_cast<std::size_t>(i)] = i;
      for (int i = param - 1; i > 0; --i)
        std::swap(order[static_cast<std::size_t>(i)],
                  order[static_cast<std::size_t>(rng.uniform_int(0, i))]);
      coeffs.setZero();
      for (int i = 0; i < density_rank && i < param; ++i)
        coeffs(order[static_cast<std::size_t>(i)]) = std::pow(10.0, rng.uniform(-1.0, 1.0));
      break;
    }
    case FixtureKind::MatrixUnits:
      for (int i = 0; i < param; ++i)
        for (int j = 0; j < param; ++j) coeffs(i * param + j) = density.mat()(j, i);
      break;
    case FixtureKind::CyclicGroup: {
      const int n = param;
      for (int i = 0; i < n; ++i) {
        Complex sum = 0.0;
        for (int j = 0; j < n; ++j) sum += density.mat()(j, (j + i) % n);
        coeffs(i) = sum;
      }
      break;
    }
  }
  return Functional(algebra, std::move(coeffs), tol);
}

}  // namespace shortform
