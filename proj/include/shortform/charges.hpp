#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "shortform/forms.hpp"
#include "shortform/linalg.hpp"

namespace shortform {

/// Finite ring of subsets of {0, ..., universe_size-1}, stored extensionally
/// as sorted bitmasks. Construction checks closure under union and set
/// difference exhaustively.
class SetRing {
 public:
  SetRing(int universe_size, std::vector<std::uint32_t> members)
      : universe_(universe_size), members_(std::move(members)) {
    require(universe_ >= 1 && universe_ <= 24, ErrorKind::InvalidArgument,
            "universe size must lie in [1, 24]");
    const std::uint32_t all = (1u << universe_) - 1u;
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    for (std::uint32_t m : members_) {
      require((m & ~all) == 0, ErrorKind::NotARing,
              "member " + std::to_string(m) + " uses elements outside the universe");
    }
    require(!members_.empty() && members_.front() == 0, ErrorKind::NotARing,
            "ring must contain the empty set");
    for (std::uint32_t r1 : members_) {
      for (std::uint32_t r2 : members_) {
        require(contains(r1 | r2), ErrorKind::NotARing,
                "ring not closed under union: " + std::to_string(r1) + " | " + std::to_string(r2));
        require(contains(r1 & ~r2), ErrorKind::NotARing,
                "ring not closed under difference: " + std::to_string(r1) + " \\ " +
                    std::to_string(r2));
      }
    }
  }

  /// Ring generated by pairwise disjoint blocks: all unions including 0.
  static SetRing from_atoms(int universe_size, const std::vector<std::uint32_t>& blocks) {
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      require(blocks[i] != 0, ErrorKind::InvalidArgument, "atom blocks must be nonempty");
      for (std::size_t l = i + 1; l < blocks.size(); ++l)
        require((blocks[i] & blocks[l]) == 0, ErrorKind::InvalidArgument,
                "atom blocks must be pairwise disjoint");
    }
    require(blocks.size() <= 20, ErrorKind::InvalidArgument, "too many atom blocks");
    std::vector<std::uint32_t> members;
    members.reserve(std::size_t(1) << blocks.size());
    for (std::uint32_t pick = 0; pick < (1u << blocks.size()); ++pick) {
      std::uint32_t u = 0;
      for (std::size_t i = 0; i < blocks.size(); ++i)
        if (pick & (1u << i)) u |= blocks[i];
      members.push_back(u);
    }
    return SetRing(universe_size, std::move(members));
  }

  static SetRing power_set(int universe_size) {
    require(universe_size <= 16, ErrorKind::InvalidArgument, "power set universe too large");
    std::vector<std::uint32_t> members(std::size_t(1) << universe_size);
    for (std::size_t i = 0; i < members.size(); ++i) members[i] = static_cast<std::uint32_t>(i);
    return SetRing(universe_size, std::move(members));
  }

  int universe_size() const { return universe_; }
  const std::vector<std::uint32_t>& members() const { return members_; }

  bool contains(std::uint32_t m) const {
    return std::binary_search(members_.begin(), members_.end(), m);
  }

  int index_of(std::uint32_t m) const {
    auto it = std::lower_bound(members_.begin(), members_.end(), m);
    require(it != members_.end() && *it == m, ErrorKind::NotARing,
            "set " + std::to_string(m) + " is not a ring member");
    return static_cast<int>(it - members_.begin());
  }

  bool operator==(const SetRing& other) const {
    return universe_ == other.universe_ && members_ == other.members_;
  }

 private:
  int universe_;
  std::vector<std::uint32_t> members_;
};

using SetRingPtr = std::shared_ptr<const SetRing>;

/// Nonnegative finitely additive set function on a ring. Construction checks
/// value(0) = 0, nonnegativity, and additivity over every disjoint pair.
class Charge {
 public:
  Charge(SetRingPtr ring, std::vector<double> values)
      : ring_(std::move(ring)), values_(std::move(values)) {
    require(ring_ != nullptr, ErrorKind::InvalidArgument, "charge needs a ring");
    require(values_.size() == ring_->members().size(), ErrorKind::DimensionMismatch,
            "charge must carry one value per ring member");
    for (double v : values_)
      require(v >= 0.0, ErrorKind::PreconditionViolated, "charge values must be nonnegative");
    require(values_[0] == 0.0, ErrorKind::PreconditionViolated,
            "charge of the empty set must be 0");
    const auto& members = ring_->members();
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t l = 0; l < members.size(); ++l) {
        if ((members[i] & members[l]) != 0) continue;
        const std::uint32_t joined = members[i] | members[l];
        const double expected = values_[i] + values_[l];
        const double actual = values_[static_cast<std::size_t>(ring_->index_of(joined))];
        require(std::abs(actual - expected) <= 1e-12 * (1.0 + expected),
                ErrorKind::PreconditionViolated,
                "charge not additive on members " + std::to_string(members[i]) + " and " +
                    std::to_string(members[l]));
      }
    }
  }

  const SetRing& ring() const { return *ring_; }
  const SetRingPtr& ring_ptr() const { return ring_; }
  const std::vector<double>& values() const { return values_; }
  double value(std::uint32_t member) const {
    return values_[static_cast<std::size_t>(ring_->index_of(member))];
  }

 private:
  SetRingPtr ring_;
  std::vector<double> values_;
};

/// Coordinate space of ring step functions: one complex coordinate per atom
/// (minimal nonempty member), atoms ordered by bitmask value.
class StepFunctionSpace {
 public:
  explicit StepFunctionSpace(SetRingPtr ring) : ring_(std::move(ring)) {
    require(ring_ != nullptr, ErrorKind::InvalidArgument, "step-function space needs a ring");
    for (std::uint32_t m : ring_->members()) {
      if (m == 0) continue;
      bool minimal = true;
      for (std::uint32_t other : ring_->members()) {
        if (other == 0 || other == m) continue;
        if ((other & m) == other) {  // proper nonempty subset
          minimal = false;
          break;
        }
      }
      if (minimal) atoms_.push_back(m);
    }
    // every member must be the disjoint union of the atoms it contains
    for (std::uint32_t m : ring_->members()) {
      std::uint32_t covered = 0;
      for (std::uint32_t atom : atoms_) {
        if ((atom & m) == atom) {
          require((covered & atom) == 0, ErrorKind::NotARing, "atoms are not disjoint");
          covered |= atom;
        }
      }
      require(covered == m, ErrorKind::NotARing,
              "member " + std::to_string(m) + " is not a union of atoms");
    }
  }

  const SetRing& ring() const { return *ring_; }
  const SetRingPtr& ring_ptr() const { return ring_; }
  const std::vector<std::uint32_t>& atoms() const { return atoms_; }
  int dim() const { return static_cast<int>(atoms_.size()); }

  /// Atom coordinates of the indicator function of a ring member.
  Vector indicator(std::uint32_t member) const {
    ring_->index_of(member);  // membership check
    Vector chi = Vector::Zero(dim());
    for (int i = 0; i < dim(); ++i)
      if ((atoms_[static_cast<std::size_t>(i)] & member) == atoms_[static_cast<std::size_t>(i)])
        chi(i) = 1.0;
    return chi;
  }

 private:
  SetRingPtr ring_;
  std::vector<std::uint32_t> atoms_;
};

inline StepFunctionSpace atoms(SetRingPtr ring) { return StepFunctionSpace(std::move(ring)); }

/// Form induced by a charge on step functions, t_nu(phi, psi) = integral of
/// phi * conj(psi) d nu: diagonal with the atom values of nu.
inline PsdForm induced_form(const Charge& nu) {
  const StepFunctionSpace space(nu.ring_ptr());
  Matrix gram = Matrix::Zero(space.dim(), space.dim());
  for (int i = 0; i < space.dim(); ++i)
    gram(i, i) = nu.value(space.atoms()[static_cast<std::size_t>(i)]);
  return PsdForm(HermitianMatrix(std::move(gram)));
}

/// Decides whether R -> t[chi_R] is additive, by sampling the criterion
/// t[zeta] = t[|zeta|] on random step functions and cross-checking direct
/// additivity over every disjoint member pair.
inline bool is_induced_additive(const StepFunctionSpace& space, const PsdForm& t, int trials,
                                std::uint64_t seed = 0x73686f7274u) {
  require(t.dim() == space.dim(), ErrorKind::DimensionMismatch,
          "is_induced_additive: form dimension " + std::to_string(t.dim()) +
              " vs atom count " + std::to_string(space.dim()));
  std::mt19937_64 gen(seed);
  auto unit = [&gen]() {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
  };
  bool modulus_ok = true;
  for (int trial = 0; trial < trials && modulus_ok; ++trial) {
    Vector zeta(space.dim());
    for (int i = 0; i < space.dim(); ++i)
      zeta(i) = Complex(2.0 * unit() - 1.0, 2.0 * unit() - 1.0);
    Vector modulus = zeta.cwiseAbs().cast<Complex>();
    const double direct = quadratic(t, zeta);
    const double folded = quadratic(t, modulus);
    if (std::abs(direct - folded) > 1e-9 * (1.0 + std::abs(direct))) modulus_ok = false;
  }
  bool pairwise_ok = true;
  const auto& members = space.ring().members();
  for (std::size_t i = 0; i < members.size() && pairwise_ok; ++i) {
    for (std::size_t l = 0; l < members.size() && pairwise_ok; ++l) {
      if ((members[i] & members[l]) != 0) continue;
      const double lhs = quadratic(t, space.indicator(members[i] | members[l]));
      const double rhs =
          quadratic(t, space.indicator(members[i])) + quadratic(t, space.indicator(members[l]));
      if (std::abs(lhs - rhs) > 1e-9 * (1.0 + std::abs(rhs))) pairwise_ok = false;
    }
  }
  double off_diag = 0.0;
  for (int r = 0; r < t.dim(); ++r)
    for (int c = 0; c < t.dim(); ++c)
      if (r != c) off_diag = std::max(off_diag, std::abs(t.gram_mat()(r, c)));
  const bool diagonal = off_diag <= 1e-12 * (1.0 + max_abs(t.gram_mat()));
  if (diagonal && trials > 0) {
    require(modulus_ok == pairwise_ok, ErrorKind::InternalInconsistency,
            "is_induced_additive: modulus test and pairwise test disagree on a diagonal form");
  }
  return modulus_ok && pairwise_ok;
}

struct ChargeDecomposition {
  Charge nu_ll;    ///< mu-absolutely continuous part
  Charge nu_perp;  ///< mu-singular part
};

/// Short-type decomposition of charges: nu_ll keeps the atoms mu charges,
/// nu_perp collects the atoms mu annihilates. The atom threshold follows the
/// matrix kernel convention (rank_rtol relative to the largest atom value of
/// mu, with an absolute floor of 1e-14).
inline ChargeDecomposition charge_decompose(const Charge& nu, const Charge& mu,
                                            const Tolerance& tol = {}) {
  require(nu.ring() == mu.ring(), ErrorKind::RingMismatch,
          "charge_decompose: charges live on different rings");
  const StepFunctionSpace space(nu.ring_ptr());
  double mu_peak = 0.0;
  for (std::uint32_t atom : space.atoms()) mu_peak = std::max(mu_peak, mu.value(atom));
  const double threshold = std::max(tol.rank_rtol() * mu_peak, 1e-14);
  std::vector<std::uint32_t> charged;
  for (std::uint32_t atom : space.atoms())
    if (mu.value(atom) > threshold) charged.push_back(atom);

  const auto& members = nu.ring().members();
  std::vector<double> ll(members.size(), 0.0);
  std::vector<double> perp(members.size(), 0.0);
  for (std::size_t i = 0; i < members.size(); ++i) {
    double kept = 0.0;
    for (std::uint32_t atom : charged)
      if ((atom & members[i]) == atom) kept += nu.value(atom);
    ll[i] = kept;
    perp[i] = std::max(nu.values()[i] - kept, 0.0);
  }
  return ChargeDecomposition{Charge(nu.ring_ptr(), std::move(ll)),
                             Charge(nu.ring_ptr(), std::move(perp))};
}

}  // namespace shortform
