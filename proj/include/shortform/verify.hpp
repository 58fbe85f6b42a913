#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "shortform/charges.hpp"
#include "shortform/forms.hpp"
#include "shortform/functionals.hpp"
#include "shortform/operator_short.hpp"
#include "shortform/random_instances.hpp"

namespace shortform {

/// One verified property: `residual` is the worst value observed over all
/// trials, normalized so that the documented bound is the pass line.
struct Check {
  std::string name;
  double residual = 0.0;
  double bound = 1.0;
  int trials = 0;
  bool pass() const { return residual <= bound; }
};

inline bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
}

namespace detail {

class CheckBuilder {
 public:
  explicit CheckBuilder(std::string name) { check_.name = std::move(name); }

  /// Record a residual against its instance-level bound; the stored value is
  /// the worst ratio residual/bound.
  void ratio(double residual, double instance_bound) {
    ++check_.trials;
    if (instance_bound <= 0.0) instance_bound = 1e-300;
    check_.residual = std::max(check_.residual, residual / instance_bound);
  }

  void expect(bool ok) { ratio(ok ? 0.0 : 2.0, 1.0); }

  Check done() const { return check_; }

 private:
  Check check_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// linalg properties

inline std::vector<Check> verify_linalg_properties(std::uint64_t seed, int trials,
                                                   const Tolerance& tol = {}) {
  Rng rng(seed ^ 0x11a16ULL);
  detail::CheckBuilder penrose("pinv_penrose_identities");
  detail::CheckBuilder sqrt_check("psd_sqrt_commutes_and_squares");
  detail::CheckBuilder kernel("null_basis_annihilates");
  detail::CheckBuilder projector("orth_project_idempotent");
  detail::CheckBuilder symmetric("range_intersection_symmetric");
  for (int trial = 0; trial < trials; ++trial) {
    const int n = rng.uniform_int(1, 12);
    HermitianMatrix m = random_psd(rng, n, rng.uniform_int(0, n), 1e6, std::pow(10.0, rng.uniform(-1.0, 1.0)));
    const double bound = tol.residual_atol() * (1.0 + m.frobenius());

    const Matrix p = pinv(m, tol).mat();
    double worst = (m.mat() * p * m.mat() - m.mat()).norm();
    worst = std::max(worst, (p * m.mat() * p - p).norm());
    worst = std::max(worst, (m.mat() * p - (m.mat() * p).adjoint()).norm());
    worst = std::max(worst, (p * m.mat() - (p * m.mat()).adjoint()).norm());
    penrose.ratio(worst, bound);

    const Matrix root = psd_sqrt(m, tol).mat();
    double sq = (root * root - m.mat()).norm();
    sq = std::max(sq, (root * m.mat() - m.mat() * root).norm());
    Eigen::SelfAdjointEigenSolver<Matrix> root_eig(root);
    sq = std::max(sq, -std::min(0.0, root_eig.eigenvalues().minCoeff()));
    sqrt_check.ratio(sq, bound);

    Subspace null_space = null_basis(m, tol);
    Eigen::SelfAdjointEigenSolver<Matrix> meig(m.mat());
    const double cut = tol.rank_rtol() * std::max(meig.eigenvalues().maxCoeff(), 0.0);
    for (int c = 0; c < null_space.dim(); ++c) {
      const Vector v = null_space.basis().col(c);
      kernel.ratio(std::abs(v.dot(m.mat() * v)), cut + 1e-300);
    }
    if (null_space.dim() == 0) kernel.ratio(0.0, 1.0);

    Subspace s = random_subspace(rng, n, rng.uniform_int(0, n));
    const Matrix proj = orth_project(s).mat();
    projector.ratio(max_abs(proj * proj - proj), 1e-12);

    PsdPair pair = random_pair(rng, 8, 6.0);
    symmetric.expect(range_intersection_trivial(pair.a, pair.b, tol) ==
                     range_intersection_trivial(pair.b, pair.a, tol));
  }
  return {penrose.done(), sqrt_check.done(), kernel.done(), projector.done(), symmetric.done()};
}

// ---------------------------------------------------------------------------
// forms properties

inline std::vector<Check> verify_forms_properties(std::uint64_t seed, int trials,
                                                  const Tolerance& tol = {}) {
  Rng rng(seed ^ 0xf0135ULL);
  detail::CheckBuilder jordan("form_parallelogram_polarization");
  detail::CheckBuilder idempotent("short_idempotent");
  detail::CheckBuilder monotone("short_monotone");
  detail::CheckBuilder maximal("short_maximality_over_contractions");
  detail::CheckBuilder fixed_point("ac_fixed_point");
  detail::CheckBuilder chain("ordering_chain");
  detail::CheckBuilder coincide("lebesgue_coincides_with_short");
  detail::CheckBuilder quasi("quasi_unit_equivalences");
  detail::CheckBuilder infimum("parallel_sum_infimum_oracle");
  for (int trial = 0; trial < trials; ++trial) {
    const int n = rng.uniform_int(1, 10);
    PsdForm t(random_psd(rng, n, rng.uniform_int(0, n), 1e6, std::pow(10.0, rng.uniform(-1.0, 1.0))), tol);
    PsdForm w(random_psd(rng, n, rng.uniform_int(0, n), 1e6, std::pow(10.0, rng.uniform(-1.0, 1.0))), tol);
    Subspace y = random_subspace(rng, n, rng.uniform_int(0, n));
    const double t_norm = t.gram().frobenius();
    const double bound = tol.residual_atol() * (1.0 + t_norm);

    {
      const Vector x = random_vector(rng, n);
      const Vector z = random_vector(rng, n);
      const double lhs = quadratic(t, x + z) + quadratic(t, x - z);
      const double rhs = 2.0 * (quadratic(t, x) + quadratic(t, z));
      jordan.ratio(std::abs(lhs - rhs), 1e-9 * (quadratic(t, x) + quadratic(t, z) + 1.0));
      Complex polarized = 0.0;
      for (int k = 0; k < 4; ++k) {
        const Complex ik = std::pow(Complex(0, 1), k);
        polarized += ik * quadratic(t, x + ik * z);
      }
      polarized *= 0.25;
      const Complex direct = z.dot(t.gram_mat() * x);
      jordan.ratio(std::abs(polarized - direct), 1e-9 * (1.0 + std::abs(direct)));
    }

    PsdForm shorted = short_form(t, y, tol);
    idempotent.ratio((short_form(shorted, y, tol).gram_mat() - shorted.gram_mat()).norm(), bound);

    {
      PsdForm bigger(HermitianMatrix(t.gram_mat() + random_psd(rng, n, n, 10.0, 0.5 * (1.0 + max_abs(t.gram_mat()))).mat()), tol);
      Subspace z_space(n, y.basis().leftCols(rng.uniform_int(0, y.dim())));
      PsdForm w_z = short_form(bigger, z_space, tol);
      for (int probe = 0; probe < 5; ++probe) {
        const Vector x = random_vector(rng, n);
        const double gap = quadratic(shorted, x) - quadratic(w_z, x);
        monotone.ratio(std::max(gap, 0.0), tol.residual_atol() * (1.0 + quadratic(bigger, x)));
      }
    }

    {
      PsdForm c(random_contraction_under(rng, t.gram(), tol), tol);
      PsdForm c_short = short_form(c, y, tol);
      for (int probe = 0; probe < 5; ++probe) {
        const Vector x = random_vector(rng, n);
        const double gap = quadratic(c_short, x) - quadratic(shorted, x);
        maximal.ratio(std::max(gap, 0.0), tol.residual_atol() * (1.0 + quadratic(t, x)));
      }
    }

    auto dec = short_type_decompose(t, w, tol);
    {
      const bool ac_whole = (t.gram_mat() - dec.ac.gram_mat()).norm() <= bound;
      fixed_point.expect(ac_whole == is_absolutely_continuous(t, w, tol));
    }

    auto lebesgue = lebesgue_ac_part_detailed(t, w, tol);
    for (int probe = 0; probe < 5; ++probe) {
      const Vector x = random_vector(rng, n);
      const double slack = tol.residual_atol() * (1.0 + quadratic(t, x));
      chain.ratio(std::max(quadratic(lebesgue.ac, x) - quadratic(dec.ac, x), 0.0), slack);
      chain.ratio(std::max(quadratic(dec.ac, x) - quadratic(t, x), 0.0), slack);
    }
    coincide.ratio((lebesgue.ac.gram_mat() - dec.ac.gram_mat()).norm(), 1e-6 * (1.0 + t_norm));

    {
      // all numerically checkable quasi-unit characterizations agree on a short
      const bool unit = is_quasi_unit(shorted, t, tol);
      const bool disjoint = is_disjoint_part(shorted, t, tol);
      quasi.expect(unit && disjoint);
    }

    {
      PsdForm sum = parallel_sum(t, w, tol);
      for (int probe = 0; probe < 20; ++probe) {
        const Vector x = random_vector(rng, n);
        const Vector y_star = parallel_sum_minimizer(t, w, x, tol);
        const double inf_value = quadratic(t, x - y_star) + quadratic(w, y_star);
        infimum.ratio(std::abs(inf_value - quadratic(sum, x)),
                      tol.residual_atol() * (1.0 + inf_value));
      }
    }
  }
  return {jordan.done(),  idempotent.done(), monotone.done(), maximal.done(), fixed_point.done(),
          chain.done(),   coincide.done(),   quasi.done(),    infimum.done()};
}

// ---------------------------------------------------------------------------
// operator properties

inline std::vector<Check> verify_operator_properties(std::uint64_t seed, int trials,
                                                     const Tolerance& tol = {}) {
  Rng rng(seed ^ 0x0be6a706ULL);
  detail::CheckBuilder factorization("krein_short_matches_schur_short");
  detail::CheckBuilder duality("sup_formula_matches_short");
  detail::CheckBuilder correspondence("operator_matches_form_decomposition");
  detail::CheckBuilder extremal("shorted_part_is_disjoint");
  detail::CheckBuilder annihilation("short_vanishes_on_subspace");
  for (int trial = 0; trial < trials; ++trial) {
    const int n = rng.uniform_int(1, 12);
    HermitianMatrix a = random_psd(rng, n, rng.uniform_int(0, n), 1e6, std::pow(10.0, rng.uniform(-1.0, 1.0)));
    Subspace m = random_subspace(rng, n, rng.uniform_int(0, n));
    const double bound = tol.residual_atol() * (1.0 + a.frobenius());

    const Matrix factor_route = krein_short(a, m, tol).mat();
    const Matrix schur_route = short_form(PsdForm(a, tol), m, tol).gram_mat();
    factorization.ratio((factor_route - schur_route).norm(), bound);
    annihilation.ratio((orth_project(m).mat() * factor_route).norm(), bound);

    for (int probe = 0; probe < 10; ++probe) {
      const Vector x = random_vector(rng, n);
      const double by_sup = short_quadratic_sup(a, m, x, tol);
      const double direct = x.dot(factor_route * x).real();
      duality.ratio(std::abs(by_sup - direct),
                    tol.residual_atol() * (1.0 + std::abs(x.dot(a.mat() * x).real())));
    }

    HermitianMatrix b = random_psd(rng, n, rng.uniform_int(0, n), 1e6, std::pow(10.0, rng.uniform(-1.0, 1.0)));
    auto op = operator_decompose(a, b, tol);
    auto form = short_type_decompose(PsdForm(a, tol), PsdForm(b, tol), tol);
    double gap = (op.a_ll.mat() - form.ac.gram_mat()).norm();
    gap = std::max(gap, (op.a_perp.mat() - form.sing.gram_mat()).norm());
    correspondence.ratio(gap, bound);
    correspondence.expect(op.unique);

    extremal.expect(is_disjoint_part(
        PsdForm::from_computation(op.a_ll, tol, max_abs(a.mat())), PsdForm(a, tol), tol));
  }
  return {factorization.done(), duality.done(), correspondence.done(), extremal.done(),
          annihilation.done()};
}

// ---------------------------------------------------------------------------
// charge properties

inline std::vector<Check> verify_charges_properties(std::uint64_t seed, int trials,
                                                    const Tolerance& tol = {}) {
  Rng rng(seed ^ 0xc4a26eULL);
  detail::CheckBuilder valid("charge_parts_are_charges");
  detail::CheckBuilder consistent("charge_matches_form_decomposition");
  detail::CheckBuilder extremal("charge_part_is_disjoint");
  detail::CheckBuilder sigma("charge_matches_iterated_part");
  detail::CheckBuilder proof_path("shorted_form_modulus_identity");
  detail::CheckBuilder lemma("additivity_criterion_two_sided");
  for (int trial = 0; trial < trials; ++trial) {
    SetRingPtr ring = random_ring(rng, rng.uniform_int(1, 8));
    StepFunctionSpace space(ring);
    Charge nu = random_charge(rng, ring, 0.3);
    Charge mu = random_charge(rng, ring, 0.4);

    bool parts_valid = true;
    try {
      auto dec = charge_decompose(nu, mu, tol);
      PsdForm t_nu = induced_form(nu);
      PsdForm t_mu = induced_form(mu);
      PsdForm shorted = short_form(t_nu, null_basis(t_mu.gram(), tol), tol);
      for (std::uint32_t member : ring->members()) {
        consistent.ratio(
            std::abs(dec.nu_ll.value(member) - quadratic(shorted, space.indicator(member))),
            1e-10);
      }
      extremal.expect(is_disjoint_part(
          PsdForm::from_computation(induced_form(dec.nu_ll).gram(), tol, max_abs(t_nu.gram_mat())),
          t_nu, tol));
      sigma.ratio((lebesgue_ac_part(t_nu, t_mu, tol).gram_mat() -
                   induced_form(dec.nu_ll).gram_mat()).norm(),
                  1e-8);
      for (int probe = 0; probe < 5; ++probe) {
        Vector zeta(space.dim());
        for (int i = 0; i < space.dim(); ++i) zeta(i) = rng.cnormal();
        const double direct = quadratic(shorted, zeta);
        proof_path.ratio(std::abs(direct - quadratic(shorted, zeta.cwiseAbs().cast<Complex>())),
                         1e-9 * (1.0 + std::abs(direct)));
      }
      lemma.expect(is_induced_additive(space, t_nu, 50, rng.raw()));
      if (space.dim() >= 2) {
        Matrix off = t_nu.gram_mat();
        off(0, 1) += 0.5 * (1.0 + off(0, 0).real());
        off(1, 0) += 0.5 * (1.0 + off(0, 0).real());
        Eigen::SelfAdjointEigenSolver<Matrix> offeig(off);
        if (offeig.eigenvalues().minCoeff() >= 0.0)
          lemma.expect(!is_induced_additive(space, PsdForm(HermitianMatrix(off), tol), 50,
                                            rng.raw()));
      }
    } catch (const Error&) {
      parts_valid = false;
    }
    valid.expect(parts_valid);
  }
  return {valid.done(), consistent.done(), extremal.done(), sigma.done(), proof_path.done(),
          lemma.done()};
}

// ---------------------------------------------------------------------------
// functional properties

inline std::vector<Check> verify_functionals_properties(std::uint64_t seed, int trials,
                                                        const Tolerance& tol = {}) {
  Rng rng(seed ^ 0xf27c7ULL);
  detail::CheckBuilder reconstruction("gns_reconstruction");
  detail::CheckBuilder homomorphism("gns_star_homomorphism");
  detail::CheckBuilder sum_identity("functional_parts_sum");
  detail::CheckBuilder bridge("functional_gram_bridge");
  detail::CheckBuilder parts("functional_parts_ac_and_singular");
  detail::CheckBuilder extremal("functional_part_is_disjoint");
  detail::CheckBuilder maximal("functional_maximality_over_subforms");
  detail::CheckBuilder representable("parts_remain_representable");
  const FixtureKind kinds[] = {FixtureKind::Diagonal, FixtureKind::MatrixUnits,
                               FixtureKind::CyclicGroup};
  for (int trial = 0; trial < trials; ++trial) {
    const FixtureKind kind = kinds[rng.uniform_int(0, 2)];
    const int param = kind == FixtureKind::MatrixUnits ? rng.uniform_int(2, 3)
                                                       : rng.uniform_int(2, 5);
    StarAlgebraPtr alg = fixture_algebra(kind, param);
    const int rep_dim = kind == FixtureKind::MatrixUnits ? param : alg->dim();
    Functional f = random_functional(rng, kind, param, alg, rep_dim, tol);
    Functional g = random_functional(rng, kind, param, alg, rng.uniform_int(0, rep_dim), tol);
    const int d = alg->dim();
    const double coeff_scale = f.coeffs().cwiseAbs().maxCoeff();

    GnsData data = gns(f, tol);
    const int r = data.quotient_dim;
    for (int i = 0; i < d; ++i) {
      Complex recon = 0.0;
      if (r > 0) recon = data.xi.dot(data.metric * (data.pi[static_cast<std::size_t>(i)] * data.xi));
      reconstruction.ratio(std::abs(recon - f.coeffs()(i)), 1e-9 * (1.0 + coeff_scale));
      if (r > 0) {
        const Vector product = alg->multiply(alg->basis(i), alg->basis((i + 1) % d));
        homomorphism.ratio(max_abs(data.represent(product) -
                                   data.pi[static_cast<std::size_t>(i)] *
                                       data.pi[static_cast<std::size_t>((i + 1) % d)]),
                           1e-9 * (1.0 + coeff_scale));
      }
    }

    auto dec = functional_decompose(f, g, tol);
    const PsdForm gram_f = induced_gram(f, tol);
    const PsdForm gram_g = induced_gram(g, tol);
    const double scale = max_abs(gram_f.gram_mat());
    const double bound = tol.residual_atol() * (1.0 + gram_f.gram().frobenius());

    sum_identity.ratio((dec.f_ll.coeffs() + dec.f_perp.coeffs() - f.coeffs()).cwiseAbs().maxCoeff(),
                       tol.residual_atol() * (1.0 + coeff_scale));

    const Subspace g_kernel = null_basis(gram_g.gram(), tol);
    const PsdForm bridge_form = short_form(gram_f, g_kernel, tol);
    bridge.ratio((induced_gram(dec.f_ll, tol).gram_mat() - bridge_form.gram_mat()).norm(), bound);

    parts.expect(is_absolutely_continuous(induced_gram(dec.f_ll, tol), gram_g, tol, scale));
    parts.expect(is_singular(induced_gram(dec.f_perp, tol), gram_g, tol));
    extremal.expect(is_disjoint_part(induced_gram(dec.f_ll, tol), gram_f, tol));

    {
      PsdForm sub(random_contraction_under(rng, gram_f.gram(), tol), tol);
      PsdForm h = short_form(sub, g_kernel, tol);
      Eigen::SelfAdjointEigenSolver<Matrix> gap(induced_gram(dec.f_ll, tol).gram_mat() -
                                                h.gram_mat());
      maximal.ratio(std::max(0.0, -gap.eigenvalues().minCoeff()),
                    tol.residual_atol() * (1.0 + scale));
    }

    bool ok = true;
    try {
      gns(dec.f_ll, tol);
      gns(dec.f_perp, tol);
    } catch (const Error&) {
      ok = false;
    }
    representable.expect(ok);
  }
  return {reconstruction.done(), homomorphism.done(), sum_identity.done(), bridge.done(),
          parts.done(),          extremal.done(),     maximal.done(),      representable.done()};
}

// ---------------------------------------------------------------------------

/// Focused checks for one supplied pair (the CLI `verify --instance` path).
inline std::vector<Check> verify_pair(const HermitianMatrix& a, const HermitianMatrix& b,
                                      std::uint64_t seed, const Tolerance& tol = {}) {
  Rng rng(seed ^ 0x9a12ULL);
  const int n = a.dim();
  PsdForm t(a, tol), w(b, tol);
  auto op = operator_decompose(a, b, tol);
  auto form = short_type_decompose(t, w, tol);

  detail::CheckBuilder sum("decomposition_sum_identity");
  sum.ratio((a.mat() - op.a_ll.mat() - op.a_perp.mat()).norm(), 1e-10 * (1.0 + a.frobenius()));

  detail::CheckBuilder kernel("absolutely_continuous_part_kernel");
  Subspace b_kernel = null_basis(b, tol);
  Eigen::SelfAdjointEigenSolver<Matrix> aeig(a.mat());
  const double lambda_max = std::max(aeig.eigenvalues().maxCoeff(), 0.0);
  for (int c = 0; c < b_kernel.dim(); ++c) {
    const Vector v = b_kernel.basis().col(c);
    kernel.ratio(std::abs(v.dot(op.a_ll.mat() * v)), 1e-9 * lambda_max + 1e-300);
  }
  if (b_kernel.dim() == 0) kernel.ratio(0.0, 1.0);

  detail::CheckBuilder singular("singular_part_cross_oracles");
  const PsdForm perp_form = PsdForm::from_computation(op.a_perp, tol, max_abs(a.mat()));
  singular.ratio(parallel_sum(perp_form, w, tol).gram().frobenius(),
                 1e-8 * (1.0 + a.frobenius() + b.frobenius()));
  singular.expect(range_intersection_trivial(op.a_perp, b, tol));

  detail::CheckBuilder factorization("factorization_gap");
  factorization.ratio((op.a_ll.mat() - form.ac.gram_mat()).norm(),
                      1e-9 * (1.0 + a.frobenius()));

  detail::CheckBuilder lebesgue("iterated_part_gap");
  auto leb = lebesgue_ac_part_detailed(t, w, tol);
  lebesgue.ratio(leb.short_gap, 1e-6 * (1.0 + a.frobenius()));

  detail::CheckBuilder sup("sup_formula_residual");
  for (int probe = 0; probe < 20; ++probe) {
    const Vector x = random_vector(rng, n);
    const double by_sup = short_quadratic_sup(a, b_kernel, x, tol);
    const double direct = x.dot(op.a_ll.mat() * x).real();
    sup.ratio(std::abs(by_sup - direct), 1e-8 * (1.0 + std::abs(x.dot(a.mat() * x).real())));
  }

  detail::CheckBuilder unique("uniqueness_flag");
  unique.expect(op.unique);

  return {sum.done(),        kernel.done(),   singular.done(), factorization.done(),
          lebesgue.done(),   sup.done(),      unique.done()};
}

inline std::vector<Check> verify_all(std::uint64_t seed, int trials, const Tolerance& tol = {}) {
  std::vector<Check> checks;
  for (auto& block :
       {verify_linalg_properties(seed, trials, tol), verify_forms_properties(seed, trials, tol),
        verify_operator_properties(seed, trials, tol),
        verify_charges_properties(seed, trials, tol),
        verify_functionals_properties(seed, trials, tol)}) {
    checks.insert(checks.end(), block.begin(), block.end());
  }
  return checks;
}

}  // namespace shortform
