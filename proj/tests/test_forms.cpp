#include <catch2/catch_amalgamated.hpp>

#include "shortform/forms.hpp"
#include "shortform/random_instances.hpp"
#include "test_helpers.hpp"

using namespace shortform;
using namespace shortform::testing;

namespace {

PsdForm form2(Complex a, Complex b, Complex c, Complex d) {
  return PsdForm(HermitianMatrix(mat2(a, b, c, d)));
}

/// Brute-force oracle for inf over the span of `dirs` of t[x - y]: pattern
/// search over the complex coefficients, independent of the Schur-complement
/// path under test.
double grid_short_quadratic(const PsdForm& t, const Matrix& dirs, const Vector& x) {
  const int k = static_cast<int>(dirs.cols());
  std::vector<Complex> coeff(static_cast<std::size_t>(k), Complex(0, 0));
  auto eval = [&](const std::vector<Complex>& c) {
    Vector y = x;
    for (int i = 0; i < k; ++i) y -= c[static_cast<std::size_t>(i)] * dirs.col(i);
    return quadratic(t, y);
  };
  double best = eval(coeff);
  double step = 4.0;
  while (step > 1e-12) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int i = 0; i < k; ++i) {
        for (const Complex delta : {Complex(step, 0), Complex(-step, 0), Complex(0, step),
                                    Complex(0, -step)}) {
          auto trial = coeff;
          trial[static_cast<std::size_t>(i)] += delta;
          const double value = eval(trial);
          if (value < best - 1e-18) {
            best = value;
            coeff = std::move(trial);
            improved = true;
          }
        }
      }
    }
    step *= 0.5;
  }
  return best;
}

}  // namespace

TEST_CASE("quadratic form on the worked examples") {
  CHECK(quadratic(PsdForm(HermitianMatrix::identity(2)), vec2(3, 4)) == Catch::Approx(25.0));
  CHECK(quadratic(form2(2, 1, 1, 1), Vector::Zero(2)) == 0.0);
  CHECK(quadratic(form2(2, 1, 1, 1), vec2(1, 1)) == Catch::Approx(5.0));
  CHECK_THROWS_AS(quadratic(form2(1, 0, 0, 1), Vector::Zero(3)), Error);
}

TEST_CASE("forms satisfy the parallelogram law and polarization identity") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rng.uniform_int(1, 10);
    PsdForm t(random_psd(rng, n, rng.uniform_int(0, n), 1e4, 1.5));
    const Vector x = random_vector(rng, n);
    const Vector y = random_vector(rng, n);
    const double lhs = quadratic(t, x + y) + quadratic(t, x - y);
    const double rhs = 2.0 * (quadratic(t, x) + quadratic(t, y));
    CHECK(std::abs(lhs - rhs) <= 1e-9 * (quadratic(t, x) + quadratic(t, y) + 1.0));

    Complex polarized = 0.0;
    for (int k = 0; k < 4; ++k) {
      const Complex ik = std::pow(Complex(0, 1), k);
      polarized += ik * quadratic(t, x + ik * y);
    }
    polarized *= 0.25;
    const Complex direct = y.dot(t.gram_mat() * x);  // t(x, y)
    CHECK(std::abs(polarized - direct) <= 1e-9 * (1.0 + std::abs(direct)));
  }
}

TEST_CASE("short_form on the worked examples") {
  PsdForm t = form2(2, 1, 1, 1);
  SECTION("zero subspace leaves the form unchanged") {
    CHECK(max_gap(short_form(t, Subspace::zero(2)).gram_mat(), t.gram_mat()) == 0.0);
  }
  SECTION("full space kills the form") {
    CHECK(short_form(t, Subspace::full(2)).gram().frobenius() < 1e-9);
  }
  SECTION("span{e2} gives the Schur complement") {
    Matrix e2(2, 1);
    e2 << 0, 1;
    PsdForm shorted = short_form(t, Subspace(2, e2));
    CHECK(max_gap(shorted.gram_mat(), mat2(1, 0, 0, 0)) < 1e-12);
  }
}

TEST_CASE("short_form quadratic values match the brute-force infimum") {
  Rng rng(29);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = rng.uniform_int(1, 4);
    PsdForm t(random_psd(rng, n, rng.uniform_int(1, n), 100.0, 1.0));
    const int k = rng.uniform_int(0, n);
    Subspace y = random_subspace(rng, n, k);
    PsdForm shorted = short_form(t, y);
    for (int probe = 0; probe < 3; ++probe) {
      const Vector x = random_vector(rng, n);
      const double direct = quadratic(shorted, x);
      const double bruteforce = grid_short_quadratic(t, y.basis(), x);
      CHECK(std::abs(direct - bruteforce) <= 1e-7 * (1.0 + std::abs(direct)));
    }
  }
}

TEST_CASE("short_form is idempotent and monotone") {
  Rng rng(31);
  Tolerance tol;
  for (int trial = 0; trial < 15; ++trial) {
    const int n = rng.uniform_int(1, 10);
    PsdForm t(random_psd(rng, n, rng.uniform_int(0, n), 1e5, 1.0));
    Subspace y = random_subspace(rng, n, rng.uniform_int(0, n));
    PsdForm once = short_form(t, y, tol);
    PsdForm twice = short_form(once, y, tol);
    CHECK((once.gram_mat() - twice.gram_mat()).norm() <=
          tol.residual_atol() * (1.0 + t.gram().frobenius()));

    // t <= w and Y >= Z  =>  t_Y <= w_Z, as quadratic forms
    PsdForm w(HermitianMatrix(t.gram_mat() + random_psd(rng, n, n, 10.0, 0.5).mat()));
    const int smaller = rng.uniform_int(0, y.dim());
    Subspace z(n, y.basis().leftCols(smaller));
    PsdForm t_y = short_form(t, y, tol);
    PsdForm w_z = short_form(w, z, tol);
    for (int probe = 0; probe < 10; ++probe) {
      const Vector x = random_vector(rng, n);
      CHECK(quadratic(t_y, x) <=
            quadratic(w_z, x) + tol.residual_atol() * (1.0 + quadratic(w, x)));
    }
  }
}

TEST_CASE("parallel_sum on the worked examples") {
  SECTION("t : 0 = 0") {
    PsdForm t = form2(2, 1, 1, 1);
    CHECK(parallel_sum(t, PsdForm::zero(2)).gram().frobenius() == 0.0);
  }
  SECTION("scalar 1 : 1 = 1/2") {
    PsdForm one(HermitianMatrix(Matrix::Identity(1, 1)));
    CHECK(std::abs(parallel_sum(one, one).gram_mat()(0, 0).real() - 0.5) < 1e-14);
  }
  SECTION("coordinate-disjoint projections are parallel-null") {
    PsdForm t(HermitianMatrix(diag2(1, 0)));
    PsdForm w(HermitianMatrix(diag2(0, 1)));
    CHECK(parallel_sum(t, w).gram().frobenius() < 1e-14);
  }
}

TEST_CASE("parallel_sum agrees with the infimum at its closed-form minimizer") {
  Rng rng(37);
  Tolerance tol;
  for (int trial = 0; trial < 15; ++trial) {
    const int n = rng.uniform_int(1, 10);
    PsdForm t(random_psd(rng, n, rng.uniform_int(0, n), 1e4, 1.0));
    PsdForm w(random_psd(rng, n, rng.uniform_int(0, n), 1e4, 1.0));
    PsdForm sum = parallel_sum(t, w, tol);

    CHECK((sum.gram_mat() - parallel_sum(w, t, tol).gram_mat()).norm() <=
          tol.residual_atol() * (1.0 + t.gram().frobenius() + w.gram().frobenius()));

    for (int probe = 0; probe < 100; ++probe) {
      const Vector x = random_vector(rng, n);
      const Vector y_star = parallel_sum_minimizer(t, w, x, tol);
      const double infimum = quadratic(t, x - y_star) + quadratic(w, y_star);
      const double direct = quadratic(sum, x);
      CHECK(std::abs(infimum - direct) <= tol.residual_atol() * (1.0 + std::abs(direct)));
      // below both arguments
      CHECK(direct <= quadratic(t, x) + tol.residual_atol() * (1.0 + quadratic(t, x)));
      CHECK(direct <= quadratic(w, x) + tol.residual_atol() * (1.0 + quadratic(w, x)));
    }
  }
}

TEST_CASE("lebesgue_ac_part on the worked examples") {
  SECTION("invertible weight reproduces t") {
    PsdForm t = form2(2, 1, 1, 1);
    PsdForm w = form2(3, 0, 0, 1);
    CHECK(max_gap(lebesgue_ac_part(t, w).gram_mat(), t.gram_mat()) < 1e-8);
  }
  SECTION("t = w = I converges to I") {
    PsdForm id(HermitianMatrix::identity(3));
    CHECK(max_gap(lebesgue_ac_part(id, id).gram_mat(), Matrix::Identity(3, 3)) < 1e-8);
  }
  SECTION("rank-one form singular to diag(1,0) shrinks to zero") {
    PsdForm t = form2(1, 1, 1, 1);
    PsdForm w(HermitianMatrix(diag2(1, 0)));
    CHECK(lebesgue_ac_part(t, w).gram().frobenius() < 1e-8);
  }
}

TEST_CASE("short_type_decompose on the worked examples") {
  Tolerance tol;
  SECTION("invertible weight: everything is absolutely continuous") {
    PsdForm t = form2(2, 1, 1, 1);
    PsdForm w(HermitianMatrix::identity(2));
    auto dec = short_type_decompose(t, w, tol);
    CHECK(max_gap(dec.ac.gram_mat(), t.gram_mat()) < 1e-12);
    CHECK(dec.sing.gram().frobenius() < 1e-12);
    CHECK(dec.unique);
  }
  SECTION("rank-one vs diag(1,0): everything is singular") {
    PsdForm t = form2(1, 1, 1, 1);
    PsdForm w(HermitianMatrix(diag2(1, 0)));
    auto dec = short_type_decompose(t, w, tol);
    CHECK(dec.ac.gram().frobenius() < 1e-12);
    CHECK(max_gap(dec.sing.gram_mat(), t.gram_mat()) < 1e-12);
  }
  SECTION("diagonal instances split coordinate-wise") {
    PsdForm t(HermitianMatrix(diag2(3, 5)));
    PsdForm w(HermitianMatrix(diag2(1, 0)));
    auto dec = short_type_decompose(t, w, tol);
    CHECK(max_gap(dec.ac.gram_mat(), diag2(3, 0)) < 1e-12);
    CHECK(max_gap(dec.sing.gram_mat(), diag2(0, 5)) < 1e-12);
    CHECK(dec.unique);
  }
}

TEST_CASE("decomposition parts verify their defining predicates") {
  Rng rng(41);
  Tolerance tol;
  for (int trial = 0; trial < 20; ++trial) {
    PsdPair pair = random_pair(rng, 10, 6.0);
    PsdForm t(pair.a, tol), w(pair.b, tol);
    auto dec = short_type_decompose(t, w, tol);
    CHECK((t.gram_mat() - dec.ac.gram_mat() - dec.sing.gram_mat()).norm() <=
          1e-10 * (1.0 + t.gram().frobenius()));
    CHECK(is_absolutely_continuous(dec.ac, w, tol, max_abs(t.gram_mat())));
    CHECK(is_singular(dec.sing, w, tol));
    CHECK(dec.unique);  // always true in finite dimension

    // fixed point: t << w iff the ac part is t itself
    const bool ac_whole = (t.gram_mat() - dec.ac.gram_mat()).norm() <=
                          tol.residual_atol() * (1.0 + t.gram().frobenius());
    CHECK(ac_whole == is_absolutely_continuous(t, w, tol));

    // ordering chain D_w t <= t_{ker w} <= t at random points
    PsdForm lebesgue = lebesgue_ac_part(t, w, tol);
    for (int probe = 0; probe < 10; ++probe) {
      const Vector x = random_vector(rng, t.dim());
      const double slack = tol.residual_atol() * (1.0 + quadratic(t, x));
      CHECK(quadratic(lebesgue, x) <= quadratic(dec.ac, x) + slack);
      CHECK(quadratic(dec.ac, x) <= quadratic(t, x) + slack);
    }
  }
}

TEST_CASE("is_absolutely_continuous on the worked examples") {
  CHECK(is_absolutely_continuous(form2(2, 1, 1, 1), PsdForm(HermitianMatrix::identity(2))));
  CHECK_FALSE(is_absolutely_continuous(PsdForm(HermitianMatrix(diag2(1, 1))),
                                       PsdForm(HermitianMatrix(diag2(1, 0)))));
  CHECK(is_absolutely_continuous(PsdForm(HermitianMatrix(diag2(1, 0))),
                                 PsdForm(HermitianMatrix(diag2(2, 0)))));
}

TEST_CASE("is_singular on the worked examples") {
  CHECK(is_singular(form2(2, 1, 1, 1), PsdForm::zero(2)));
  CHECK_FALSE(is_singular(PsdForm(HermitianMatrix::identity(2)),
                          PsdForm(HermitianMatrix::identity(2))));
  CHECK(is_singular(form2(1, 1, 1, 1), PsdForm(HermitianMatrix(diag2(1, 0)))));
}

TEST_CASE("is_dominated on the worked examples") {
  auto c = is_dominated(PsdForm(HermitianMatrix(diag2(1, 0))),
                        PsdForm(HermitianMatrix(diag2(2, 0))));
  REQUIRE(c.has_value());
  CHECK(*c == Catch::Approx(0.5));

  PsdForm t = form2(2, 1, 1, 1);
  auto self = is_dominated(t, t);
  REQUIRE(self.has_value());
  CHECK(*self == Catch::Approx(1.0));

  CHECK_FALSE(is_dominated(PsdForm(HermitianMatrix(diag2(1, 1))),
                           PsdForm(HermitianMatrix(diag2(1, 0))))
                  .has_value());
}

TEST_CASE("is_quasi_unit on the worked examples") {
  PsdForm t = form2(2, 1, 1, 1);
  CHECK(is_quasi_unit(t, t));

  PsdForm id(HermitianMatrix::identity(2));
  PsdForm half(HermitianMatrix(0.5 * Matrix::Identity(2, 2)));
  CHECK_FALSE(is_quasi_unit(half, id));

  Matrix e2(2, 1);
  e2 << 0, 1;
  CHECK(is_quasi_unit(short_form(t, Subspace(2, e2)), t));

  CHECK_THROWS_MATCHES(is_quasi_unit(PsdForm(HermitianMatrix(diag2(3, 3))), id), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::PreconditionViolated;
                       }));
}

TEST_CASE("is_disjoint_part on the worked examples") {
  PsdForm t = form2(2, 1, 1, 1);
  CHECK(is_disjoint_part(PsdForm::zero(2), t));

  PsdForm id(HermitianMatrix::identity(2));
  PsdForm half(HermitianMatrix(0.5 * Matrix::Identity(2, 2)));
  CHECK_FALSE(is_disjoint_part(half, id));

  Matrix e2(2, 1);
  e2 << 0, 1;
  CHECK(is_disjoint_part(short_form(t, Subspace(2, e2)), t));
}

TEST_CASE("shorts are quasi-units and disjoint parts of their source") {
  Rng rng(43);
  Tolerance tol;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.uniform_int(1, 8);
    PsdForm t(random_psd(rng, n, rng.uniform_int(0, n), 1e4, 1.0));
    Subspace y = random_subspace(rng, n, rng.uniform_int(0, n));
    PsdForm u = short_form(t, y, tol);
    CHECK(is_quasi_unit(u, t, tol));
    CHECK(is_disjoint_part(u, t, tol));
  }
}

TEST_CASE("maximality: contractions below t stay below the short") {
  Rng rng(47);
  Tolerance tol;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.uniform_int(1, 8);
    PsdForm t(random_psd(rng, n, rng.uniform_int(1, n), 1e3, 1.0));
    Subspace y = random_subspace(rng, n, rng.uniform_int(0, n));
    PsdForm t_short = short_form(t, y, tol);
    for (int rep = 0; rep < 5; ++rep) {
      PsdForm c(random_contraction_under(rng, t.gram(), tol), tol);
      PsdForm c_short = short_form(c, y, tol);
      for (int probe = 0; probe < 10; ++probe) {
        const Vector x = random_vector(rng, n);
        CHECK(quadratic(c_short, x) <=
              quadratic(t_short, x) + tol.residual_atol() * (1.0 + quadratic(t, x)));
      }
    }
  }
}

TEST_CASE("finite-dimension coincidence of the two absolutely continuous parts") {
  Rng rng(53);
  Tolerance tol;
  for (int trial = 0; trial < 15; ++trial) {
    PsdPair pair = random_pair(rng, 8, 5.0);
    PsdForm t(pair.a, tol), w(pair.b, tol);
    auto detail = lebesgue_ac_part_detailed(t, w, tol);
    auto dec = short_type_decompose(t, w, tol);
    CHECK((detail.ac.gram_mat() - dec.ac.gram_mat()).norm() <=
          1e-6 * (1.0 + t.gram().frobenius()));
  }
}
