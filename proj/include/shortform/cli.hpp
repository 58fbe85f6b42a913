#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "shortform/json_io.hpp"
#include "shortform/operator_short.hpp"

namespace shortform::cli {

using shortform::detail::CheckBuilder;
using shortform::detail::sub_form_violation;

namespace detail {

inline json load_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::ParseError, "cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
  return j;
}

inline void emit(const json& result, const std::string& format, std::ostream& out) {
  if (format == "json") {
    out << canonical_dump(result) << "\n";
    return;
  }
  // text mode: scalars and payloads up front, one line per certificate check
  for (auto it = result.begin(); it != result.end(); ++it) {
    if (it.key() == "certificate") continue;
    out << it.key() << ": " << canonical_dump(*it) << "\n";
  }
  if (result.contains("certificate")) {
    const json& cert = result.at("certificate");
    for (auto it = cert.at("checks").begin(); it != cert.at("checks").end(); ++it) {
      const json& c = *it;
      out << (c.at("pass").get<bool>() ? "PASS " : "FAIL ") << it.key()
          << "  residual=" << canonical_dump(c.at("residual"))
          << " bound=" << canonical_dump(c.at("bound")) << "\n";
    }
    out << (cert.at("pass").get<bool>() ? "PASS" : "FAIL") << " overall\n";
  }
}

inline json residuals_of(const std::vector<Check>& checks) {
  json residuals = json::object();
  for (const Check& c : checks) residuals[c.name] = c.residual;
  return residuals;
}

}  // namespace detail

/// Front-end entry point; `args` excludes the program name. Exit status:
/// 0 success, 1 failed verification property, 2 invalid input, 3 internal
/// cross-check disagreement.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"short-type decompositions of PSD forms, operators, charges, and functionals"};
  app.require_subcommand(1);

  double tol_rank = 1e-10;
  double tol_residual = 1e-9;
  std::string format = "json";
  std::uint64_t seed = 42;
  app.add_option("--tol-rank", tol_rank, "relative eigenvalue cutoff for rank decisions");
  app.add_option("--tol-residual", tol_residual, "absolute residual bound for identities");
  app.add_option("--format", format, "output mode: json | text")
      ->check(CLI::IsMember({"json", "text"}));
  app.add_option("--seed", seed, "seed for sampled certificate checks and verification");

  std::string path_t, path_w, path_a, path_b, path_m, path_subspace;
  std::string path_nu, path_mu, path_algebra, path_f, path_g;
  bool range_in = false;
  int trials = 100;
  std::vector<std::string> instances;

  CLI::App* cmd_short = app.add_subcommand("short", "short of a form to a subspace");
  cmd_short->add_option("--t", path_t, "form Gram matrix (JSON)")->required();
  cmd_short->add_option("--subspace", path_subspace, "subspace basis (JSON)")->required();

  CLI::App* cmd_parsum = app.add_subcommand("parsum", "parallel sum of two forms");
  cmd_parsum->add_option("--t", path_t, "first form (JSON)")->required();
  cmd_parsum->add_option("--w", path_w, "second form (JSON)")->required();

  CLI::App* cmd_lebesgue =
      app.add_subcommand("lebesgue", "iterated strongly-absolutely-continuous part");
  cmd_lebesgue->add_option("--t", path_t, "form to decompose (JSON)")->required();
  cmd_lebesgue->add_option("--w", path_w, "weight form (JSON)")->required();

  CLI::App* cmd_decompose =
      app.add_subcommand("decompose", "short-type decomposition of A with respect to B");
  cmd_decompose->add_option("--a", path_a, "operator to decompose (JSON)")->required();
  cmd_decompose->add_option("--b", path_b, "weight operator (JSON)")->required();

  CLI::App* cmd_krein = app.add_subcommand(
      "krein-short", "short of A to M through the induced-space factorization; the result "
                     "vanishes on M (pass --range-in to short onto M instead, i.e. to the "
                     "largest positive operator below A with range inside M)");
  cmd_krein->add_option("--a", path_a, "operator (JSON)")->required();
  cmd_krein->add_option("--m", path_m, "subspace (JSON)")->required();
  cmd_krein->add_flag("--range-in", range_in,
                      "short onto M: equivalent to shorting at the orthogonal complement");

  CLI::App* cmd_charge = app.add_subcommand("charge-decompose",
                                            "short-type decomposition of a charge");
  cmd_charge->add_option("--nu", path_nu, "charge to decompose (JSON)")->required();
  cmd_charge->add_option("--mu", path_mu, "weight charge (JSON)")->required();

  CLI::App* cmd_gns = app.add_subcommand("gns-decompose",
                                         "short-type decomposition of a positive functional");
  cmd_gns->add_option("--algebra", path_algebra, "*-algebra or fixture (JSON)")->required();
  cmd_gns->add_option("--f", path_f, "functional to decompose (JSON)")->required();
  cmd_gns->add_option("--g", path_g, "weight functional (JSON)")->required();

  CLI::App* cmd_verify = app.add_subcommand("verify", "run the module property suites");
  cmd_verify->add_option("--trials", trials, "random instances per property");
  cmd_verify->add_option("--instance", instances,
                         "run pair checks on {\"a\": matrix, \"b\": matrix} files instead");

  try {
    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.push_back("shortform");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    argv.reserve(argv_storage.size());
    for (std::string& s : argv_storage) argv.push_back(s.data());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    const Tolerance tol(tol_rank, tol_residual);

    if (*cmd_short) {
      const PsdForm t(matrix_from_json(detail::load_file(path_t)), tol);
      const Subspace y = subspace_from_json(detail::load_file(path_subspace));
      const PsdForm shorted = short_form(t, y, tol);
      CheckBuilder below("short_below_input");
      below.ratio(sub_form_violation(shorted, t),
                  tol.residual_atol() * (1.0 + t.gram().frobenius()));
      CheckBuilder vanish("short_vanishes_on_subspace");
      for (int c = 0; c < y.dim(); ++c)
        vanish.ratio(quadratic(shorted, y.basis().col(c)),
                     tol.residual_atol() * (1.0 + t.gram().frobenius()));
      if (y.dim() == 0) vanish.ratio(0.0, 1.0);
      CheckBuilder idem("short_idempotent");
      idem.ratio((short_form(shorted, y, tol).gram_mat() - shorted.gram_mat()).norm(),
                 tol.residual_atol() * (1.0 + t.gram().frobenius()));
      const std::vector<Check> checks{below.done(), vanish.done(), idem.done()};
      detail::emit(json{{"certificate", checks_to_json(checks)},
                        {"short", matrix_to_json(shorted.gram())}},
                   format, out);
      return 0;
    }

    if (*cmd_parsum) {
      const PsdForm t(matrix_from_json(detail::load_file(path_t)), tol);
      const PsdForm w(matrix_from_json(detail::load_file(path_w)), tol);
      const PsdForm sum = parallel_sum(t, w, tol);
      Rng rng(seed);
      CheckBuilder commut("commutative");
      commut.ratio((sum.gram_mat() - parallel_sum(w, t, tol).gram_mat()).norm(),
                   tol.residual_atol() * (1.0 + t.gram().frobenius() + w.gram().frobenius()));
      CheckBuilder below_t("below_first_argument");
      CheckBuilder below_w("below_second_argument");
      CheckBuilder infimum("matches_infimum_at_sampled_points");
      for (int probe = 0; probe < 50; ++probe) {
        const Vector x = random_vector(rng, t.dim());
        below_t.ratio(std::max(quadratic(sum, x) - quadratic(t, x), 0.0),
                      tol.residual_atol() * (1.0 + quadratic(t, x)));
        below_w.ratio(std::max(quadratic(sum, x) - quadratic(w, x), 0.0),
                      tol.residual_atol() * (1.0 + quadratic(w, x)));
        const Vector y_star = parallel_sum_minimizer(t, w, x, tol);
        const double inf_value = quadratic(t, x - y_star) + quadratic(w, y_star);
        infimum.ratio(std::abs(inf_value - quadratic(sum, x)),
                      tol.residual_atol() * (1.0 + inf_value));
      }
      const std::vector<Check> checks{commut.done(), below_t.done(), below_w.done(),
                                      infimum.done()};
      detail::emit(json{{"certificate", checks_to_json(checks)},
                        {"parallel_sum", matrix_to_json(sum.gram())},
                        {"seed", seed}},
                   format, out);
      return 0;
    }

    if (*cmd_lebesgue) {
      const PsdForm t(matrix_from_json(detail::load_file(path_t)), tol);
      const PsdForm w(matrix_from_json(detail::load_file(path_w)), tol);
      const LebesgueResult result = lebesgue_ac_part_detailed(t, w, tol);
      CheckBuilder gap("iterated_part_gap");
      gap.ratio(result.short_gap, 1e-6 * (1.0 + t.gram().frobenius()));
      const std::vector<Check> checks{gap.done()};
      detail::emit(json{{"certificate", checks_to_json(checks)},
                        {"iterations", result.iterations},
                        {"lebesgue_part", matrix_to_json(result.ac.gram())}},
                   format, out);
      return 0;
    }

    if (*cmd_decompose) {
      const HermitianMatrix a = matrix_from_json(detail::load_file(path_a));
      const HermitianMatrix b = matrix_from_json(detail::load_file(path_b));
      auto op = operator_decompose(a, b, tol);
      const std::vector<Check> checks = verify_pair(a, b, seed, tol);
      detail::emit(json{{"ac", matrix_to_json(op.a_ll)},
                        {"certificate", checks_to_json(checks)},
                        {"residuals", detail::residuals_of(checks)},
                        {"seed", seed},
                        {"sing", matrix_to_json(op.a_perp)},
                        {"unique", op.unique}},
                   format, out);
      return 0;
    }

    if (*cmd_krein) {
      const HermitianMatrix a = matrix_from_json(detail::load_file(path_a));
      Subspace m = subspace_from_json(detail::load_file(path_m));
      if (range_in) {
        // complement: full eigenbasis of the projector below the cutoff
        m = null_basis(orth_project(m), tol);
      }
      const HermitianMatrix shorted = krein_short(a, m, tol);
      CheckBuilder gap("factorization_gap");
      gap.ratio((shorted.mat() - short_form(PsdForm(a, tol), m, tol).gram_mat()).norm(),
                tol.residual_atol() * (1.0 + a.frobenius()));
      CheckBuilder vanish("short_vanishes_on_subspace");
      vanish.ratio((orth_project(m).mat() * shorted.mat()).norm(),
                   tol.residual_atol() * (1.0 + a.frobenius()));
      const std::vector<Check> checks{gap.done(), vanish.done()};
      detail::emit(json{{"certificate", checks_to_json(checks)},
                        {"short", matrix_to_json(shorted)}},
                   format, out);
      return 0;
    }

    if (*cmd_charge) {
      const Charge nu = charge_from_json(detail::load_file(path_nu));
      const Charge mu = charge_from_json(detail::load_file(path_mu));
      auto dec = charge_decompose(nu, mu, tol);
      const StepFunctionSpace space(nu.ring_ptr());
      const PsdForm t_nu = induced_form(nu);
      const PsdForm t_mu = induced_form(mu);
      const PsdForm shorted = short_form(t_nu, null_basis(t_mu.gram(), tol), tol);
      CheckBuilder form_level("matches_form_decomposition");
      CheckBuilder ac("absolutely_continuous");
      for (std::uint32_t member : nu.ring().members()) {
        form_level.ratio(
            std::abs(dec.nu_ll.value(member) - quadratic(shorted, space.indicator(member))),
            1e-10);
        if (mu.value(member) == 0.0) ac.ratio(dec.nu_ll.value(member), 1e-12);
      }
      ac.ratio(0.0, 1.0);
      CheckBuilder singular("singular_part_orthogonal");
      singular.expect(is_singular(induced_form(dec.nu_perp), t_mu, tol));
      const std::vector<Check> checks{form_level.done(), ac.done(), singular.done()};
      detail::emit(json{{"certificate", checks_to_json(checks)},
                        {"nu_ll", charge_to_json(dec.nu_ll)},
                        {"nu_perp", charge_to_json(dec.nu_perp)},
                        {"residuals", detail::residuals_of(checks)}},
                   format, out);
      return 0;
    }

    if (*cmd_gns) {
      const StarAlgebraPtr algebra = algebra_from_json(detail::load_file(path_algebra));
      const Functional f = functional_from_json(algebra, detail::load_file(path_f), tol);
      const Functional g = functional_from_json(algebra, detail::load_file(path_g), tol);
      auto dec = functional_decompose(f, g, tol);
      const PsdForm gram_f = induced_gram(f, tol);
      const PsdForm gram_g = induced_gram(g, tol);
      const double scale = max_abs(gram_f.gram_mat());
      CheckBuilder sum("parts_sum_to_f");
      sum.ratio((dec.f_ll.coeffs() + dec.f_perp.coeffs() - f.coeffs()).cwiseAbs().maxCoeff(),
                tol.residual_atol() * (1.0 + f.coeffs().cwiseAbs().maxCoeff()));
      CheckBuilder bridge("gram_bridge_gap");
      bridge.ratio((induced_gram(dec.f_ll, tol).gram_mat() -
                    short_form(gram_f, null_basis(gram_g.gram(), tol), tol).gram_mat()).norm(),
                   tol.residual_atol() * (1.0 + gram_f.gram().frobenius()));
      CheckBuilder parts("parts_ac_and_singular");
      parts.expect(is_absolutely_continuous(induced_gram(dec.f_ll, tol), gram_g, tol, scale));
      parts.expect(is_singular(induced_gram(dec.f_perp, tol), gram_g, tol));
      const std::vector<Check> checks{sum.done(), bridge.done(), parts.done()};
      detail::emit(json{{"certificate", checks_to_json(checks)},
                        {"f_ll", functional_to_json(dec.f_ll)},
                        {"f_perp", functional_to_json(dec.f_perp)},
                        {"residuals", detail::residuals_of(checks)}},
                   format, out);
      return 0;
    }

    if (*cmd_verify) {
      std::vector<Check> checks;
      if (!instances.empty()) {
        for (const std::string& path : instances) {
          const json j = detail::load_file(path);
          const json& ja = j.contains("a") ? j.at("a") : detail::expect_field(j, "t", "instance");
          const json& jb = j.contains("b") ? j.at("b") : detail::expect_field(j, "w", "instance");
          PsdForm(matrix_from_json(ja), tol);  // PSD gates
          PsdForm(matrix_from_json(jb), tol);
          auto pair_checks = verify_pair(matrix_from_json(ja), matrix_from_json(jb), seed, tol);
          checks.insert(checks.end(), pair_checks.begin(), pair_checks.end());
        }
      } else if (trials <= 0) {
        err << "warning: --trials 0 runs no property instances; vacuous pass\n";
      } else {
        checks = verify_all(seed, trials, tol);
      }
      detail::emit(json{{"certificate", checks_to_json(checks)},
                        {"seed", seed},
                        {"trials", trials}},
                   format, out);
      if (!all_pass(checks)) {
        const Check* worst = nullptr;
        for (const Check& c : checks)
          if (!c.pass() && (worst == nullptr || c.residual > worst->residual)) worst = &c;
        err << "verification failed: " << worst->name << " residual "
            << worst->residual << " exceeds bound " << worst->bound << "\n";
        return 1;
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.is_validation() ? 2 : 3;
  }
  return 2;
}

}  // namespace shortform::cli
