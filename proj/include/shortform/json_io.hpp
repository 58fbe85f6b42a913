#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "shortform/charges.hpp"
#include "shortform/functionals.hpp"
#include "shortform/linalg.hpp"
#include "shortform/verify.hpp"

namespace shortform {

using nlohmann::json;

// ---------------------------------------------------------------------------
// parsing

namespace detail {

inline Complex complex_from_json(const json& j, const char* where) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);  // real files are promoted
  require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(),
          ErrorKind::ParseError,
          std::string(where) + ": complex entries must be numbers or [re, im] pairs");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

inline json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

inline const json& expect_field(const json& j, const char* key, const char* where) {
  require(j.is_object() && j.contains(key), ErrorKind::ParseError,
          std::string(where) + ": missing field \"" + key + "\"");
  return j.at(key);
}

}  // namespace detail

inline HermitianMatrix matrix_from_json(const json& j) {
  const int n = detail::expect_field(j, "n", "matrix").get<int>();
  require(n >= 1, ErrorKind::ParseError, "matrix: n must be positive");
  const json& data = detail::expect_field(j, "data", "matrix");
  require(data.is_array() && data.size() == static_cast<std::size_t>(n) * n,
          ErrorKind::ParseError, "matrix: data must hold n*n entries row-major");
  Matrix m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      m(r, c) = detail::complex_from_json(data[static_cast<std::size_t>(r) * n + c], "matrix");
  return HermitianMatrix(std::move(m));
}

inline json matrix_to_json(const HermitianMatrix& m) {
  json data = json::array();
  for (int r = 0; r < m.dim(); ++r)
    for (int c = 0; c < m.dim(); ++c) data.push_back(detail::complex_to_json(m.mat()(r, c)));
  return json{{"data", std::move(data)}, {"n", m.dim()}};
}

inline Subspace subspace_from_json(const json& j) {
  const int ambient = detail::expect_field(j, "ambient", "subspace").get<int>();
  const int k = detail::expect_field(j, "k", "subspace").get<int>();
  require(ambient >= 1 && k >= 0 && k <= ambient, ErrorKind::ParseError,
          "subspace: need 0 <= k <= ambient");
  const json& data = detail::expect_field(j, "basis", "subspace");
  require(data.is_array() && data.size() == static_cast<std::size_t>(ambient) * k,
          ErrorKind::ParseError, "subspace: basis must hold ambient*k entries column-major");
  Matrix basis(ambient, k);
  for (int c = 0; c < k; ++c)
    for (int r = 0; r < ambient; ++r)
      basis(r, c) =
          detail::complex_from_json(data[static_cast<std::size_t>(c) * ambient + r], "subspace");
  return Subspace(ambient, std::move(basis));
}

inline json subspace_to_json(const Subspace& s) {
  json data = json::array();
  for (int c = 0; c < s.dim(); ++c)
    for (int r = 0; r < s.ambient_dim(); ++r)
      data.push_back(detail::complex_to_json(s.basis()(r, c)));
  return json{{"ambient", s.ambient_dim()}, {"basis", std::move(data)}, {"k", s.dim()}};
}

inline SetRingPtr ring_from_json(const json& j) {
  const int universe = detail::expect_field(j, "universe", "ring").get<int>();
  const json& members = detail::expect_field(j, "members", "ring");
  require(members.is_array(), ErrorKind::ParseError, "ring: members must be an array of bitmasks");
  std::vector<std::uint32_t> masks;
  masks.reserve(members.size());
  for (const json& m : members) {
    require(m.is_number_unsigned() || (m.is_number_integer() && m.get<long long>() >= 0),
            ErrorKind::ParseError, "ring: members must be nonnegative integers");
    masks.push_back(m.get<std::uint32_t>());
  }
  return std::make_shared<SetRing>(universe, std::move(masks));
}

inline json ring_to_json(const SetRing& ring) {
  return json{{"members", ring.members()}, {"universe", ring.universe_size()}};
}

inline Charge charge_from_json(const json& j) {
  SetRingPtr ring = ring_from_json(detail::expect_field(j, "ring", "charge"));
  const json& values = detail::expect_field(j, "values", "charge");
  require(values.is_array() && values.size() == ring->members().size(), ErrorKind::ParseError,
          "charge: values must match the ring member list");
  std::vector<double> v;
  v.reserve(values.size());
  for (const json& x : values) {
    require(x.is_number(), ErrorKind::ParseError, "charge: values must be numbers");
    v.push_back(x.get<double>());
  }
  return Charge(std::move(ring), std::move(v));
}

inline json charge_to_json(const Charge& charge) {
  return json{{"ring", ring_to_json(charge.ring())}, {"values", charge.values()}};
}

inline StarAlgebraPtr algebra_from_json(const json& j) {
  if (j.is_object() && j.contains("fixture")) {
    const std::string name = j.at("fixture").get<std::string>();
    const int param = detail::expect_field(j, "param", "algebra fixture").get<int>();
    if (name == "diagonal") return fixture_algebra(FixtureKind::Diagonal, param);
    if (name == "matrix") return fixture_algebra(FixtureKind::MatrixUnits, param);
    if (name == "cyclic_group") return fixture_algebra(FixtureKind::CyclicGroup, param);
    fail(ErrorKind::ParseError, "algebra: unknown fixture \"" + name + "\"");
  }
  const int d = detail::expect_field(j, "dim", "algebra").get<int>();
  require(d >= 1 && d <= 16, ErrorKind::ParseError, "algebra: dim must lie in [1, 16]");
  const json& structure = detail::expect_field(j, "structure", "algebra");
  require(structure.is_array() && structure.size() == static_cast<std::size_t>(d),
          ErrorKind::ParseError, "algebra: structure must be a d x d x d tensor");
  std::vector<Matrix> left(static_cast<std::size_t>(d), Matrix::Zero(d, d));
  for (int i = 0; i < d; ++i) {
    const json& plane = structure[static_cast<std::size_t>(i)];
    require(plane.is_array() && plane.size() == static_cast<std::size_t>(d),
            ErrorKind::ParseError, "algebra: structure must be a d x d x d tensor");
    for (int jj = 0; jj < d; ++jj) {
      const json& row = plane[static_cast<std::size_t>(jj)];
      require(row.is_array() && row.size() == static_cast<std::size_t>(d), ErrorKind::ParseError,
              "algebra: structure must be a d x d x d tensor");
      for (int k = 0; k < d; ++k)
        left[static_cast<std::size_t>(i)](k, jj) =
            detail::complex_from_json(row[static_cast<std::size_t>(k)], "algebra structure");
    }
  }
  const json& involution = detail::expect_field(j, "involution", "algebra");
  require(involution.is_array() && involution.size() == static_cast<std::size_t>(d) * d,
          ErrorKind::ParseError, "algebra: involution must hold d*d entries row-major");
  Matrix inv(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      inv(r, c) = detail::complex_from_json(involution[static_cast<std::size_t>(r) * d + c],
                                            "algebra involution");
  return std::make_shared<StarAlgebra>(std::move(left), std::move(inv));
}

inline Functional functional_from_json(const StarAlgebraPtr& algebra, const json& j,
                                       const Tolerance& tol = {}) {
  const json& coeffs = detail::expect_field(j, "coeffs", "functional");
  require(coeffs.is_array() && coeffs.size() == static_cast<std::size_t>(algebra->dim()),
          ErrorKind::ParseError, "functional: coeffs must hold one entry per basis element");
  Vector v(algebra->dim());
  for (int i = 0; i < algebra->dim(); ++i)
    v(i) = detail::complex_from_json(coeffs[static_cast<std::size_t>(i)], "functional");
  return Functional(algebra, std::move(v), tol);
}

inline json functional_to_json(const Functional& f) {
  json coeffs = json::array();
  for (int i = 0; i < f.algebra().dim(); ++i)
    coeffs.push_back(detail::complex_to_json(f.coeffs()(i)));
  return json{{"coeffs", std::move(coeffs)}};
}

inline json checks_to_json(const std::vector<Check>& checks) {
  json obj = json::object();
  for (const Check& c : checks) {
    obj[c.name] = json{
        {"bound", c.bound}, {"pass", c.pass()}, {"residual", c.residual}, {"trials", c.trials}};
  }
  return json{{"checks", std::move(obj)}, {"pass", all_pass(checks)}};
}

// ---------------------------------------------------------------------------
// canonical output: keys sorted (nlohmann objects iterate sorted), floats at
// 17 significant digits so that equal results are byte-identical

namespace detail {

inline void canonical_dump_into(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        canonical_dump_into(it.value(), out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const json& item : j) {
        if (!first) out += ',';
        first = false;
        canonical_dump_into(item, out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      require(std::isfinite(x), ErrorKind::InternalInconsistency,
              "canonical JSON cannot hold a non-finite number");
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      out += buf;
      break;
    }
    default:
      out += j.dump();
      break;
  }
}

}  // namespace detail

inline std::string canonical_dump(const json& j) {
  std::string out;
  detail::canonical_dump_into(j, out);
  return out;
}

}  // namespace shortform
