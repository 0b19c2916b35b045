#include <doctest.h>

#include "ergo/errors.hpp"
#include "ergo/models.hpp"
#include "oracles.hpp"

using namespace ergo;

TEST_CASE("ising dense matrix matches Kronecker construction") {
  const int n = 5;
  const auto h = build_ising(n, 1.0, 0.3);
  oracle::Mat ref = 0.25 * oracle::dense("ZIIII") - 0.25 * oracle::dense("IIIIZ");
  for (int i = 0; i + 1 < n; ++i) {
    std::string s(n, 'I');
    s[i] = s[i + 1] = 'Z';
    ref += oracle::dense(s);
  }
  for (int i = 0; i < n; ++i) {
    std::string sx(n, 'I'), sz(n, 'I');
    sx[i] = 'X';
    sz[i] = 'Z';
    ref += 1.0 * oracle::dense(sx) + 0.3 * oracle::dense(sz);
  }
  CHECK((h.dense().cast<oracle::cplx>() - ref).norm() < 1e-12);
  CHECK(h.terms().size() == static_cast<std::size_t>(n - 1 + 2 * n));  // boundary fields merged
  CHECK(h.is_real());
  CHECK(h.expected_kernel_size() == 1);
  CHECK_FALSE(h.conserves_magnetization());
}

TEST_CASE("xxz dense matrix and symmetry") {
  const int n = 4;
  const auto h = build_xxz(n, 1.5);
  oracle::Mat ref = 0.05 * oracle::dense("ZIII");
  for (int i = 0; i + 1 < n; ++i) {
    for (char c : {'X', 'Y', 'Z'}) {
      std::string s(n, 'I');
      s[i] = s[i + 1] = c;
      ref += (c == 'Z' ? 1.5 : 1.0) * oracle::dense(s);
    }
  }
  CHECK((h.dense().cast<oracle::cplx>() - ref).norm() < 1e-12);
  CHECK(h.conserves_magnetization());
  CHECK(h.expected_kernel_size() == 2);
  CHECK_FALSE(build_xxz(n, 1.0, 0.0).expected_kernel_size().has_value());
}

TEST_CASE("periodic ising adds the wrap bond") {
  const auto h = build_ising(4, 1.0, 0.0, 0.0, 0.0, Boundary::periodic);
  CHECK(h.expected_kernel_size() == 2);
  bool wrap = false;
  for (const auto& t : h.terms()) wrap = wrap || t.op == PauliString::parse("Z0 Z3");
  CHECK(wrap);
}

TEST_CASE("term merging and validation") {
  const HamiltonianOperator h(2, {{1.0, PauliString::parse("X0")},
                                  {2.0, PauliString::parse("X0")},
                                  {1.0, PauliString::parse("-Z1")},
                                  {0.5, PauliString::parse("Z0 Z1")},
                                  {-0.5, PauliString::parse("Z0 Z1")}});
  REQUIRE(h.terms().size() == 2);
  CHECK(h.terms()[0].coefficient == doctest::Approx(3.0));
  CHECK(h.terms()[1].coefficient == doctest::Approx(-1.0));
  CHECK_THROWS_AS(HamiltonianOperator(2, {{1.0, PauliString::parse("i X0")}}), std::invalid_argument);
  CHECK_THROWS_AS(HamiltonianOperator(2, {{1.0, PauliString::parse("X3")}}), std::invalid_argument);
}

TEST_CASE("dense limits") {
  const HamiltonianOperator y(2, {{1.0, PauliString::parse("Y0")}});
  CHECK_FALSE(y.is_real());
  CHECK_THROWS_AS(y.dense(), std::domain_error);
  CHECK_THROWS_AS(build_ising(6, 1, 0).dense(16), ResourceLimitError);
}

TEST_CASE("magnetization sectors and blocks") {
  const auto idx = magnetization_sector_indices(4, 0);
  CHECK(idx.size() == 6u);
  CHECK(std::is_sorted(idx.begin(), idx.end()));
  CHECK(magnetization_sector_indices(5, 1).size() == 10u);
  CHECK_THROWS_AS(magnetization_sector_indices(4, 1), std::invalid_argument);
  CHECK(largest_sector(7) == 1);

  const auto h = build_xxz(4);
  const Eigen::MatrixXd full = h.dense();
  const Eigen::MatrixXd blk = h.dense_block(idx);
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b)
      CHECK(blk(a, b) == doctest::Approx(full(idx[a], idx[b])));
  const auto bad = magnetization_sector_indices(4, 0);
  CHECK_THROWS(build_ising(4, 1, 0).dense_block(bad));
}

TEST_CASE("diagonal and coefficient vector") {
  const auto h = build_ising(4, 0.7, 0.3);
  const Eigen::MatrixXd d = h.dense();
  const Eigen::VectorXd diag = h.diagonal();
  for (Eigen::Index i = 0; i < d.rows(); ++i) CHECK(diag[i] == doctest::Approx(d(i, i)));
  const auto basis = generate_local_basis(4, 2, Boundary::open);
  CHECK(h.in_span(basis));
  const Eigen::VectorXd c = h.coefficient_vector(basis);
  double ss = 0.0;
  for (const auto& t : h.terms()) ss += t.coefficient * t.coefficient;
  CHECK(c.squaredNorm() == doctest::Approx(ss));
  CHECK(c[*basis.index_of(PauliString::parse("X2"))] == doctest::Approx(0.7));
  CHECK(c[*basis.index_of(PauliString::parse("Z0"))] == doctest::Approx(0.55));
  CHECK_FALSE(build_ising(4, 1, 0, 0.25, -0.25, Boundary::periodic).in_span(basis));
}

TEST_CASE("build_model from a spec") {
  HamiltonianSpec spec;
  spec.family = parse_family("xxz");
  spec.n_sites = 4;
  spec.parameters["Δ"] = 2.0;
  const auto h = build_model(spec);
  CHECK(h.family() == ModelFamily::xxz);
  CHECK(h.parameters().at("delta") == 2.0);
  CHECK(parse_family("mfim") == ModelFamily::ising);
  CHECK_THROWS_AS(parse_family("heisenberg"), std::invalid_argument);
  CHECK(build_ising(3, 0.1, 0.2).label() == "ising(N=3,g=0.1,h=0.2,h1=0.25,hN=-0.25,open)");
}
