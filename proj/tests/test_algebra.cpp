#include "support.hpp"

using namespace flab;
using testing_support::close;
using testing_support::mat2;

namespace {
const Complex I{0.0, 1.0};
SiteState ket0() { return SiteState::from_diagonal({1.0, 0.0}); }
SiteState biased() { return SiteState::from_diagonal({0.75, 0.25}); }
}  // namespace

TEST_CASE("expect on Pauli examples", "[algebra]") {
  CHECK(close(expect(ket0(), pauli::z()), 1.0, 1e-15));
  CHECK(close(expect(ket0(), pauli::x()), 0.0, 1e-15));
  CHECK(close(expect(biased(), pauli::z()), 0.5, 1e-15));
}

TEST_CASE("expect rejects mismatched dimensions", "[algebra]") {
  const SiteState qutrit = SiteState::from_diagonal({0.5, 0.25, 0.25});
  try {
    (void)expect(qutrit, pauli::x());
    FAIL("expected a dimension error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension_mismatch);
  }
}

TEST_CASE("center subtracts the mean", "[algebra]") {
  CHECK(center(pauli::x(), ket0()) == pauli::x());
  CHECK(op_norm(center(pauli::id(), biased())) == 0.0);
  const SiteOperator c = center(pauli::z(), biased());
  CHECK((c.matrix() - (pauli::z() - 0.5 * pauli::id()).matrix()).norm() < 1e-15);
}

TEST_CASE("commutators of Paulis", "[algebra]") {
  CHECK((commutator(pauli::x(), pauli::y()).matrix() - 2.0 * I * pauli::z().matrix()).norm() < 1e-15);
  CHECK((commutator(pauli::y(), pauli::z()).matrix() - 2.0 * I * pauli::x().matrix()).norm() < 1e-15);
  CHECK(op_norm(commutator(pauli::x(), pauli::x())) == 0.0);
}

TEST_CASE("operator norm", "[algebra]") {
  CHECK(op_norm(pauli::x()) == Catch::Approx(1.0).margin(1e-12));
  CHECK(op_norm(SiteOperator::identity(3)) == Catch::Approx(1.0).margin(1e-12));
  CHECK(op_norm(2.0 * pauli::z() + pauli::id()) == Catch::Approx(3.0).margin(1e-10));
}

TEST_CASE("ordered products", "[algebra]") {
  const std::vector<SiteOperator> xx{pauli::x(), pauli::x()};
  const std::vector<SiteOperator> xy{pauli::x(), pauli::y()};
  const std::vector<SiteOperator> x{pauli::x()};
  CHECK(ordered_product(xx) == pauli::id());
  CHECK((ordered_product(xy).matrix() - I * pauli::z().matrix()).norm() < 1e-15);
  CHECK(ordered_product(x) == pauli::x());
  CHECK_THROWS_AS(ordered_product(std::vector<SiteOperator>{}), Error);
}

TEST_CASE("site states are validated, not repaired", "[algebra]") {
  CHECK_THROWS_AS(SiteState(mat2(0.5, 0.1, 0.0, 0.5)), Error);   // not Hermitian
  CHECK_THROWS_AS(SiteState(mat2(0.6, 0.0, 0.0, 0.5)), Error);   // trace 1.1
  CHECK_THROWS_AS(SiteState(mat2(1.5, 0.0, 0.0, -0.5)), Error);  // negative eigenvalue
  CHECK_NOTHROW(SiteState(mat2(0.5, 0.5, 0.5, 0.5)));
  Vector plus(2);
  plus << 1.0, 1.0;
  CHECK(close(expect(SiteState::pure(plus), pauli::x()), 1.0, 1e-15));
}

TEST_CASE("operators reject non-finite or non-square input", "[algebra]") {
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(SiteOperator(bad), Error);
  CHECK_THROWS_AS(SiteOperator(Matrix::Zero(2, 3)), Error);
  CHECK_THROWS_AS(pauli::x() + SiteOperator::identity(3), Error);
}

TEST_CASE("hermitian basis is orthogonal and complete", "[algebra]") {
  for (Eigen::Index d : {1, 2, 3, 4}) {
    const auto basis = hermitian_basis(d);
    REQUIRE(basis.size() == static_cast<std::size_t>(d * d));
    Matrix gram(d * d, d * d);
    for (Eigen::Index i = 0; i < d * d; ++i) {
      CHECK((basis[i].matrix() - basis[i].adjoint().matrix()).norm() < 1e-15);
      for (Eigen::Index j = 0; j < d * d; ++j) gram(i, j) = (basis[i].matrix() * basis[j].matrix()).trace();
    }
    const Matrix off = gram - Matrix(gram.diagonal().asDiagonal());
    CHECK(off.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(gram.diagonal().cwiseAbs().minCoeff() > 0.5);
  }
}

TEST_CASE("unit directions have unit norm", "[algebra]") {
  for (const auto& a : unit_hermitian_directions(2)) CHECK(op_norm(a) == Catch::Approx(1.0).margin(1e-12));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    CHECK(op_norm(random_unit_hermitian(3, rng)) == Catch::Approx(1.0).margin(1e-12));
    CHECK(op_norm(random_unit_operator(2, rng)) == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("property: centering, adjoint involution, linearity", "[algebra][property]") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = 2 + trial % 3;
    const SiteState rho = testing_support::random_state(d, rng);
    const SiteOperator a = random_unit_operator(d, rng);
    const SiteOperator b = random_unit_operator(d, rng);
    CHECK(std::abs(expect(rho, center(a, rho))) <= 1e-12);
    CHECK(a.adjoint().adjoint() == a);
    const Complex alpha{g(rng), g(rng)};
    const Complex beta{g(rng), g(rng)};
    CHECK(close(expect(rho, alpha * a + beta * b), alpha * expect(rho, a) + beta * expect(rho, b), 1e-12));
    const SiteOperator h = random_unit_hermitian(d, rng);
    CHECK(std::abs(expect(rho, h).imag()) <= 1e-12);
  }
}

TEST_CASE("property: operator norm is submultiplicative", "[algebra][property]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> scale(0.1, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const SiteOperator a = scale(rng) * random_unit_operator(2, rng);
    const SiteOperator b = scale(rng) * random_unit_operator(2, rng);
    CHECK(op_norm(a * b) <= op_norm(a) * op_norm(b) + 1e-9);
  }
}
