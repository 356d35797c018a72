#include "support.hpp"

#include "oracles.hpp"

using namespace flab;
using testing_support::close;

namespace {
SiteState ket0() { return SiteState::from_diagonal({1.0, 0.0}); }

GlobalState markov_p02() { return GlobalState::markov(testing_support::symmetric_chain(0.2), 0.4); }

/// Random 3-state column-stochastic chain with strictly positive entries.
Eigen::MatrixXd random_chain(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  Eigen::MatrixXd t(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) t(i, j) = u(rng);
  }
  for (int j = 0; j < 3; ++j) t.col(j) /= t.col(j).sum();
  return t;
}

double second_modulus(const Eigen::MatrixXd& t) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(t);
  std::vector<double> mods;
  for (Eigen::Index i = 0; i < t.rows(); ++i) mods.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(mods.rbegin(), mods.rend());
  return mods[1];
}

Assignment random_assignment(const std::vector<SiteId>& sites, Eigen::Index d, std::mt19937_64& rng) {
  std::vector<std::pair<SiteId, SiteOperator>> ops;
  for (SiteId s : sites) ops.emplace_back(s, random_unit_operator(d, rng));
  return Assignment(ops);
}

std::vector<std::pair<int, Matrix>> oracle_ops(const Assignment& a) {
  std::vector<std::pair<int, Matrix>> out;
  for (const auto& [s, op] : a.ops()) out.emplace_back(static_cast<int>(s), op.matrix());
  return out;
}
}  // namespace

TEST_CASE("product expectations", "[states]") {
  const auto s = GlobalState::product(ket0());
  CHECK(close(s.expect(Assignment::single(4, pauli::z())), 1.0, 1e-15));
  CHECK(close(s.expect(Assignment({{1, pauli::x()}, {3, pauli::x()}})), 0.0, 1e-15));
  CHECK(close(expect_global(s, Assignment{}), 1.0, 1e-15));
}

TEST_CASE("assignments reject duplicate sites and mixed dimensions", "[states]") {
  CHECK_THROWS_AS(Assignment({{1, pauli::x()}, {1, pauli::z()}}), Error);
  CHECK_THROWS_AS(Assignment({{1, pauli::x()}, {2, SiteOperator::identity(3)}}), Error);
}

TEST_CASE("Markov sigma_z correlations decay like 0.6^m", "[states]") {
  const auto s = markov_p02();
  for (int m = 0; m <= 10; ++m) {
    const Assignment a = m == 0 ? Assignment::single(0, pauli::z() * pauli::z())
                                : Assignment({{0, pauli::z()}, {static_cast<SiteId>(m), pauli::z()}});
    CHECK(close(s.expect(a), std::pow(0.6, m), 1e-13));
  }
  CHECK(close(s.expect(Assignment({{3, pauli::z()}, {5, pauli::z()}})), 0.36, 1e-14));
}

TEST_CASE("Markov construction is validated", "[states]") {
  Eigen::MatrixXd bad_cols(2, 2);
  bad_cols << 0.8, 0.3, 0.2, 0.8;
  CHECK_THROWS_AS(GlobalState::markov(bad_cols, 0.4), Error);
  // |lambda_2| = 0.6 > e^{-1}
  CHECK_THROWS_AS(GlobalState::markov(testing_support::symmetric_chain(0.2), 1.0), Error);
  Eigen::MatrixXd negative(2, 2);
  negative << 1.1, 0.0, -0.1, 1.0;
  CHECK_THROWS_AS(GlobalState::markov(negative, 0.1), Error);
  Eigen::VectorXd wrong_pi(2);
  wrong_pi << 0.9, 0.1;
  CHECK_THROWS_AS(GlobalState::markov(testing_support::symmetric_chain(0.2), 0.4, wrong_pi), Error);
  CHECK(markov_p02().markov_data()->lambda2 == Catch::Approx(0.6).margin(1e-12));
}

TEST_CASE("single-site restrictions", "[states]") {
  const SiteState rho = SiteState::from_diagonal({0.75, 0.25});
  CHECK((single_site_restriction(GlobalState::product(rho)).rho() - rho.rho()).norm() < 1e-15);
  CHECK((single_site_restriction(markov_p02()).rho() - Matrix::Identity(2, 2) / 2.0).norm() < 1e-12);
  Vector zero(2);
  zero << 1.0, 0.0;
  const auto ident = GlobalState::circuit(zero, 6, {Matrix::Identity(4, 4)});
  CHECK((single_site_restriction(ident).rho() - ket0().rho()).norm() < 1e-14);
  const auto cz = GlobalState::circuit(testing_support::plus_state(), 8, {testing_support::cz_gate(), testing_support::cz_gate()});
  CHECK((single_site_restriction(cz).rho() - Matrix::Identity(2, 2) / 2.0).norm() < 1e-12);
  std::mt19937_64 rng(2);
  const auto scrambled = GlobalState::circuit(zero, 6, {testing_support::random_unitary(4, rng)});
  CHECK_THROWS_AS(single_site_restriction(scrambled), Error);
}

TEST_CASE("property: product and Markov marginals are identical across sites", "[states][property]") {
  std::mt19937_64 rng(8);
  const auto p = GlobalState::product(testing_support::random_state(3, rng));
  const Eigen::MatrixXd t = random_chain(rng);
  const auto m = GlobalState::markov(t, -std::log(second_modulus(t)) * 0.999);
  for (const GlobalState* s : {&p, &m}) {
    const Matrix first = s->site_marginal(0).rho();
    for (SiteId x = -5; x <= 40; x += 3) CHECK((s->site_marginal(x).rho() - first).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("correlators", "[states]") {
  const auto prod = GlobalState::product(SiteState::from_diagonal({0.75, 0.25}));
  const Region x({0}, Metric::chain());
  const Region y({2}, Metric::chain());
  CHECK(std::abs(correlator(prod, x, y, Assignment::single(0, pauli::z()), Assignment::single(2, pauli::z())).value) < 1e-15);

  const Metric m = Metric::chain(0.4);
  const auto g = correlator(markov_p02(), Region({0}, m), Region({1}, m), Assignment::single(0, pauli::z()),
                            Assignment::single(1, pauli::z()));
  CHECK(close(g.value, 0.6 * std::exp(0.4), 1e-12));
  CHECK(close(g.value * std::exp(-g.distance), g.truncated, 1e-12));
  CHECK(g.value.real() == Catch::Approx(0.895).margin(5e-4));

  CHECK_THROWS_AS(correlator(prod, Region({0, 1}, Metric::chain()), Region({1}, Metric::chain()),
                             Assignment::single(0, pauli::z()), Assignment::single(1, pauli::z())),
                  Error);
  CHECK_THROWS_AS(correlator(prod, x, y, Assignment::single(1, pauli::z()), Assignment::single(2, pauli::z())), Error);
}

TEST_CASE("G0 estimates", "[states]") {
  CHECK(estimate_G0(GlobalState::product(ket0()), 3, 4, 50).value < 1e-14);
  const auto est = estimate_G0(markov_p02(), 3, 6, 100);
  CHECK(est.value >= 0.6 * std::exp(0.4) - 1e-12);
  CHECK(est.samples > 100);
  Vector zero(2);
  zero << 1.0, 0.0;
  CHECK(estimate_G0(GlobalState::circuit(zero, 10, {Matrix::Identity(4, 4)}), 2, 4, 50).value < 1e-14);
}

TEST_CASE("property: Markov clustering certificate from the spectral decomposition", "[states][property]") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd t = random_chain(rng);
    const double l2 = second_modulus(t);
    const auto s = GlobalState::markov(t, -std::log(l2));
    const Eigen::VectorXd& pi = s.markov_data()->pi;
    Eigen::EigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::MatrixXcd v = es.eigenvectors();
    const Eigen::MatrixXcd w = v.inverse();
    double c = 0.0;
    for (Eigen::Index k = 0; k < 3; ++k) {
      if (std::abs(es.eigenvalues()(k) - Complex(1.0)) < 1e-9) continue;
      c += v.col(k).cwiseAbs().sum() * (w.row(k).transpose().cwiseProduct(pi.cast<Complex>())).cwiseAbs().sum();
    }
    for (int draw = 0; draw < 5; ++draw) {
      Matrix a = Matrix::Zero(3, 3), b = Matrix::Zero(3, 3);
      for (int i = 0; i < 3; ++i) {
        a(i, i) = u(rng);
        b(i, i) = u(rng);
      }
      for (int m = 1; m <= 30; ++m) {
        const Assignment aa = Assignment::single(0, SiteOperator(a));
        const Assignment bb = Assignment::single(m, SiteOperator(b));
        const Complex trunc = s.expect(aa.merged(bb)) - s.expect(aa) * s.expect(bb);
        CHECK(std::abs(trunc) <= c * std::pow(l2, m) + 1e-13);
        CHECK(c * std::pow(l2, m) <= c * std::exp(-s.markov_data()->alpha * m) + 1e-13);
      }
    }
  }
}

TEST_CASE("property: circuit truncated correlations vanish outside the light cone", "[states][property]") {
  std::mt19937_64 rng(4);
  for (std::size_t depth = 1; depth <= 3; ++depth) {
    std::vector<Matrix> layers;
    for (std::size_t l = 0; l < depth; ++l) layers.push_back(testing_support::random_unitary(4, rng));
    Vector base(2);
    base << 0.6, Complex(0.0, 0.8);
    const auto s = GlobalState::circuit(base, 12, layers);
    for (SiteId x = 0; x < 12; ++x) {
      for (SiteId y = x + 2 * static_cast<SiteId>(depth) + 1; y < 12; ++y) {
        const Assignment a = Assignment::single(x, random_unit_operator(2, rng));
        const Assignment b = Assignment::single(y, random_unit_operator(2, rng));
        CHECK(std::abs(s.expect(a.merged(b)) - s.expect(a) * s.expect(b)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("circuit states are validated", "[states]") {
  Matrix not_unitary = Matrix::Identity(4, 4);
  not_unitary(0, 0) = 2.0;
  CHECK_THROWS_AS(GlobalState::circuit(testing_support::plus_state(), 4, {not_unitary}), Error);
  try {
    (void)GlobalState::circuit(testing_support::plus_state(), 15, {});
    FAIL("expected a cost guard");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::cost_guard);
  }
  const auto s = GlobalState::circuit(testing_support::plus_state(), 4, {});
  CHECK_THROWS_AS(s.expect(Assignment::single(4, pauli::x())), Error);
  CHECK_THROWS_AS(s.expect(Assignment::single(-1, pauli::x())), Error);
}

TEST_CASE("depth-zero circuits agree with product states", "[states][property]") {
  std::mt19937_64 rng(13);
  Vector base(3);
  base << Complex(0.3, 0.1), 0.5, Complex(-0.2, 0.7);
  const auto circ = GlobalState::circuit(base, 6, {});
  const auto prod = GlobalState::product(SiteState::pure(base));
  for (int trial = 0; trial < 50; ++trial) {
    const Assignment a = random_assignment({0, 2, 3, 5}, 3, rng);
    CHECK(close(circ.expect(a), prod.expect(a), 1e-12));
  }
}

TEST_CASE("oracle cross-check: expectations on dense states", "[states][oracle]") {
  std::mt19937_64 rng(17);
  const std::vector<SiteId> sites{0, 1, 3, 4, 6};
  const int length = 7;

  const SiteState rho = testing_support::random_state(2, rng);
  const auto prod = GlobalState::product(rho);
  const Matrix prod_dense = oracle::product_density(rho.rho(), length);

  Eigen::MatrixXd t2(2, 2);
  t2 << 0.7, 0.4, 0.3, 0.6;
  const auto markov = GlobalState::markov(t2, 0.2);
  const Matrix markov_dense = oracle::markov_density(t2, markov.markov_data()->pi, length);

  std::vector<Matrix> layers{testing_support::random_unitary(4, rng), testing_support::random_unitary(4, rng),
                             testing_support::random_unitary(4, rng)};
  Vector base(2);
  base << Complex(0.8, 0.0), Complex(0.0, 0.6);
  const auto circ = GlobalState::circuit(base, length, layers);
  const Matrix circ_dense = oracle::circuit_density(base, length, layers);

  for (int trial = 0; trial < 20; ++trial) {
    const Assignment a = random_assignment(sites, 2, rng);
    CHECK(close(prod.expect(a), oracle::expectation(prod_dense, length, oracle_ops(a)), 1e-12));
    CHECK(close(markov.expect(a), oracle::expectation(markov_dense, length, oracle_ops(a)), 1e-12));
    CHECK(close(circ.expect(a), oracle::expectation(circ_dense, length, oracle_ops(a)), 1e-12));
  }
}
