#include "support.hpp"

using namespace flab;
using testing_support::close;

namespace {
const Complex I{0.0, 1.0};
SiteState ket0() { return SiteState::from_diagonal({1.0, 0.0}); }
SiteOperator one() { return SiteOperator::identity(1); }

TensorWord random_word(std::size_t n, Eigen::Index d, std::mt19937_64& rng) {
  TensorWord w;
  for (std::size_t i = 0; i < n; ++i) w.factors.push_back(random_unit_operator(d, rng));
  return w;
}

Covariance random_covariance(Eigen::Index d, std::mt19937_64& rng) {
  const Eigen::Index n = d * d;
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return Covariance(d, (a * a.adjoint() / static_cast<double>(n)).eval());
}

TensorWord drop_pair(const TensorWord& w, std::size_t j) {
  TensorWord out;
  for (std::size_t i = 1; i < w.degree(); ++i)
    if (i != j) out.factors.push_back(w.factors[i]);
  return out;
}
}  // namespace

TEST_CASE("covariance of the |0> state", "[gaussian]") {
  const Covariance w = covariance_from_state(ket0());
  CHECK(close(w(pauli::x(), pauli::x()), 1.0, 1e-15));
  CHECK(close(w(pauli::x(), pauli::y()), I, 1e-15));
  CHECK(close(w(pauli::z(), pauli::z()), 0.0, 1e-15));
  CHECK(close(w(pauli::id(), pauli::x()), 0.0, 1e-15));
}

TEST_CASE("covariance matches its defining formula on random states", "[gaussian]") {
  std::mt19937_64 rng(41);
  for (Eigen::Index d : {2, 3}) {
    const SiteState s = testing_support::random_state(d, rng);
    const Covariance w = covariance_from_state(s);
    for (int t = 0; t < 20; ++t) {
      const SiteOperator a = random_unit_operator(d, rng);
      const SiteOperator b = random_unit_operator(d, rng);
      CHECK(close(w(a, b), expect(s, a * b) - expect(s, a) * expect(s, b), 1e-12));
    }
  }
}

TEST_CASE("covariance input validation", "[gaussian]") {
  Matrix bad(4, 4);
  bad.setZero();
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(Covariance(2, bad), Error);
  bad.setZero();
  bad(3, 3) = -1.0;
  CHECK_THROWS_AS(Covariance(2, bad), Error);
  CHECK_THROWS_AS(Covariance(2, Matrix::Identity(3, 3)), Error);
  CHECK_THROWS_AS(ShiftFunctional(1, Vector::Constant(1, Complex(0.0, 1.0))), Error);
}

TEST_CASE("Wick moments", "[gaussian]") {
  const Covariance s1 = Covariance::scalar(1.0);
  CHECK(close(wick_moment(s1, TensorWord{}), 1.0, 0.0));
  CHECK(close(wick_moment(s1, TensorWord{one()}), 0.0, 0.0));
  CHECK(close(wick_moment(s1, TensorWord{one(), one(), one(), one()}), 3.0, 1e-14));
  CHECK(close(wick_moment(s1, TensorWord(std::vector<SiteOperator>(6, one()))), 15.0, 1e-13));
  CHECK(close(wick_moment(s1, TensorWord(std::vector<SiteOperator>(5, one()))), 0.0, 0.0));
  const Covariance w = covariance_from_state(ket0());
  CHECK(close(wick_moment(w, TensorWord{pauli::x(), pauli::y()}), w(pauli::x(), pauli::y()), 0.0));
  CHECK(close(wick_moment(w, TensorWord{pauli::x(), pauli::x(), pauli::x(), pauli::x()}), 3.0, 1e-14));
  try {
    (void)wick_moment(s1, TensorWord(std::vector<SiteOperator>(14, one())));
    FAIL("expected a cost guard");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::cost_guard);
  }
}

TEST_CASE("property: Wick recursion along the first leg", "[gaussian][property]") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index d = 2 + trial % 2;
    const Covariance w = random_covariance(d, rng);
    const std::size_t n = 2 + 2 * static_cast<std::size_t>(trial % 4);
    const TensorWord word = random_word(n, d, rng);
    KahanSum<Complex> rec;
    for (std::size_t j = 1; j < n; ++j) rec += w(word.factors[0], word.factors[j]) * wick_moment(w, drop_pair(word, j));
    CHECK(close(wick_moment(w, word), rec.value(), 1e-10 * (1.0 + std::abs(rec.value()))));
  }
}

TEST_CASE("property: Wick positivity", "[gaussian][property]") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = 2 + trial % 2;
    const Covariance w = trial % 2 ? random_covariance(d, rng) : covariance_from_state(testing_support::random_state(d, rng));
    const SiteOperator a = random_unit_operator(d, rng);
    const Complex v = wick_moment(w, TensorWord{a.adjoint(), a});
    CHECK(v.real() >= -1e-10);
    CHECK(std::abs(v.imag()) <= 1e-10);
  }
}

TEST_CASE("shifted Wick moments", "[gaussian]") {
  const Covariance s1 = Covariance::scalar(1.0);
  const ShiftFunctional m = ShiftFunctional::constant(0.7);
  CHECK(close(shifted_wick_moment(s1, m, TensorWord{one(), one()}), 1.0 + 0.49, 1e-14));
  CHECK(close(shifted_wick_moment(s1, m, TensorWord{one()}), 0.7, 1e-15));
  // Gaussian fourth moment with mean m: m^4 + 6 m^2 + 3
  CHECK(close(shifted_wick_moment(s1, m, TensorWord(std::vector<SiteOperator>(4, one()))),
              0.2401 + 6.0 * 0.49 + 3.0, 1e-13));
  std::mt19937_64 rng(44);
  const Covariance w = random_covariance(2, rng);
  const ShiftFunctional zero(2, Vector::Zero(4));
  for (std::size_t n = 0; n <= 6; ++n) {
    const TensorWord word = random_word(n, 2, rng);
    CHECK(close(shifted_wick_moment(w, zero, word), wick_moment(w, word), 1e-12));
  }
  Vector c(4);
  c << 0.1, -0.4, 0.3, 0.2;
  const ShiftFunctional u(2, c);
  const SiteOperator a = random_unit_operator(2, rng);
  CHECK(close(shifted_wick_moment(w, u, TensorWord{a}), u(w, a), 1e-14));
  CHECK(close(u(w, a.adjoint()), std::conj(u(w, a)), 1e-14));
  CHECK_THROWS_AS(shifted_wick_moment(s1, m, TensorWord(std::vector<SiteOperator>(11, one()))), Error);
}

TEST_CASE("difference bound for quasi-free states: scalar saturation", "[gaussian]") {
  const Covariance w1 = Covariance::scalar(1.0);
  const Covariance w2 = Covariance::scalar(2.0);
  const auto two = prop1_bound_check(w1, w2, TensorWord{one(), one()});
  CHECK(close(two.lhs, 1.0, 1e-14));
  CHECK(close(two.rhs, 1.0, 1e-12));
  CHECK(two.pass);
  CHECK_FALSE(two.disagreement);
  const auto four = prop1_bound_check(w1, w2, TensorWord(std::vector<SiteOperator>(4, one())));
  CHECK(close(four.lhs, 9.0, 1e-12));
  CHECK(close(four.rhs, 9.0, 1e-10));
  CHECK(four.pass);
  const auto same = prop1_bound_check(w1, w1, TensorWord{one(), one()});
  CHECK(same.lhs == 0.0);
  CHECK(same.rhs == 0.0);
  CHECK(same.pass);
  CHECK_THROWS_AS(prop1_bound_check(w1, w2, TensorWord{one(), one(), one()}), Error);
}

TEST_CASE("property: difference bound on random covariance pairs", "[gaussian][property]") {
  std::mt19937_64 rng(45);
  int disagreements = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index d = 2;
    const Covariance w = trial % 2 ? random_covariance(d, rng) : covariance_from_state(testing_support::random_state(d, rng));
    const Covariance wp = covariance_from_state(testing_support::random_state(d, rng));
    const std::size_t n = 2 + 2 * static_cast<std::size_t>(trial % 3);
    const auto r = prop1_bound_check(w, wp, random_word(n, d, rng));
    CHECK(r.pass);
    CHECK(r.norm_w > 0.0);
    disagreements += r.disagreement ? 1 : 0;
  }
  CHECK(disagreements == 0);
}

TEST_CASE("covariance norm estimates", "[gaussian]") {
  CHECK(close(covariance_norm_estimate(Covariance::scalar(2.0)).value, 2.0, 1e-14));
  // |0>: |W(a,b)| <= ||a|| ||b|| and the unit pair (sigma_x, sigma_x) attains 1
  const auto est = covariance_norm_estimate(covariance_from_state(ket0()));
  CHECK(est.value >= 1.0 - 1e-12);
  CHECK(est.value <= 1.0 + 1e-9);
}

TEST_CASE("gamma consistency", "[gaussian]") {
  const Covariance w = covariance_from_state(ket0());
  CHECK(close(w(pauli::x(), pauli::y()) - w(pauli::y(), pauli::x()), 2.0 * I, 1e-15));
  CHECK(gamma_consistency(w, ket0()).pass);
  const SiteState biased = SiteState::from_diagonal({0.75, 0.25});
  const Covariance wb = covariance_from_state(biased);
  CHECK(close(wb(pauli::x(), pauli::y()) - wb(pauli::y(), pauli::x()), I, 1e-15));
  CHECK(close(wb(pauli::z(), pauli::z()) - wb(pauli::z(), pauli::z()), 0.0, 0.0));
  std::mt19937_64 rng(46);
  for (Eigen::Index d : {2, 3, 4}) {
    const SiteState s = testing_support::random_state(d, rng);
    const auto r = gamma_consistency(covariance_from_state(s), s);
    CHECK(r.pass);
    CHECK(r.max_dev <= 1e-12);
  }
  // a covariance from another state carries the wrong symplectic part
  CHECK_FALSE(gamma_consistency(covariance_from_state(biased), ket0()).pass);
}

TEST_CASE("property: product-state moments approach the Wick value like 1/|X|", "[gaussian][property]") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 4; ++trial) {
    const SiteState rho = testing_support::random_state(2, rng);
    const Covariance w = covariance_from_state(rho);
    for (std::size_t n : {4u, 6u}) {
      TensorWord word;
      for (std::size_t i = 0; i < n; ++i) {
        const SiteOperator a = random_unit_operator(2, rng);
        word.factors.push_back(a - expect(rho, a) * pauli::id());
      }
      const Complex limit = wick_moment(w, word);
      double k_fit = 0.0;
      std::vector<double> scaled;
      for (std::size_t size = 4; size <= 64; size *= 2) {
        const Complex v = product_part_moment(rho, Region::segment(0, size), word);
        const double err = std::abs(v - limit) * static_cast<double>(size);
        scaled.push_back(err);
        if (size <= 16) k_fit = std::max(k_fit, err);
      }
      for (double e : scaled) CHECK(e <= 1.25 * k_fit + 1e-10);
    }
  }
}
