#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "flab/algebra.hpp"
#include "flab/combinatorics.hpp"
#include "flab/fluctuations.hpp"

namespace flab {

/// Bilinear form W on the site algebra, stored as its matrix against
/// hermitian_basis(d): W(a, b) = alpha(a)^T M alpha(b). Positivity
/// W(a*, a) >= 0 is exactly "M Hermitian positive semidefinite".
class Covariance {
 public:
  Covariance(Eigen::Index d, Matrix m) : d_(d), m_(std::move(m)), basis_(hermitian_basis(d)) {
    const Eigen::Index n = d * d;
    require(d >= 1 && m_.rows() == n && m_.cols() == n, ErrorKind::dimension_mismatch,
            "covariance matrix must be d^2 x d^2");
    require(m_.allFinite(), ErrorKind::invalid_argument, "covariance has non-finite entries");
    require((m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= 1e-10, ErrorKind::invalid_argument,
            "covariance violates positivity: W(a*, a) is not real");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m_ + m_.adjoint()), Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -1e-10, ErrorKind::invalid_argument,
            "covariance violates positivity: W(a*, a) < 0 for some a");
    for (const auto& b : basis_) hs_norms_.push_back((b.matrix() * b.matrix()).trace().real());
  }

  /// One-dimensional site algebra with W(1, 1) = w.
  static Covariance scalar(double w) {
    Matrix m(1, 1);
    m(0, 0) = w;
    return Covariance(1, m);
  }

  [[nodiscard]] Eigen::Index dim() const noexcept { return d_; }
  [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }
  [[nodiscard]] const std::vector<SiteOperator>& basis() const noexcept { return basis_; }

  [[nodiscard]] Vector coefficients(const SiteOperator& a) const {
    require(a.dim() == d_, ErrorKind::dimension_mismatch, "operator dimension differs from covariance");
    Vector c(static_cast<Eigen::Index>(basis_.size()));
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      c(static_cast<Eigen::Index>(i)) = (basis_[i].matrix() * a.matrix()).trace() / hs_norms_[i];
    }
    return c;
  }

  [[nodiscard]] Complex operator()(const SiteOperator& a, const SiteOperator& b) const {
    return coefficients(a).transpose() * m_ * coefficients(b);
  }

 private:
  Eigen::Index d_;
  Matrix m_;
  std::vector<SiteOperator> basis_;
  std::vector<double> hs_norms_;
};

/// W(a, b) = omega(ab) - omega(a) omega(b).
inline Covariance covariance_from_state(const SiteState& state) {
  const auto basis = hermitian_basis(state.dim());
  const auto n = static_cast<Eigen::Index>(basis.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& bi = basis[static_cast<std::size_t>(i)];
      const auto& bj = basis[static_cast<std::size_t>(j)];
      m(i, j) = expect(state, bi * bj) - expect(state, bi) * expect(state, bj);
    }
  }
  return Covariance(state.dim(), m);
}

using BilinearForm = std::function<Complex(const SiteOperator&, const SiteOperator&)>;

struct NormEstimate {
  double value = 0.0;
  SiteOperator left, right;
};

/// Lower bound on sup |B(v1, v2)| over unit operator-norm v1, v2 (complex,
/// not necessarily Hermitian).
inline NormEstimate bilinear_norm_estimate(const BilinearForm& form, Eigen::Index d,
                                           const SearchOptions& opts = {}) {
  std::vector<SiteOperator> cands = unit_hermitian_directions(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      Matrix e = Matrix::Zero(d, d);
      e(i, j) = 1.0;
      cands.emplace_back(e);
    }
  }
  NormEstimate best;
  auto consider = [&](const SiteOperator& a, const SiteOperator& b) {
    const double v = std::abs(form(a, b));
    if (best.left.dim() == 0 || v > best.value) best = {v, a, b};
    return v;
  };
  for (const auto& a : cands) {
    for (const auto& b : cands) consider(a, b);
  }
  std::mt19937_64 rng(opts.seed);
  for (std::size_t s = 0; s < 4 * opts.budget; ++s) {
    SiteOperator a = random_unit_operator(d, rng);
    SiteOperator b = random_unit_operator(d, rng);
    double cur = consider(a, b);
    double step = 0.5;
    for (std::size_t sweep = 0; sweep < 3 * opts.sweeps; ++sweep, step *= 0.7) {
      for (int slot = 0; slot < 2; ++slot) {
        for (std::size_t t = 0; t < opts.trials; ++t) {
          SiteOperator moved = (slot == 0 ? a : b) + step * random_unit_operator(d, rng);
          moved = (1.0 / op_norm(moved)) * moved;
          const double v = slot == 0 ? consider(moved, b) : consider(a, moved);
          if (v > cur) {
            cur = v;
            (slot == 0 ? a : b) = moved;
          }
        }
      }
    }
  }
  return best;
}

inline NormEstimate covariance_norm_estimate(const Covariance& w, const SearchOptions& opts = {}) {
  return bilinear_norm_estimate([&w](const auto& a, const auto& b) { return w(a, b); }, w.dim(), opts);
}

/// Quasi-free moment: sum over perfect matchings of prod W(v_i, v_j), i < j.
inline Complex wick_moment(const Covariance& w, const TensorWord& word) {
  const std::size_t n = word.degree();
  if (n > 12) fail(ErrorKind::cost_guard, "wick_moment: n > 12 exceeds the cost guard");
  if (n == 0) return 1.0;
  if (n % 2 == 1) return 0.0;
  std::vector<std::vector<Complex>> pair(n, std::vector<Complex>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pair[i][j] = w(word.factors[i], word.factors[j]);
  }
  KahanSum<Complex> total;
  for (const auto& p : pair_partitions(static_cast<int>(n))) {
    Complex term = 1.0;
    for (const auto& [i, j] : p.pairs) {
      term *= pair[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
    }
    total += term;
  }
  return total.value();
}

/// Real linear functional u on the site algebra: u(a) = sum_i alpha_i(a) c_i
/// with real coefficients c against hermitian_basis(d), so u(a*) = conj(u(a)).
class ShiftFunctional {
 public:
  ShiftFunctional(Eigen::Index d, Vector coeffs) : d_(d), c_(std::move(coeffs)) {
    require(c_.size() == d * d, ErrorKind::dimension_mismatch, "shift functional needs d^2 coefficients");
    require(c_.imag().cwiseAbs().maxCoeff() <= 1e-12, ErrorKind::invalid_argument,
            "shift functional violates the reality condition u(a*) = conj(u(a))");
  }

  static ShiftFunctional constant(double m) {
    Vector c(1);
    c(0) = m;
    return ShiftFunctional(1, c);
  }

  [[nodiscard]] Complex operator()(const Covariance& w, const SiteOperator& a) const {
    require(w.dim() == d_, ErrorKind::dimension_mismatch, "shift functional dimension differs");
    return w.coefficients(a).transpose() * c_;
  }

 private:
  Eigen::Index d_;
  Vector c_;
};

/// (omega_W o alpha_u)(v_1 ... v_n): binomial expansion of Phi(v) + u(v) 1.
inline Complex shifted_wick_moment(const Covariance& w, const ShiftFunctional& u,
                                   const TensorWord& word) {
  const std::size_t n = word.degree();
  if (n > 10) fail(ErrorKind::cost_guard, "shifted_wick_moment: n > 10 exceeds the cost guard");
  std::vector<Complex> shifts;
  for (const auto& f : word.factors) shifts.push_back(u(w, f));
  KahanSum<Complex> total;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    TensorWord sub;
    Complex weight = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) {
        sub.factors.push_back(word.factors[i]);
      } else {
        weight *= shifts[i];
      }
    }
    if (sub.degree() % 2 == 1) continue;
    total += weight * wick_moment(w, sub);
  }
  return total.value();
}

struct Prop1Check {
  double lhs = 0.0;
  double rhs = 0.0;         // with the search norm estimates
  double rhs_padded = 0.0;  // every norm estimate inflated by 5%
  double norm_w = 0.0;
  double norm_w_prime = 0.0;
  double norm_diff = 0.0;
  bool pass = false;
  bool disagreement = false;  // lhs exceeds the unpadded rhs
};

/// |omega_W - omega_W'| on a unit-normalized word against
/// ||W - W'|| |Pi_2(n)| sum_k ||W||^{k-1} ||W'||^{n/2-k}.
inline Prop1Check prop1_bound_check(const Covariance& w, const Covariance& wp,
                                    const TensorWord& word, const SearchOptions& opts = {}) {
  const std::size_t n = word.degree();
  require(n % 2 == 0 && n >= 2, ErrorKind::invalid_argument, "difference bound check needs even n >= 2");
  if (n > 8) fail(ErrorKind::cost_guard, "prop1_bound_check: n > 8 exceeds the cost guard");
  require(w.dim() == wp.dim(), ErrorKind::dimension_mismatch, "covariances differ in dimension");
  TensorWord unit;
  for (const auto& f : word.factors) unit.factors.push_back((1.0 / op_norm(f)) * f);
  Prop1Check r;
  r.lhs = std::abs(wick_moment(w, unit) - wick_moment(wp, unit));
  r.norm_w = covariance_norm_estimate(w, opts).value;
  r.norm_w_prime = covariance_norm_estimate(wp, opts).value;
  r.norm_diff = bilinear_norm_estimate(
                    [&](const auto& a, const auto& b) { return w(a, b) - wp(a, b); }, w.dim(), opts)
                    .value;
  const auto pairings = static_cast<double>(pair_partitions(static_cast<int>(n)).size());
  auto rhs_with = [&](double pad) {
    double sum = 0.0;
    const int half = static_cast<int>(n / 2);
    for (int k = 1; k <= half; ++k) {
      sum += std::pow(pad * r.norm_w, k - 1) * std::pow(pad * r.norm_w_prime, half - k);
    }
    return pad * r.norm_diff * pairings * sum;
  };
  r.rhs = rhs_with(1.0);
  r.rhs_padded = rhs_with(1.05);
  r.pass = r.lhs <= r.rhs_padded + 1e-12;
  r.disagreement = r.lhs > r.rhs + 1e-12;
  return r;
}

struct GammaConsistency {
  double max_dev = 0.0;
  bool pass = false;
};

/// W(a*, b) - W(b, a*) = omega([a*, b]) over all basis pairs.
inline GammaConsistency gamma_consistency(const Covariance& w, const SiteState& state) {
  require(w.dim() == state.dim(), ErrorKind::dimension_mismatch, "covariance and state dimensions differ");
  GammaConsistency r;
  for (const auto& a : w.basis()) {
    for (const auto& b : w.basis()) {
      const SiteOperator as = a.adjoint();
      const Complex lhs = w(as, b) - w(b, as);
      r.max_dev = std::max(r.max_dev, std::abs(lhs - gamma_form(state, a, b)));
    }
  }
  r.pass = r.max_dev <= 1e-12;
  return r;
}

}  // namespace flab
