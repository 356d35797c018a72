#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "flab/core.hpp"

namespace flab {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// A d x d complex matrix acting on one lattice site.
class SiteOperator {
 public:
  SiteOperator() = default;

  explicit SiteOperator(Matrix m) : m_(std::move(m)) {
    require(m_.rows() > 0 && m_.rows() == m_.cols(), ErrorKind::invalid_argument,
            "site operator must be a nonempty square matrix");
    require(m_.allFinite(), ErrorKind::invalid_argument,
            "site operator has non-finite entries");
  }

  static SiteOperator identity(Eigen::Index d) {
    return SiteOperator(Matrix::Identity(d, d));
  }
  static SiteOperator zero(Eigen::Index d) { return SiteOperator(Matrix::Zero(d, d)); }

  [[nodiscard]] Eigen::Index dim() const noexcept { return m_.rows(); }
  [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }
  [[nodiscard]] Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  [[nodiscard]] SiteOperator adjoint() const { return SiteOperator(m_.adjoint()); }

  friend bool operator==(const SiteOperator& a, const SiteOperator& b) {
    return a.dim() == b.dim() && a.m_ == b.m_;
  }

  friend SiteOperator operator+(const SiteOperator& a, const SiteOperator& b) {
    check_dims(a, b);
    return SiteOperator(a.m_ + b.m_);
  }
  friend SiteOperator operator-(const SiteOperator& a, const SiteOperator& b) {
    check_dims(a, b);
    return SiteOperator(a.m_ - b.m_);
  }
  friend SiteOperator operator*(const SiteOperator& a, const SiteOperator& b) {
    check_dims(a, b);
    return SiteOperator(a.m_ * b.m_);
  }
  friend SiteOperator operator*(Complex c, const SiteOperator& a) {
    return SiteOperator(c * a.m_);
  }
  friend SiteOperator operator*(const SiteOperator& a, Complex c) { return c * a; }
  friend SiteOperator operator*(double c, const SiteOperator& a) { return Complex(c) * a; }

  static void check_dims(const SiteOperator& a, const SiteOperator& b) {
    if (a.dim() != b.dim()) {
      fail(ErrorKind::dimension_mismatch, "site operator dimensions differ");
    }
  }

 private:
  Matrix m_;
};

namespace pauli {

inline SiteOperator id() { return SiteOperator::identity(2); }

inline SiteOperator x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return SiteOperator(m);
}

inline SiteOperator y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return SiteOperator(m);
}

inline SiteOperator z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return SiteOperator(m);
}

}  // namespace pauli

/// Single-site density matrix. Validated on construction, never repaired.
class SiteState {
 public:
  static constexpr double kTolerance = 1e-12;

  explicit SiteState(Matrix rho) : rho_(std::move(rho)) {
    require(rho_.rows() > 0 && rho_.rows() == rho_.cols(), ErrorKind::invalid_argument,
            "density matrix must be a nonempty square matrix");
    require(rho_.allFinite(), ErrorKind::invalid_argument,
            "density matrix has non-finite entries");
    const double herm_dev = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
    require(herm_dev <= kTolerance, ErrorKind::invalid_argument,
            "density matrix is not Hermitian");
    require(std::abs(rho_.trace() - Complex(1.0)) <= kTolerance,
            ErrorKind::invalid_argument, "density matrix trace differs from 1");
    const Matrix herm = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -kTolerance, ErrorKind::invalid_argument,
            "density matrix has a negative eigenvalue");
  }

  static SiteState from_diagonal(const std::vector<double>& p) {
    Matrix rho = Matrix::Zero(static_cast<Eigen::Index>(p.size()),
                              static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) {
      rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = p[i];
    }
    return SiteState(rho);
  }

  /// |psi><psi| for a (not necessarily normalized) vector.
  static SiteState pure(const Vector& psi) {
    require(psi.size() > 0 && psi.norm() > 0, ErrorKind::invalid_argument,
            "pure state vector must be nonzero");
    const Vector v = psi / psi.norm();
    Matrix rho = v * v.adjoint();
    rho = (0.5 * (rho + rho.adjoint())).eval();
    return SiteState(rho);
  }

  [[nodiscard]] Eigen::Index dim() const noexcept { return rho_.rows(); }
  [[nodiscard]] const Matrix& rho() const noexcept { return rho_; }

 private:
  Matrix rho_;
};

inline Complex expect(const SiteState& state, const SiteOperator& a) {
  if (state.dim() != a.dim()) {
    fail(ErrorKind::dimension_mismatch, "state and operator dimensions differ");
  }
  return (state.rho() * a.matrix()).trace();
}

/// a - omega(a) 1, the part of a in the kernel of the state.
inline SiteOperator center(const SiteOperator& a, const SiteState& state) {
  const Complex mean = expect(state, a);
  return a - mean * SiteOperator::identity(a.dim());
}

inline SiteOperator commutator(const SiteOperator& a, const SiteOperator& b) {
  return a * b - b * a;
}

/// Largest singular value.
inline double op_norm(const SiteOperator& a) {
  Eigen::JacobiSVD<Matrix> svd(a.matrix());
  return svd.singularValues()(0);
}

inline SiteOperator ordered_product(std::span<const SiteOperator> ops) {
  require(!ops.empty(), ErrorKind::invalid_argument, "ordered product of an empty sequence");
  SiteOperator out = ops.front();
  for (std::size_t i = 1; i < ops.size(); ++i) out = out * ops[i];
  return out;
}

/// Identity followed by the generalized Gell-Mann matrices (symmetric,
/// antisymmetric, diagonal). For d = 2 this is (1, sigma_x, sigma_y, sigma_z).
/// The elements are Hilbert-Schmidt orthogonal.
inline std::vector<SiteOperator> hermitian_basis(Eigen::Index d) {
  std::vector<SiteOperator> out;
  out.push_back(SiteOperator::identity(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = j + 1; k < d; ++k) {
      Matrix sym = Matrix::Zero(d, d);
      sym(j, k) = 1;
      sym(k, j) = 1;
      out.emplace_back(sym);
      Matrix anti = Matrix::Zero(d, d);
      anti(j, k) = Complex(0, -1);
      anti(k, j) = Complex(0, 1);
      out.emplace_back(anti);
    }
  }
  for (Eigen::Index l = 1; l < d; ++l) {
    Matrix diag = Matrix::Zero(d, d);
    const double c = std::sqrt(2.0 / static_cast<double>(l * (l + 1)));
    for (Eigen::Index j = 0; j < l; ++j) diag(j, j) = c;
    diag(l, l) = -c * static_cast<double>(l);
    out.emplace_back(diag);
  }
  return out;
}

/// Unit-norm Hermitian search directions: the traceless basis elements and
/// their normalized pairwise sums and differences, then the identity.
inline std::vector<SiteOperator> unit_hermitian_directions(Eigen::Index d) {
  const auto basis = hermitian_basis(d);
  std::vector<SiteOperator> traceless(basis.begin() + 1, basis.end());
  std::vector<SiteOperator> out;
  for (const auto& b : traceless) out.push_back((1.0 / op_norm(b)) * b);
  for (std::size_t i = 0; i < traceless.size(); ++i) {
    for (std::size_t j = i + 1; j < traceless.size(); ++j) {
      for (double sign : {1.0, -1.0}) {
        const SiteOperator c = traceless[i] + sign * traceless[j];
        out.push_back((1.0 / op_norm(c)) * c);
      }
    }
  }
  out.push_back(SiteOperator::identity(d));
  return out;
}

/// Random Hermitian operator of unit operator norm (GUE-like draw).
inline SiteOperator random_unit_hermitian(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = Complex(g(rng), g(rng));
  }
  m = (0.5 * (m + m.adjoint())).eval();
  SiteOperator a(m);
  return (1.0 / op_norm(a)) * a;
}

/// Random complex (generally non-normal) operator of unit operator norm.
inline SiteOperator random_unit_operator(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = Complex(g(rng), g(rng));
  }
  SiteOperator a(m);
  return (1.0 / op_norm(a)) * a;
}

}  // namespace flab
