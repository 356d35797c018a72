#pragma once

#include <complex>
#include <random>
#include <vector>

#include <catch_amalgamated.hpp>

#include "flab/flab.hpp"

namespace testing_support {

inline bool close(std::complex<double> a, std::complex<double> b, double tol) { return std::abs(a - b) <= tol; }

inline flab::Matrix mat2(std::complex<double> a, std::complex<double> b, std::complex<double> c,
                         std::complex<double> d) {
  flab::Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline Eigen::MatrixXd symmetric_chain(double p) {
  Eigen::MatrixXd t(2, 2);
  t << 1 - p, p, p, 1 - p;
  return t;
}

/// Random density matrix of dimension d (Wishart, normalized).
inline flab::SiteState random_state(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  flab::Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = {g(rng), g(rng)};
  }
  flab::Matrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  rho = (0.5 * (rho + rho.adjoint())).eval();
  return flab::SiteState(rho);
}

inline flab::Matrix random_unitary(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  flab::Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = {g(rng), g(rng)};
  }
  Eigen::HouseholderQR<flab::Matrix> qr(a);
  return qr.householderQ() * flab::Matrix::Identity(d, d);
}

inline flab::Matrix cz_gate() {
  flab::Matrix g = flab::Matrix::Identity(4, 4);
  g(3, 3) = -1;
  return g;
}

inline flab::Vector plus_state() {
  flab::Vector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return v;
}

inline std::vector<flab::Matrix> matrices(const flab::TensorWord& w) {
  std::vector<flab::Matrix> out;
  for (const auto& f : w.factors) out.push_back(f.matrix());
  return out;
}

inline std::vector<int> int_sites(const flab::Region& x) {
  std::vector<int> out;
  for (auto s : x.sites()) out.push_back(static_cast<int>(s));
  return out;
}

}  // namespace testing_support
