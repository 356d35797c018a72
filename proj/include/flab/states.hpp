#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <variant>
#include <vector>

#include "flab/algebra.hpp"
#include "flab/lattice.hpp"

namespace flab {

/// Finitely supported product of single-site operators, identity elsewhere.
/// Entries are kept sorted by site.
class Assignment {
 public:
  Assignment() = default;

  explicit Assignment(std::vector<std::pair<SiteId, SiteOperator>> ops) : ops_(std::move(ops)) {
    std::sort(ops_.begin(), ops_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      if (i > 0) {
        require(ops_[i].first != ops_[i - 1].first, ErrorKind::invalid_argument,
                "assignment lists a site twice");
      }
      require(ops_[i].second.dim() == ops_.front().second.dim(),
              ErrorKind::dimension_mismatch, "assignment operators differ in dimension");
    }
  }

  static Assignment single(SiteId site, SiteOperator op) {
    return Assignment({{site, std::move(op)}});
  }

  [[nodiscard]] const std::vector<std::pair<SiteId, SiteOperator>>& ops() const noexcept {
    return ops_;
  }
  [[nodiscard]] std::size_t size() const noexcept { return ops_.size(); }
  [[nodiscard]] bool empty() const noexcept { return ops_.empty(); }

  [[nodiscard]] std::vector<SiteId> support() const {
    std::vector<SiteId> s;
    s.reserve(ops_.size());
    for (const auto& [site, op] : ops_) s.push_back(site);
    return s;
  }

  /// Product with an assignment on disjoint sites.
  [[nodiscard]] Assignment merged(const Assignment& other) const {
    auto all = ops_;
    all.insert(all.end(), other.ops_.begin(), other.ops_.end());
    return Assignment(std::move(all));
  }

 private:
  std::vector<std::pair<SiteId, SiteOperator>> ops_;
};

enum class StateKind { product, circuit, markov };

struct ProductData {
  SiteState rho;
};

/// Brickwork circuit on sites 0..length-1 applied to a product vector.
/// Layer l acts on the bonds (i, i+1) with i = l mod 2, l mod 2 + 2, ...
struct CircuitData {
  std::size_t length = 0;
  Eigen::Index d = 0;
  Vector base;
  std::vector<Matrix> layers;
  Vector psi;  // evolved state, computed once
};

/// Stationary classical Markov chain on the integer chain, viewed as a
/// diagonal quantum state. T is column stochastic: T(t, s) = P(s -> t).
struct MarkovData {
  Eigen::MatrixXd T;
  Eigen::VectorXd pi;
  double alpha = 1.0;
  double lambda2 = 0.0;  // second-largest eigenvalue modulus
};

namespace detail {

inline std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= b;
  return r;
}

/// Applies a one-site operator at `site` to a state vector on `length` sites.
inline void apply_site(Vector& psi, std::size_t length, Eigen::Index d, std::size_t site,
                       const Matrix& m) {
  const auto ud = static_cast<std::size_t>(d);
  const std::size_t stride = ipow(ud, length - 1 - site);
  const std::size_t block = stride * ud;
  Vector tmp(d);
  for (std::size_t hi = 0; hi < static_cast<std::size_t>(psi.size()); hi += block) {
    for (std::size_t lo = 0; lo < stride; ++lo) {
      for (std::size_t t = 0; t < ud; ++t) tmp(static_cast<Eigen::Index>(t)) = psi(static_cast<Eigen::Index>(hi + t * stride + lo));
      const Vector out = m * tmp;
      for (std::size_t t = 0; t < ud; ++t) psi(static_cast<Eigen::Index>(hi + t * stride + lo)) = out(static_cast<Eigen::Index>(t));
    }
  }
}

/// Applies a two-site gate on (site, site + 1); local index is a * d + b.
inline void apply_bond(Vector& psi, std::size_t length, Eigen::Index d, std::size_t site,
                       const Matrix& u) {
  const auto ud = static_cast<std::size_t>(d);
  const std::size_t s2 = ipow(ud, length - 2 - site);  // stride of site + 1
  const std::size_t s1 = s2 * ud;                      // stride of site
  const std::size_t block = s1 * ud;
  Vector tmp(d * d);
  for (std::size_t hi = 0; hi < static_cast<std::size_t>(psi.size()); hi += block) {
    for (std::size_t lo = 0; lo < s2; ++lo) {
      for (std::size_t a = 0; a < ud; ++a) {
        for (std::size_t b = 0; b < ud; ++b) {
          tmp(static_cast<Eigen::Index>(a * ud + b)) = psi(static_cast<Eigen::Index>(hi + a * s1 + b * s2 + lo));
        }
      }
      const Vector out = u * tmp;
      for (std::size_t a = 0; a < ud; ++a) {
        for (std::size_t b = 0; b < ud; ++b) {
          psi(static_cast<Eigen::Index>(hi + a * s1 + b * s2 + lo)) = out(static_cast<Eigen::Index>(a * ud + b));
        }
      }
    }
  }
}

inline Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& t, std::int64_t e) {
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(t.rows(), t.cols());
  Eigen::MatrixXd base = t;
  while (e > 0) {
    if (e & 1) result = base * result;
    base = base * base;
    e >>= 1;
  }
  return result;
}

}  // namespace detail

/// Exact expectation oracle for a lattice state.
class GlobalState {
 public:
  static constexpr std::size_t kMaxCircuitDim = std::size_t{1} << 14;

  static GlobalState product(SiteState rho) {
    return GlobalState(ProductData{std::move(rho)});
  }

  static GlobalState circuit(const Vector& base, std::size_t length, std::vector<Matrix> layers) {
    const Eigen::Index d = base.size();
    require(d >= 1 && base.norm() > 0, ErrorKind::invalid_argument,
            "circuit base vector must be nonzero");
    require(length >= 1, ErrorKind::invalid_argument, "circuit needs at least one site");
    std::size_t dim = 1;
    for (std::size_t i = 0; i < length; ++i) {
      dim *= static_cast<std::size_t>(d);
      if (dim > kMaxCircuitDim) {
        fail(ErrorKind::cost_guard, "circuit segment exceeds the state-vector cost guard (d^L <= 2^14)");
      }
    }
    for (const auto& u : layers) {
      require(u.rows() == d * d && u.cols() == d * d, ErrorKind::dimension_mismatch,
              "circuit gate must be a d^2 x d^2 matrix");
      const double dev = (u.adjoint() * u - Matrix::Identity(d * d, d * d)).cwiseAbs().maxCoeff();
      require(dev <= 1e-12, ErrorKind::invalid_argument, "circuit gate is not unitary");
    }
    CircuitData c;
    c.length = length;
    c.d = d;
    c.base = base / base.norm();
    c.layers = std::move(layers);
    c.psi = Vector::Ones(1);
    for (std::size_t i = 0; i < length; ++i) {
      Vector next(c.psi.size() * d);
      for (Eigen::Index a = 0; a < c.psi.size(); ++a) {
        for (Eigen::Index b = 0; b < d; ++b) next(a * d + b) = c.psi(a) * c.base(b);
      }
      c.psi = std::move(next);
    }
    for (std::size_t l = 0; l < c.layers.size(); ++l) {
      for (std::size_t i = l % 2; i + 1 < length; i += 2) {
        detail::apply_bond(c.psi, length, d, i, c.layers[l]);
      }
    }
    return GlobalState(std::move(c));
  }

  /// The chain metric scale alpha must satisfy |lambda_2| <= e^{-alpha} so
  /// that truncated correlations decay at least like e^{-d}.
  static GlobalState markov(const Eigen::MatrixXd& t, double alpha,
                            std::optional<Eigen::VectorXd> pi = std::nullopt) {
    const Eigen::Index d = t.rows();
    require(d >= 1 && t.cols() == d, ErrorKind::invalid_argument,
            "transition matrix must be square");
    require(alpha > 0 && std::isfinite(alpha), ErrorKind::invalid_argument,
            "metric scale alpha must be positive");
    require(t.minCoeff() >= 0.0, ErrorKind::invalid_argument,
            "transition matrix has negative entries");
    for (Eigen::Index j = 0; j < d; ++j) {
      require(std::abs(t.col(j).sum() - 1.0) <= 1e-12, ErrorKind::invalid_argument,
              "transition matrix columns must sum to 1");
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::VectorXcd evals = es.eigenvalues();
    std::vector<std::pair<double, Eigen::Index>> mods;
    for (Eigen::Index i = 0; i < d; ++i) mods.emplace_back(std::abs(evals(i)), i);
    std::sort(mods.begin(), mods.end(), [](auto a, auto b) { return a.first > b.first; });
    Eigen::Index unit = 0;
    double best = 1e300;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double dist = std::abs(evals(i) - Complex(1.0));
      if (dist < best) {
        best = dist;
        unit = i;
      }
    }
    Eigen::VectorXd stationary = es.eigenvectors().col(unit).real();
    stationary /= stationary.sum();
    if (pi) {
      require(pi->size() == d, ErrorKind::dimension_mismatch, "stationary vector has wrong length");
      stationary = *pi;
    }
    require(stationary.minCoeff() >= -1e-12 && std::abs(stationary.sum() - 1.0) <= 1e-10,
            ErrorKind::invalid_argument, "stationary distribution is not a probability vector");
    require((t * stationary - stationary).cwiseAbs().maxCoeff() <= 1e-10,
            ErrorKind::invalid_argument, "distribution is not stationary under T");
    stationary = stationary.cwiseMax(0.0);
    stationary /= stationary.sum();
    // Second-largest modulus, skipping the eigenvalue identified as 1.
    double lambda2 = 0.0;
    for (const auto& [m, i] : mods) {
      if (i != unit) {
        lambda2 = m;
        break;
      }
    }
    require(lambda2 <= std::exp(-alpha) + 1e-12, ErrorKind::invalid_argument,
            "|lambda_2| exceeds e^{-alpha}: clustering rate does not match the metric");
    return GlobalState(MarkovData{t, stationary, alpha, lambda2});
  }

  [[nodiscard]] StateKind kind() const {
    if (std::holds_alternative<ProductData>(data_)) return StateKind::product;
    if (std::holds_alternative<CircuitData>(data_)) return StateKind::circuit;
    return StateKind::markov;
  }

  [[nodiscard]] Eigen::Index site_dim() const {
    if (auto p = std::get_if<ProductData>(&data_)) return p->rho.dim();
    if (auto c = std::get_if<CircuitData>(&data_)) return c->d;
    return std::get<MarkovData>(data_).T.rows();
  }

  /// Natural metric: the unit chain, or the alpha-scaled chain for Markov states.
  [[nodiscard]] Metric metric() const {
    if (auto m = std::get_if<MarkovData>(&data_)) return Metric::chain(m->alpha);
    return Metric::chain(1.0);
  }

  [[nodiscard]] bool contains(SiteId x) const {
    if (auto c = std::get_if<CircuitData>(&data_)) {
      return x >= 0 && static_cast<std::size_t>(x) < c->length;
    }
    return true;
  }

  [[nodiscard]] const ProductData* product_data() const { return std::get_if<ProductData>(&data_); }
  [[nodiscard]] const CircuitData* circuit_data() const { return std::get_if<CircuitData>(&data_); }
  [[nodiscard]] const MarkovData* markov_data() const { return std::get_if<MarkovData>(&data_); }

  [[nodiscard]] Complex expect(const Assignment& asg) const {
    for (const auto& [site, op] : asg.ops()) {
      require(op.dim() == site_dim(), ErrorKind::dimension_mismatch,
              "assignment operator dimension differs from the site dimension");
      require(contains(site), ErrorKind::invalid_argument, "assignment support outside the state's domain");
    }
    if (auto p = std::get_if<ProductData>(&data_)) {
      Complex r = 1.0;
      for (const auto& [site, op] : asg.ops()) r *= flab::expect(p->rho, op);
      return r;
    }
    if (auto c = std::get_if<CircuitData>(&data_)) {
      Vector phi = c->psi;
      for (const auto& [site, op] : asg.ops()) {
        detail::apply_site(phi, c->length, c->d, static_cast<std::size_t>(site), op.matrix());
      }
      return c->psi.dot(phi);
    }
    const auto& m = std::get<MarkovData>(data_);
    if (asg.empty()) return 1.0;
    Eigen::VectorXcd v = m.pi.cast<Complex>();
    SiteId prev = asg.ops().front().first;
    for (const auto& [site, op] : asg.ops()) {
      if (site != prev) {
        v = detail::matrix_power(m.T, site - prev).cast<Complex>() * v;
        prev = site;
      }
      v = v.cwiseProduct(op.matrix().diagonal());
    }
    return v.sum();
  }

  /// Reduced density matrix at one site.
  [[nodiscard]] SiteState site_marginal(SiteId x) const {
    require(contains(x), ErrorKind::invalid_argument, "site outside the state's domain");
    if (auto p = std::get_if<ProductData>(&data_)) return p->rho;
    if (auto m = std::get_if<MarkovData>(&data_)) {
      return SiteState::from_diagonal(std::vector<double>(m->pi.data(), m->pi.data() + m->pi.size()));
    }
    const auto& c = std::get<CircuitData>(data_);
    const auto ud = static_cast<std::size_t>(c.d);
    const std::size_t stride = detail::ipow(ud, c.length - 1 - static_cast<std::size_t>(x));
    const std::size_t block = stride * ud;
    Matrix rho = Matrix::Zero(c.d, c.d);
    for (std::size_t hi = 0; hi < static_cast<std::size_t>(c.psi.size()); hi += block) {
      for (std::size_t lo = 0; lo < stride; ++lo) {
        for (std::size_t t = 0; t < ud; ++t) {
          for (std::size_t u = 0; u < ud; ++u) {
            rho(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(u)) +=
                c.psi(static_cast<Eigen::Index>(hi + t * stride + lo)) *
                std::conj(c.psi(static_cast<Eigen::Index>(hi + u * stride + lo)));
          }
        }
      }
    }
    rho = (0.5 * (rho + rho.adjoint())).eval();
    rho /= rho.trace().real();
    return SiteState(rho);
  }

 private:
  using Data = std::variant<ProductData, CircuitData, MarkovData>;
  explicit GlobalState(Data data) : data_(std::move(data)) {}
  Data data_;
};

inline Complex expect_global(const GlobalState& state, const Assignment& asg) {
  return state.expect(asg);
}

/// Largest entrywise deviation between site marginals over the given sites.
inline double homogeneity_deviation(const GlobalState& state, std::span<const SiteId> sites) {
  if (sites.empty()) return 0.0;
  const Matrix first = state.site_marginal(sites.front()).rho();
  double dev = 0.0;
  for (SiteId s : sites) {
    dev = std::max(dev, (state.site_marginal(s).rho() - first).cwiseAbs().maxCoeff());
  }
  return dev;
}

inline bool is_homogeneous_on(const GlobalState& state, const Region& x, double tol = 1e-10) {
  return homogeneity_deviation(state, x.sites()) <= tol;
}

/// The common single-site density matrix. Circuit states qualify only when
/// every site marginal of the segment agrees to 1e-10.
inline SiteState single_site_restriction(const GlobalState& state) {
  if (auto c = state.circuit_data()) {
    std::vector<SiteId> all(c->length);
    for (std::size_t i = 0; i < c->length; ++i) all[i] = static_cast<SiteId>(i);
    if (homogeneity_deviation(state, all) > 1e-10) {
      fail(ErrorKind::invalid_argument, "state is not single-site homogeneous");
    }
    return state.site_marginal(0);
  }
  return state.site_marginal(0);
}

/// Site-averaged restriction over a region, used to center non-homogeneous states.
inline SiteState average_restriction(const GlobalState& state, const Region& x) {
  require(!x.empty(), ErrorKind::invalid_argument, "average restriction needs a nonempty region");
  Matrix acc = Matrix::Zero(state.site_dim(), state.site_dim());
  for (SiteId s : x.sites()) acc += state.site_marginal(s).rho();
  acc /= static_cast<double>(x.size());
  acc = (0.5 * (acc + acc.adjoint())).eval();
  acc /= acc.trace().real();
  return SiteState(acc);
}

struct CorrelatorValue {
  Complex value;      // G_{(X,Y)}(A, B)
  Complex truncated;  // omega(AB) - omega(A) omega(B)
  double distance = 0.0;
};

/// G_{(X,Y)}(A,B) = (omega(AB) - omega(A) omega(B)) e^{d(X,Y)}.
inline CorrelatorValue correlator(const GlobalState& state, const Region& x, const Region& y,
                                  const Assignment& a, const Assignment& b) {
  for (SiteId s : x.sites()) {
    require(!y.contains(s), ErrorKind::invalid_argument, "correlator regions overlap");
  }
  for (SiteId s : a.support()) {
    require(x.contains(s), ErrorKind::invalid_argument, "operator A is not localized in X");
  }
  for (SiteId s : b.support()) {
    require(y.contains(s), ErrorKind::invalid_argument, "operator B is not localized in Y");
  }
  const double dist = region_distance(x, y);
  const Complex trunc = state.expect(a.merged(b)) - state.expect(a) * state.expect(b);
  return {trunc * std::exp(dist), trunc, dist};
}

struct G0Estimate {
  double value = 0.0;
  std::size_t samples = 0;
};

/// Lower bound on G_0 = sup |G(A,B)| / (||A|| ||B||) over structured
/// single-site pairs and random product operators on contiguous blocks.
inline G0Estimate estimate_G0(const GlobalState& state, std::size_t max_region_size,
                              std::size_t max_separation, std::size_t sample_budget,
                              std::uint64_t seed = 0x5eed) {
  require(max_region_size >= 1 && max_separation >= 1, ErrorKind::invalid_argument,
          "G0 budgets must be positive");
  const Metric metric = state.metric();
  const Eigen::Index d = state.site_dim();
  G0Estimate est;
  auto fits = [&](SiteId last) { return state.contains(last); };
  auto consider = [&](const Region& x, const Region& y, const Assignment& a, const Assignment& b) {
    double norms = 1.0;
    for (const auto& [s, op] : a.ops()) norms *= op_norm(op);
    for (const auto& [s, op] : b.ops()) norms *= op_norm(op);
    if (norms <= 0) return;
    const auto g = correlator(state, x, y, a, b);
    est.value = std::max(est.value, std::abs(g.value) / norms);
    ++est.samples;
  };
  const auto dirs = unit_hermitian_directions(d);
  for (std::size_t m = 1; m <= max_separation; ++m) {
    if (!fits(static_cast<SiteId>(m))) break;
    const Region x({0}, metric);
    const Region y({static_cast<SiteId>(m)}, metric);
    for (const auto& a : dirs) {
      for (const auto& b : dirs) {
        consider(x, y, Assignment::single(0, a), Assignment::single(static_cast<SiteId>(m), b));
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size_dist(1, max_region_size);
  std::uniform_int_distribution<std::size_t> gap_dist(1, max_separation);
  for (std::size_t s = 0; s < sample_budget; ++s) {
    const std::size_t na = size_dist(rng);
    const std::size_t nb = size_dist(rng);
    const std::size_t gap = gap_dist(rng);
    const auto last = static_cast<SiteId>(na - 1 + gap + nb - 1);
    std::vector<std::pair<SiteId, SiteOperator>> aops, bops;
    std::vector<SiteId> xs, ys;
    for (std::size_t i = 0; i < na; ++i) {
      xs.push_back(static_cast<SiteId>(i));
      aops.emplace_back(static_cast<SiteId>(i), random_unit_hermitian(d, rng));
    }
    for (std::size_t i = 0; i < nb; ++i) {
      const auto site = static_cast<SiteId>(na - 1 + gap + i);
      ys.push_back(site);
      bops.emplace_back(site, random_unit_hermitian(d, rng));
    }
    if (!fits(last)) continue;
    consider(Region(xs, metric), Region(ys, metric), Assignment(aops), Assignment(bops));
  }
  return est;
}

}  // namespace flab
