#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "flab/algebra.hpp"
#include "flab/combinatorics.hpp"
#include "flab/lattice.hpp"
#include "flab/states.hpp"

namespace flab {

/// a_1 (x) ... (x) a_n in the tensor algebra over the site algebra.
struct TensorWord {
  std::vector<SiteOperator> factors;

  TensorWord() = default;
  TensorWord(std::initializer_list<SiteOperator> ops) : factors(ops) {}
  explicit TensorWord(std::vector<SiteOperator> ops) : factors(std::move(ops)) {}

  [[nodiscard]] std::size_t degree() const noexcept { return factors.size(); }

  [[nodiscard]] Eigen::Index dim() const {
    return factors.empty() ? 0 : factors.front().dim();
  }

  friend bool operator==(const TensorWord&, const TensorWord&) = default;

  friend TensorWord operator*(const TensorWord& a, const TensorWord& b) {
    TensorWord w = a;
    w.factors.insert(w.factors.end(), b.factors.begin(), b.factors.end());
    return w;
  }
};

/// Finite linear combination of words. Equal words are merged, zero
/// coefficients dropped.
class TensorPolynomial {
 public:
  TensorPolynomial() = default;

  static TensorPolynomial scalar(Complex c) {
    TensorPolynomial p;
    p.add(TensorWord{}, c);
    return p;
  }
  static TensorPolynomial word(TensorWord w, Complex c = 1.0) {
    TensorPolynomial p;
    p.add(std::move(w), c);
    return p;
  }

  void add(TensorWord w, Complex c) {
    for (auto it = terms_.begin(); it != terms_.end(); ++it) {
      if (it->first == w) {
        it->second += c;
        if (it->second == Complex(0.0)) terms_.erase(it);
        return;
      }
    }
    if (c != Complex(0.0)) terms_.emplace_back(std::move(w), c);
  }

  [[nodiscard]] const std::vector<std::pair<TensorWord, Complex>>& terms() const noexcept {
    return terms_;
  }
  [[nodiscard]] bool empty() const noexcept { return terms_.empty(); }

  friend TensorPolynomial operator+(TensorPolynomial a, const TensorPolynomial& b) {
    for (const auto& [w, c] : b.terms_) a.add(w, c);
    return a;
  }
  friend TensorPolynomial operator-(TensorPolynomial a, const TensorPolynomial& b) {
    for (const auto& [w, c] : b.terms_) a.add(w, -c);
    return a;
  }
  friend TensorPolynomial operator*(Complex s, const TensorPolynomial& a) {
    TensorPolynomial out;
    for (const auto& [w, c] : a.terms_) out.add(w, s * c);
    return out;
  }
  /// Concatenation product in the tensor algebra.
  friend TensorPolynomial operator*(const TensorPolynomial& a, const TensorPolynomial& b) {
    TensorPolynomial out;
    for (const auto& [wa, ca] : a.terms_) {
      for (const auto& [wb, cb] : b.terms_) out.add(wa * wb, ca * cb);
    }
    return out;
  }

 private:
  std::vector<std::pair<TensorWord, Complex>> terms_;
};

struct InducedMoment {
  std::size_t region_size = 0;
  std::size_t degree = 0;
  Complex value;
};

enum class MomentMethod {
  automatic,
  classification,  // one oracle query per (enumerated subset, set partition)
  transfer,        // Markov states: dynamic program along the chain
  product_formula, // product states: closed combinatorial sum
};

inline constexpr double kMomentCostGuard = 1e8;

namespace detail {

inline void check_moment_inputs(const GlobalState& state, const Region& x, const TensorWord& w) {
  require(!x.empty(), ErrorKind::invalid_argument, "induced moment needs a nonempty region");
  for (const auto& f : w.factors) {
    require(f.dim() == state.site_dim(), ErrorKind::dimension_mismatch,
            "word factor dimension differs from the site dimension");
  }
  for (SiteId s : x.sites()) {
    require(state.contains(s), ErrorKind::invalid_argument, "region outside the state's domain");
  }
  if (std::pow(static_cast<double>(x.size()), static_cast<double>(w.degree())) > kMomentCostGuard) {
    fail(ErrorKind::cost_guard, "induced_moment: |X|^n exceeds the 1e8 cost guard");
  }
}

/// Fills `out` with the r-th injective k-tuple of positions in [0, n), in
/// lexicographic order.
inline void decode_injective(std::uint64_t r, std::size_t n, std::size_t k,
                             std::vector<std::size_t>& out, std::vector<std::size_t>& scratch) {
  out.resize(k);
  scratch.resize(n);
  for (std::size_t i = 0; i < n; ++i) scratch[i] = i;
  std::uint64_t radix = 1;
  for (std::size_t j = 1; j < k; ++j) radix *= static_cast<std::uint64_t>(n - j);
  for (std::size_t j = 0; j < k; ++j) {
    const std::uint64_t digit = r / radix;
    r %= radix;
    out[j] = scratch[static_cast<std::size_t>(digit)];
    scratch.erase(scratch.begin() + static_cast<std::ptrdiff_t>(digit));
    if (j + 1 < k) radix /= static_cast<std::uint64_t>(n - j - 1);
  }
}

inline std::uint64_t falling_u64(std::size_t n, std::size_t k) {
  std::uint64_t r = 1;
  for (std::size_t l = 0; l < k; ++l) r *= static_cast<std::uint64_t>(n - l);
  return r;
}

inline constexpr std::size_t kClassBlock = 4096;

inline Complex moment_classification(const GlobalState& state, const Region& x,
                                     const TensorWord& w, const Executor& exec) {
  const std::size_t n = w.degree();
  const std::size_t big_n = x.size();
  const Eigen::Index d = state.site_dim();
  const auto ident = SiteOperator::identity(d);
  // centered[i][p] = a_i - omega(iota_{x_p} a_i) 1
  std::vector<std::vector<SiteOperator>> centered(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < big_n; ++p) {
      const Complex mean = state.expect(Assignment::single(x[p], w.factors[i]));
      centered[i].push_back(w.factors[i] - mean * ident);
    }
  }
  KahanSum<Complex> total;
  std::vector<Complex> values;
  for (const auto& part : set_partitions(static_cast<int>(n))) {
    const std::size_t k = part.size();
    if (k > big_n) continue;
    const std::uint64_t count = falling_u64(big_n, k);
    for (std::uint64_t start = 0; start < count; start += kClassBlock) {
      const std::size_t len = static_cast<std::size_t>(std::min<std::uint64_t>(kClassBlock, count - start));
      values.assign(len, Complex(0.0));
      exec.parallel_for(len, [&](std::size_t j) {
        std::vector<std::size_t> pos, scratch;
        decode_injective(start + j, big_n, k, pos, scratch);
        std::vector<std::pair<SiteId, SiteOperator>> ops;
        ops.reserve(k);
        for (std::size_t b = 0; b < k; ++b) {
          const auto& block = part.blocks[b];
          SiteOperator op = centered[static_cast<std::size_t>(block.front() - 1)][pos[b]];
          for (std::size_t t = 1; t < block.size(); ++t) {
            op = op * centered[static_cast<std::size_t>(block[t] - 1)][pos[b]];
          }
          ops.emplace_back(x[pos[b]], std::move(op));
        }
        values[j] = state.expect(Assignment(std::move(ops)));
      });
      for (const auto& v : values) total += v;
    }
  }
  return total.value() * std::pow(static_cast<double>(big_n), -0.5 * static_cast<double>(n));
}

inline Complex moment_transfer(const GlobalState& state, const Region& x, const TensorWord& w) {
  const MarkovData* m = state.markov_data();
  require(m != nullptr, ErrorKind::invalid_argument, "transfer engine needs a Markov state");
  const std::size_t n = w.degree();
  const Eigen::Index d = state.site_dim();
  const std::size_t full = (std::size_t{1} << n) - 1;
  const SiteState omega = state.site_marginal(0);
  std::vector<SiteOperator> centered;
  for (const auto& f : w.factors) centered.push_back(center(f, omega));
  // diagonal of the ordered product over each index mask
  std::vector<Eigen::VectorXcd> diag(full + 1);
  for (std::size_t mask = 1; mask <= full; ++mask) {
    std::optional<SiteOperator> op;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) op = op ? *op * centered[i] : centered[i];
    }
    diag[mask] = op->matrix().diagonal();
  }
  std::vector<SiteId> sites(x.sites().begin(), x.sites().end());
  std::sort(sites.begin(), sites.end());
  std::vector<Eigen::VectorXcd> v(full + 1, Eigen::VectorXcd::Zero(d));
  v[0] = m->pi.cast<Complex>();
  std::map<SiteId, Eigen::MatrixXcd> powers;
  for (std::size_t j = 0; j < sites.size(); ++j) {
    if (j > 0) {
      const SiteId gap = sites[j] - sites[j - 1];
      auto it = powers.find(gap);
      if (it == powers.end()) {
        it = powers.emplace(gap, detail::matrix_power(m->T, gap).cast<Complex>()).first;
      }
      for (auto& vs : v) vs = it->second * vs;
    }
    std::vector<Eigen::VectorXcd> next = v;
    for (std::size_t s = 0; s < full; ++s) {
      if (v[s].isZero(0.0)) continue;
      const std::size_t free = full & ~s;
      for (std::size_t u = free; u != 0; u = (u - 1) & free) {
        next[s | u] += v[s].cwiseProduct(diag[u]);
      }
    }
    v = std::move(next);
  }
  return v[full].sum() * std::pow(static_cast<double>(x.size()), -0.5 * static_cast<double>(n));
}

inline Complex moment_product(const SiteState& omega, std::size_t region_size, const TensorWord& w) {
  const std::size_t n = w.degree();
  std::vector<SiteOperator> centered;
  for (const auto& f : w.factors) centered.push_back(center(f, omega));
  KahanSum<Complex> total;
  for (const auto& part : set_partitions(static_cast<int>(n))) {
    const std::size_t k = part.size();
    if (k > region_size) continue;
    Complex term = falling_factorial(region_size, k);
    for (const auto& block : part.blocks) {
      SiteOperator op = centered[static_cast<std::size_t>(block.front() - 1)];
      for (std::size_t t = 1; t < block.size(); ++t) {
        op = op * centered[static_cast<std::size_t>(block[t] - 1)];
      }
      term *= expect(omega, op);
    }
    total += term;
  }
  return total.value() * std::pow(static_cast<double>(region_size), -0.5 * static_cast<double>(n));
}

}  // namespace detail

/// omega_X(Phi(a_1) ... Phi(a_n)) with the fluctuation operators
/// Phi(a) = |X|^{-1/2} sum_x (iota_x a - omega_X(iota_x a) 1).
inline Complex induced_moment(const GlobalState& state, const Region& x, const TensorWord& word,
                              const Executor& exec = sequential(),
                              MomentMethod method = MomentMethod::automatic) {
  if (word.degree() == 0) return 1.0;
  detail::check_moment_inputs(state, x, word);
  if (method == MomentMethod::automatic) {
    switch (state.kind()) {
      case StateKind::product: method = MomentMethod::product_formula; break;
      case StateKind::markov: method = MomentMethod::transfer; break;
      case StateKind::circuit: method = MomentMethod::classification; break;
    }
  }
  switch (method) {
    case MomentMethod::product_formula: {
      const ProductData* p = state.product_data();
      require(p != nullptr, ErrorKind::invalid_argument, "product formula needs a product state");
      return detail::moment_product(p->rho, x.size(), word);
    }
    case MomentMethod::transfer:
      return detail::moment_transfer(state, x, word);
    default:
      return detail::moment_classification(state, x, word, exec);
  }
}

inline InducedMoment induced_moment_record(const GlobalState& state, const Region& x,
                                           const TensorWord& word,
                                           const Executor& exec = sequential()) {
  return {x.size(), word.degree(), induced_moment(state, x, word, exec)};
}

inline Complex induced_moment_polynomial(const GlobalState& state, const Region& x,
                                         const TensorPolynomial& poly,
                                         const Executor& exec = sequential()) {
  KahanSum<Complex> total;
  for (const auto& [w, c] : poly.terms()) total += c * induced_moment(state, x, w, exec);
  return total.value();
}

/// gamma(a, b) = omega([a*, b]).
inline Complex gamma_form(const SiteState& state, const SiteOperator& a, const SiteOperator& b) {
  return expect(state, commutator(a.adjoint(), b));
}

/// I_gamma(a, b) = a (x) b - b (x) a - gamma(a*, b) 1.
inline TensorPolynomial ccr_ideal_element(const SiteOperator& a, const SiteOperator& b,
                                          const SiteState& state) {
  SiteOperator::check_dims(a, b);
  TensorPolynomial p;
  p.add(TensorWord{a, b}, 1.0);
  p.add(TensorWord{b, a}, -1.0);
  p.add(TensorWord{}, -gamma_form(state, a.adjoint(), b));
  return p;
}

// ---------------------------------------------------------------------------
// Seminorm estimates

using MomentFunctional = std::function<Complex(const TensorWord&)>;

struct SearchOptions {
  std::size_t budget = 8;          // random starts
  std::size_t sweeps = 3;          // coordinate-ascent passes per start
  std::size_t trials = 6;          // perturbations per slot and pass
  std::size_t max_structured = 20000;
  std::uint64_t seed = 0x6a09e667f3bcc908ULL;
};

struct SeminormEstimate {
  double value = 0.0;
  TensorWord witness;
  std::size_t evaluations = 0;
};

namespace detail {

/// Projection applied to every candidate factor; returns false to drop it.
using Normalizer = std::function<bool(SiteOperator&)>;

inline SeminormEstimate seminorm_search(const MomentFunctional& f, std::size_t n,
                                        Eigen::Index d, const std::vector<SiteOperator>& dirs,
                                        const Normalizer& normalize, const SearchOptions& opts,
                                        const std::vector<TensorWord>& seeds) {
  SeminormEstimate best;
  auto consider = [&](const TensorWord& w) {
    const double v = std::abs(f(w));
    ++best.evaluations;
    if (best.witness.degree() != n || v > best.value) {
      best.value = v;
      best.witness = w;
    }
    return v;
  };
  if (n == 0) {
    consider(TensorWord{});
    return best;
  }
  for (const auto& s : seeds) {
    if (s.degree() != n) continue;
    TensorWord w = s;
    bool ok = true;
    for (auto& fct : w.factors) ok = ok && normalize(fct);
    if (ok) consider(w);
  }
  // Structured tuples over the direction set, shrinking it if too costly.
  std::vector<SiteOperator> grid = dirs;
  while (grid.size() > 1 &&
         std::pow(static_cast<double>(grid.size()), static_cast<double>(n)) >
             static_cast<double>(opts.max_structured)) {
    grid.pop_back();
  }
  std::vector<std::size_t> idx(n, 0);
  if (!grid.empty()) {
    while (true) {
      TensorWord w;
      for (std::size_t i : idx) w.factors.push_back(grid[i]);
      consider(w);
      std::size_t pos = n;
      while (pos > 0 && ++idx[pos - 1] == grid.size()) idx[--pos] = 0;
      if (pos == 0) break;
    }
  }
  for (const auto& dir : dirs) consider(TensorWord(std::vector<SiteOperator>(n, dir)));
  // Random starts refined by coordinate ascent.
  std::mt19937_64 rng(opts.seed ^ (static_cast<std::uint64_t>(n) * 0x9e3779b97f4a7c15ULL));
  auto random_factor = [&]() {
    for (int attempt = 0; attempt < 64; ++attempt) {
      SiteOperator a = random_unit_hermitian(d, rng);
      if (normalize(a)) return a;
    }
    fail(ErrorKind::invalid_argument, "seminorm search could not draw a valid direction");
  };
  for (std::size_t s = 0; s < opts.budget; ++s) {
    TensorWord cur;
    for (std::size_t i = 0; i < n; ++i) cur.factors.push_back(random_factor());
    double cur_val = consider(cur);
    double step = 0.5;
    for (std::size_t sweep = 0; sweep < opts.sweeps; ++sweep, step *= 0.5) {
      for (std::size_t slot = 0; slot < n; ++slot) {
        for (std::size_t t = 0; t < opts.trials; ++t) {
          TensorWord cand = cur;
          SiteOperator moved = cur.factors[slot] + step * random_unit_hermitian(d, rng);
          if (!normalize(moved)) continue;
          cand.factors[slot] = moved;
          const double v = consider(cand);
          if (v > cur_val) {
            cur = std::move(cand);
            cur_val = v;
          }
        }
      }
    }
  }
  return best;
}

}  // namespace detail

/// Lower bound on nu_n(F) = sup |F(v_1 (x) ... (x) v_n)| over unit-norm factors.
/// nu_0(F) = |F(1)|.
inline SeminormEstimate seminorm_nu_estimate(const MomentFunctional& f, std::size_t n,
                                             Eigen::Index d, const SearchOptions& opts = {},
                                             const std::vector<TensorWord>& seeds = {}) {
  const detail::Normalizer unit = [](SiteOperator& a) {
    const double nrm = op_norm(a);
    if (nrm < 1e-12) return false;
    a = (1.0 / nrm) * a;
    return true;
  };
  return detail::seminorm_search(f, n, d, unit_hermitian_directions(d), unit, opts, seeds);
}

/// Lower bound on nu_n^omega(F): the same supremum restricted to ker(omega),
/// normalized by operator norms.
inline SeminormEstimate seminorm_nu_omega_estimate(const MomentFunctional& f, std::size_t n,
                                                   const SiteState& state,
                                                   const SearchOptions& opts = {},
                                                   const std::vector<TensorWord>& seeds = {}) {
  const detail::Normalizer centered_unit = [&state](SiteOperator& a) {
    SiteOperator c = center(a, state);
    const double nrm = op_norm(c);
    if (nrm < 1e-9) return false;
    a = (1.0 / nrm) * c;
    return true;
  };
  std::vector<SiteOperator> dirs;
  for (auto dir : unit_hermitian_directions(state.dim())) {
    if (centered_unit(dir)) dirs.push_back(dir);
  }
  return detail::seminorm_search(f, n, state.dim(), dirs, centered_unit, opts, seeds);
}

struct TopolCheck {
  double nu_omega_n = 0.0;  // lower side
  double nu_n = 0.0;        // lhs of the upper inequality
  double rhs = 0.0;         // sum_k C(n,k) 2^k nu_k^omega
  bool pass = false;
};

/// nu_n^omega <= nu_n <= sum_k C(n,k) 2^k nu_k^omega on search estimates.
inline TopolCheck lemma_topol_bound_check(const MomentFunctional& f, std::size_t n,
                                          const SiteState& state, const SearchOptions& opts = {}) {
  require(n <= 6, ErrorKind::cost_guard, "lemma_topol_bound_check: n > 6 exceeds the cost guard");
  TopolCheck r;
  std::vector<double> omega_k(n + 1);
  SeminormEstimate top;
  for (std::size_t k = 0; k <= n; ++k) {
    const auto est = seminorm_nu_omega_estimate(f, k, state, opts);
    omega_k[k] = est.value;
    if (k == n) top = est;
  }
  r.nu_omega_n = omega_k[n];
  r.nu_n = seminorm_nu_estimate(f, n, state.dim(), opts, {top.witness}).value;
  for (std::size_t k = 0; k <= n; ++k) {
    r.rhs += static_cast<double>(binomial(static_cast<int>(n), static_cast<int>(k))) *
             std::ldexp(1.0, static_cast<int>(k)) * omega_k[k];
  }
  r.pass = r.nu_omega_n <= r.nu_n + 1e-12 && r.nu_n <= r.rhs + 1e-6;
  return r;
}

/// The functional a_1 (x) ... (x) a_n -> omega_hat_X(a_1 (x) ... (x) a_n).
inline MomentFunctional induced_functional(const GlobalState& state, const Region& x,
                                           const Executor& exec = sequential()) {
  return [&state, x, &exec](const TensorWord& w) { return induced_moment(state, x, w, exec); };
}

// ---------------------------------------------------------------------------
// CCR ideal decay

struct CcrDecayCheck {
  Complex value;         // via pi(I_gamma(a,b)) = |X|^{-1/2} Phi([a,b])
  Complex direct;        // polynomial evaluated term by term
  double transport_dev = 0.0;
  double bound = 0.0;    // 2 |X|^{-1/2} C_{n-1} prod ||a_i||
  bool pass = false;
};

/// The centering state for the gamma form on X: the site average of the
/// restrictions, which equals omega for homogeneous states.
inline SiteState ccr_reference_state(const GlobalState& state, const Region& x) {
  return average_restriction(state, x);
}

/// Evaluates omega_hat_X(prefix . I_gamma(a,b) . suffix) both directly and
/// through the transport identity, and compares with the bound for a given
/// constant c_prev standing in for C_{n-1}.
inline CcrDecayCheck ccr_decay_check(const GlobalState& state, const Region& x,
                                     const TensorWord& prefix, const SiteOperator& a,
                                     const SiteOperator& b, const TensorWord& suffix,
                                     double c_prev, const Executor& exec = sequential()) {
  const SiteState ref = ccr_reference_state(state, x);
  const TensorPolynomial poly = TensorPolynomial::word(prefix) * ccr_ideal_element(a, b, ref) *
                                TensorPolynomial::word(suffix);
  CcrDecayCheck r;
  r.direct = induced_moment_polynomial(state, x, poly, exec);
  const TensorWord transported = prefix * TensorWord{commutator(a, b)} * suffix;
  r.value = induced_moment(state, x, transported, exec) / std::sqrt(static_cast<double>(x.size()));
  r.transport_dev = std::abs(r.value - r.direct);
  double norms = op_norm(a) * op_norm(b);
  for (const auto& f : prefix.factors) norms *= op_norm(f);
  for (const auto& f : suffix.factors) norms *= op_norm(f);
  r.bound = 2.0 / std::sqrt(static_cast<double>(x.size())) * c_prev * norms;
  r.pass = r.transport_dev <= 1e-10 && std::abs(r.value) <= r.bound + 1e-12;
  return r;
}

/// C_{n-1} estimate: max over the region family of the nu_{n-1} search
/// estimate of omega_hat_X, seeded with the transported word.
inline double ccr_constant(const GlobalState& state, std::span<const Region> family,
                           const TensorWord& prefix, const SiteOperator& a, const SiteOperator& b,
                           const TensorWord& suffix, const SearchOptions& opts = {},
                           const Executor& exec = sequential()) {
  const TensorWord transported = prefix * TensorWord{commutator(a, b)} * suffix;
  double c = 0.0;
  for (const auto& x : family) {
    const auto est = seminorm_nu_estimate(induced_functional(state, x, exec), transported.degree(),
                                          state.site_dim(), opts, {transported});
    c = std::max(c, est.value);
  }
  return c;
}

}  // namespace flab
