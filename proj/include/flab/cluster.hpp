#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flab/combinatorics.hpp"
#include "flab/fluctuations.hpp"
#include "flab/gaussian.hpp"
#include "flab/lattice.hpp"
#include "flab/states.hpp"

namespace flab {

/// One tuple x in X^n of the cluster expansion, with its spread-optimally
/// enumerated range and the per-k correction summands.
struct ClusterTerm {
  std::vector<SiteId> tuple;
  std::vector<SiteId> range;               // y_1 .. y_m
  std::vector<SiteOperator> cluster_ops;   // a_1^x .. a_m^x
  Complex product_value;                   // prod_k omega(a_k^x)
  std::vector<Complex> corrections;        // k = 1 .. m-1
};

namespace detail {

inline void require_centered(const SiteState& omega, const TensorWord& word) {
  for (const auto& f : word.factors) {
    require(std::abs(expect(omega, f)) <= 1e-10, ErrorKind::invalid_argument,
            "word factors must lie in the kernel of the single-site state");
  }
}

inline std::uint64_t tuple_count(std::size_t big_n, std::size_t n, double guard, const char* what) {
  if (std::pow(static_cast<double>(big_n), static_cast<double>(n)) > guard) fail(ErrorKind::cost_guard, what);
  std::uint64_t c = 1;
  for (std::size_t i = 0; i < n; ++i) c *= big_n;
  return c;
}

inline void decode_tuple(std::uint64_t r, const Region& x, std::size_t n, std::vector<SiteId>& out) {
  out.resize(n);
  for (std::size_t i = n; i-- > 0;) {
    out[i] = x[static_cast<std::size_t>(r % x.size())];
    r /= x.size();
  }
}

}  // namespace detail

/// Builds the cluster term of one tuple against the state's exact correlators.
inline ClusterTerm cluster_term(const GlobalState& state, const SiteState& omega, const Metric& metric,
                                const TensorWord& word, std::span<const SiteId> tuple) {
  ClusterTerm t;
  t.tuple.assign(tuple.begin(), tuple.end());
  std::vector<SiteId> distinct = t.tuple;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  t.range = spread_optimal_order(distinct, metric);
  const std::size_t m = t.range.size();
  t.product_value = 1.0;
  for (SiteId y : t.range) {
    std::optional<SiteOperator> op;
    for (std::size_t j = 0; j < tuple.size(); ++j) {
      if (tuple[j] == y) op = op ? *op * word.factors[j] : word.factors[j];
    }
    t.cluster_ops.push_back(*op);
    t.product_value *= expect(omega, *op);
  }
  Complex prefix = 1.0;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    std::vector<SiteId> tail_sites(t.range.begin() + static_cast<std::ptrdiff_t>(k + 1), t.range.end());
    std::vector<std::pair<SiteId, SiteOperator>> tail_ops;
    for (std::size_t l = k + 1; l < m; ++l) tail_ops.emplace_back(t.range[l], t.cluster_ops[l]);
    const auto g = correlator(state, Region({t.range[k]}, metric), Region(tail_sites, metric),
                              Assignment::single(t.range[k], t.cluster_ops[k]),
                              Assignment(std::move(tail_ops)));
    std::vector<SiteId> from_k(t.range.begin() + static_cast<std::ptrdiff_t>(k), t.range.end());
    t.corrections.push_back(prefix * g.value * std::exp(-spread_of(from_k, metric)));
    prefix *= expect(omega, t.cluster_ops[k]);
  }
  return t;
}

/// omega_hat^{(x)X} on centered words via the set-partition closed form.
inline Complex product_part_moment(const SiteState& omega, const Region& x, const TensorWord& word) {
  if (word.degree() > 8) fail(ErrorKind::cost_guard, "product_part_moment: n > 8 exceeds the cost guard");
  require(!x.empty(), ErrorKind::invalid_argument, "product part needs a nonempty region");
  detail::require_centered(omega, word);
  if (word.degree() == 0) return 1.0;
  return detail::moment_product(omega, x.size(), word);
}

inline constexpr double kClusterCostGuard = 1e8;

/// F_X summed tuple by tuple with spread-optimal enumerations and exact
/// correlator queries.
inline Complex f_correction_moment(const GlobalState& state, const Region& x, const TensorWord& word,
                                   const Executor& exec = sequential()) {
  require(!x.empty(), ErrorKind::invalid_argument, "correction needs a nonempty region");
  const SiteState omega = single_site_restriction(state);
  detail::require_centered(omega, word);
  const std::size_t n = word.degree();
  const std::uint64_t count =
      detail::tuple_count(x.size(), n, kClusterCostGuard, "f_correction_moment: |X|^n exceeds the 1e8 cost guard");
  if (n < 2) return 0.0;
  KahanSum<Complex> total;
  std::vector<Complex> values;
  for (std::uint64_t start = 0; start < count; start += detail::kClassBlock) {
    const auto len = static_cast<std::size_t>(std::min<std::uint64_t>(detail::kClassBlock, count - start));
    values.assign(len, Complex(0.0));
    exec.parallel_for(len, [&](std::size_t j) {
      std::vector<SiteId> tuple;
      detail::decode_tuple(start + j, x, n, tuple);
      const auto term = cluster_term(state, omega, x.metric(), word, tuple);
      KahanSum<Complex> s;
      for (const auto& c : term.corrections) s += c;
      values[j] = s.value();
    });
    for (const auto& v : values) total += v;
  }
  return total.value() * std::pow(static_cast<double>(x.size()), -0.5 * static_cast<double>(n));
}

struct ExpansionCheck {
  Complex lhs;
  Complex rhs;
  double max_dev = 0.0;
};

/// omega_Y(A_1 ... A_k) against its telescoped cluster form on a
/// spread-optimally enumerated Y; the assignment must cover Y exactly.
inline ExpansionCheck lemma2_expansion_check(const GlobalState& state, const Region& y,
                                             const Assignment& asg) {
  require(y.size() <= 8, ErrorKind::cost_guard, "lemma2_expansion_check: |Y| > 8 exceeds the cost guard");
  const auto support = asg.support();
  require(support.size() == y.size(), ErrorKind::invalid_argument, "assignment must cover Y");
  for (SiteId s : support) require(y.contains(s), ErrorKind::invalid_argument, "assignment leaves Y");
  const auto order = spread_optimal_enumeration(y);
  std::vector<SiteOperator> ops;
  for (SiteId s : order) {
    for (const auto& [site, op] : asg.ops()) {
      if (site == s) ops.push_back(op);
    }
  }
  ExpansionCheck r;
  r.lhs = state.expect(asg);
  Complex prefix = 1.0;
  KahanSum<Complex> rhs;
  for (std::size_t l = 0; l + 1 < order.size(); ++l) {
    std::vector<SiteId> tail(order.begin() + static_cast<std::ptrdiff_t>(l + 1), order.end());
    std::vector<std::pair<SiteId, SiteOperator>> tail_ops;
    for (std::size_t i = l + 1; i < order.size(); ++i) tail_ops.emplace_back(order[i], ops[i]);
    const auto g = correlator(state, Region({order[l]}, y.metric()), Region(tail, y.metric()),
                              Assignment::single(order[l], ops[l]), Assignment(std::move(tail_ops)));
    std::vector<SiteId> from_l(order.begin() + static_cast<std::ptrdiff_t>(l), order.end());
    rhs += prefix * g.value * std::exp(-spread_of(from_l, y.metric()));
    prefix *= state.expect(Assignment::single(order[l], ops[l]));
  }
  if (!order.empty()) prefix *= state.expect(Assignment::single(order.back(), ops.back()));
  rhs += prefix;
  r.rhs = rhs.value();
  r.max_dev = std::abs(r.lhs - r.rhs);
  return r;
}

/// D_X = omega_hat^{(x)X} - prod_{l < n/2} (1 - l/|X|) omega_hat_qf on centered words.
inline Complex dx_functional(const SiteState& omega, const Region& x, const TensorWord& word) {
  const Complex prod_part = product_part_moment(omega, x, word);
  const std::size_t n = word.degree();
  if (n % 2 == 1) return prod_part;
  double factor = 1.0;
  for (std::size_t l = 0; l < n / 2; ++l) factor *= 1.0 - static_cast<double>(l) / static_cast<double>(x.size());
  return prod_part - factor * wick_moment(covariance_from_state(omega), word);
}

inline constexpr double kBnCostGuard = 1e7;

/// B_n(X): the tuple sum of the cluster correction weights with every
/// correlator replaced by one.
inline double b_n_quantity(const Region& x, std::size_t n, const Executor& exec = sequential()) {
  require(!x.empty(), ErrorKind::invalid_argument, "B_n needs a nonempty region");
  const std::uint64_t count =
      detail::tuple_count(x.size(), n, kBnCostGuard, "b_n_quantity: |X|^n exceeds the 1e7 cost guard");
  KahanSum<double> total;
  std::vector<double> values;
  for (std::uint64_t start = 0; start < count; start += detail::kClassBlock) {
    const auto len = static_cast<std::size_t>(std::min<std::uint64_t>(detail::kClassBlock, count - start));
    values.assign(len, 0.0);
    exec.parallel_for(len, [&](std::size_t j) {
      std::vector<SiteId> tuple;
      detail::decode_tuple(start + j, x, n, tuple);
      std::vector<SiteId> distinct = tuple;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      const auto range = spread_optimal_order(distinct, x.metric());
      double sum = 0.0;
      for (std::size_t k = 0; k + 1 < range.size(); ++k) {
        if (k > 0 && std::count(tuple.begin(), tuple.end(), range[k - 1]) < 2) break;
        sum += std::exp(-spread_of(std::span(range).subspan(k), x.metric()));
      }
      values[j] = sum;
    });
    for (double v : values) total += v;
  }
  return total.value();
}

struct SeriesValue {
  double value = 0.0;       // partial sum plus tail bound
  double tail_bound = 0.0;
  std::int64_t terms = 0;
};

/// N_hat_k = sum_{r >= 1} N(r)^k e^{-r} over integer radii. The tail is
/// bounded with a polynomial envelope N(r) <= C (r+1)^p.
inline SeriesValue n_hat(int k, const Metric& metric, const Region* support = nullptr) {
  require(k >= 1, ErrorKind::invalid_argument, "N_hat_k needs k >= 1");
  double c = 0.0;
  double p = 0.0;
  switch (metric.kind()) {
    case MetricKind::chain:
      c = 2.0 / metric.scale() + 1.0;
      p = 1.0;
      break;
    case MetricKind::grid2d: {
      const double s = 1.0 / metric.scale();
      c = 2.0 * s * s + 2.0 * s + 1.0;
      p = 2.0;
      break;
    }
    case MetricKind::explicit_table:
      c = static_cast<double>(metric.support().size());
      p = 0.0;
      break;
  }
  const Region all = support ? *support
                             : (metric.kind() == MetricKind::explicit_table ? Region(metric.support(), metric)
                                                                            : Region({0}, metric));
  const double pk = p * k;
  SeriesValue out;
  KahanSum<double> sum;
  constexpr std::int64_t kMaxTerms = 100000;
  for (std::int64_t r = 1; r <= kMaxTerms; ++r) {
    const double nr = static_cast<double>(ball_count(metric, static_cast<double>(r), all));
    sum += std::pow(nr, k) * std::exp(-static_cast<double>(r));
    ++out.terms;
    // envelope terms beyond r decay at ratio at most rho once r + 2 > pk
    const double next = static_cast<double>(r + 1);
    const double rho = std::pow((next + 2.0) / (next + 1.0), pk) * std::exp(-1.0);
    if (rho >= 1.0) continue;
    const double env = std::pow(c, k) * std::pow(next + 1.0, pk) * std::exp(-next);
    const double tail = env / (1.0 - rho);
    if (tail < 1e-12) {
      out.tail_bound = tail;
      out.value = sum.value() + tail;
      return out;
    }
  }
  fail(ErrorKind::invalid_argument, "N_hat series does not converge: ball growth is not polynomial");
}

/// B_hat_n = n! sum_k S(k,n) sum_{l=1}^{k-1} q_[k-l+1] N_hat_{k-l+1}.
inline double b_hat_bound(int n, const Metric& metric) {
  require(n >= 1, ErrorKind::invalid_argument, "B_hat_n needs n >= 1");
  if (n > 8) fail(ErrorKind::cost_guard, "b_hat_bound: n > 8 exceeds the cost guard");
  std::vector<double> nh(static_cast<std::size_t>(n) + 1, 0.0);
  for (int j = 2; j <= n; ++j) nh[static_cast<std::size_t>(j)] = n_hat(j, metric).value;
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  double total = 0.0;
  for (int k = 1; k <= n; ++k) {
    double inner = 0.0;
    for (int l = 1; l <= k - 1; ++l) {
      const int j = k - l + 1;
      inner += static_cast<double>(q_sequence(j)) * nh[static_cast<std::size_t>(j)];
    }
    total += static_cast<double>(stirling2(k, n)) * inner;
  }
  return fact * total;
}

/// A_hat_n: partitions of n into blocks of size >= 2. Bounds the product
/// part on unit centered words uniformly in |X|.
inline double product_part_seminorm_bound(int n) {
  require(n >= 0 && n <= 12, ErrorKind::invalid_argument, "product part bound needs 0 <= n <= 12");
  if (n == 0) return 1.0;
  double count = 0.0;
  for (const auto& p : set_partitions(n)) count += all_blocks_at_least_two(p) ? 1.0 : 0.0;
  return count;
}

struct DecompositionCheck {
  Complex direct;
  Complex product_part;
  Complex correction;
  double residual = 0.0;
};

inline DecompositionCheck decomposition_check(const GlobalState& state, const Region& x,
                                              const TensorWord& word, const Executor& exec = sequential()) {
  require(is_homogeneous_on(state, x), ErrorKind::invalid_argument,
          "decomposition check needs a single-site homogeneous state");
  const SiteState omega = single_site_restriction(state);
  DecompositionCheck r;
  r.product_part = product_part_moment(omega, x, word);
  r.correction = f_correction_moment(state, x, word, exec);
  r.direct = induced_moment(state, x, word, exec);
  r.residual = std::abs(r.direct - r.product_part - r.correction);
  return r;
}

}  // namespace flab
