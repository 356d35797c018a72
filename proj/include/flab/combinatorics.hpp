#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "flab/core.hpp"

namespace flab {

/// Exact counts that outgrow 64 bits (q_[n] reaches ~10^31 at n = 30).
using BigCount = unsigned __int128;

inline std::string to_string(BigCount v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

/// Perfect matching of {1..n}; every pair stored with i < j.
struct PairPartition {
  std::vector<std::pair<int, int>> pairs;

  friend bool operator==(const PairPartition&, const PairPartition&) = default;
};

/// (I_1, ..., I_k): disjoint nonempty 1-based index blocks covering {1..n},
/// each block sorted ascending.
struct OrderedSetPartition {
  std::vector<std::vector<int>> blocks;

  [[nodiscard]] std::size_t size() const noexcept { return blocks.size(); }
  friend bool operator==(const OrderedSetPartition&, const OrderedSetPartition&) = default;
};

/// y_j in order of first appearance and I_j = x^{-1}(y_j).
template <class T>
struct TupleClassification {
  std::vector<T> subset;
  OrderedSetPartition partition;
};

namespace detail {

inline void pair_recurse(std::vector<int>& free, std::vector<std::pair<int, int>>& cur,
                         std::vector<PairPartition>& out) {
  if (free.empty()) {
    out.push_back({cur});
    return;
  }
  const int first = free.front();
  for (std::size_t j = 1; j < free.size(); ++j) {
    const int partner = free[j];
    std::vector<int> rest;
    rest.reserve(free.size() - 2);
    for (std::size_t t = 1; t < free.size(); ++t) {
      if (t != j) rest.push_back(free[t]);
    }
    cur.emplace_back(first, partner);
    pair_recurse(rest, cur, out);
    cur.pop_back();
  }
}

inline OrderedSetPartition blocks_from_labels(const std::vector<int>& labels, int k) {
  OrderedSetPartition p;
  p.blocks.resize(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    p.blocks[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i) + 1);
  }
  return p;
}

}  // namespace detail

/// All (n-1)!! perfect matchings in lexicographic order. Odd n gives none,
/// n = 0 gives the single empty matching.
inline std::vector<PairPartition> pair_partitions(int n) {
  require(n >= 0, ErrorKind::invalid_argument, "pair partitions need n >= 0");
  if (n > 12) fail(ErrorKind::cost_guard, "pair_partitions: n > 12 exceeds the cost guard");
  if (n % 2 == 1) return {};
  std::vector<int> free(static_cast<std::size_t>(n));
  std::iota(free.begin(), free.end(), 1);
  std::vector<std::pair<int, int>> cur;
  std::vector<PairPartition> out;
  detail::pair_recurse(free, cur, out);
  return out;
}

inline std::uint64_t double_factorial(int n) {
  std::uint64_t r = 1;
  for (int i = n; i > 1; i -= 2) r *= static_cast<std::uint64_t>(i);
  return r;
}

/// S(k, n): partitions of an n-set into k nonempty blocks.
inline std::uint64_t stirling2(int k, int n) {
  require(k >= 1 && k <= n && n <= 20, ErrorKind::invalid_argument,
          "stirling2 needs 1 <= k <= n <= 20");
  std::vector<std::vector<std::uint64_t>> s(static_cast<std::size_t>(n) + 1,
                                            std::vector<std::uint64_t>(static_cast<std::size_t>(n) + 1, 0));
  s[0][0] = 1;
  for (int m = 1; m <= n; ++m) {
    for (int j = 1; j <= m; ++j) {
      s[m][j] = static_cast<std::uint64_t>(j) * s[m - 1][j] + s[m - 1][j - 1];
    }
  }
  return s[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

/// Unordered set partitions of {1..n} with blocks ordered by their smallest
/// element (restricted growth strings in lexicographic order). k = 0 means
/// every block count.
inline std::vector<OrderedSetPartition> set_partitions(int n, int k = 0) {
  require(n >= 1 && n <= 12, ErrorKind::invalid_argument, "set partitions need 1 <= n <= 12");
  std::vector<OrderedSetPartition> out;
  std::vector<int> rgs(static_cast<std::size_t>(n), 0);
  std::vector<int> maxes(static_cast<std::size_t>(n), 0);
  while (true) {
    const int blocks = maxes.back() + 1;
    if (k == 0 || blocks == k) out.push_back(detail::blocks_from_labels(rgs, blocks));
    int i = n - 1;
    while (i > 0 && rgs[static_cast<std::size_t>(i)] > maxes[static_cast<std::size_t>(i - 1)]) --i;
    if (i == 0) break;
    ++rgs[static_cast<std::size_t>(i)];
    maxes[static_cast<std::size_t>(i)] =
        std::max(maxes[static_cast<std::size_t>(i - 1)], rgs[static_cast<std::size_t>(i)]);
    for (int j = i + 1; j < n; ++j) {
      rgs[static_cast<std::size_t>(j)] = 0;
      maxes[static_cast<std::size_t>(j)] = maxes[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

/// All k! S(k, n) ordered partitions into k nonempty blocks.
inline std::vector<OrderedSetPartition> ordered_partitions(int k, int n) {
  require(k >= 1 && k <= n && n <= 10, ErrorKind::invalid_argument,
          "ordered partitions need 1 <= k <= n <= 10");
  std::vector<OrderedSetPartition> out;
  std::vector<int> perm(static_cast<std::size_t>(k));
  for (const auto& p : set_partitions(n, k)) {
    std::iota(perm.begin(), perm.end(), 0);
    do {
      OrderedSetPartition q;
      q.blocks.reserve(perm.size());
      for (int b : perm) q.blocks.push_back(p.blocks[static_cast<std::size_t>(b)]);
      out.push_back(std::move(q));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return out;
}

inline bool all_blocks_at_least_two(const OrderedSetPartition& p) {
  return std::all_of(p.blocks.begin(), p.blocks.end(),
                     [](const auto& b) { return b.size() >= 2; });
}

/// Pi_{>2}(k, n): every block has >= 2 elements and at least one has > 2.
inline std::vector<OrderedSetPartition> partitions_min2_one_gt2(int k, int n) {
  std::vector<OrderedSetPartition> out;
  for (auto& p : ordered_partitions(k, n)) {
    const bool big = std::any_of(p.blocks.begin(), p.blocks.end(),
                                 [](const auto& b) { return b.size() > 2; });
    if (all_blocks_at_least_two(p) && big) out.push_back(std::move(p));
  }
  return out;
}

/// q_[n+2] = (n+1) q_[n+1] + q_[n], q_[2] = 1, q_[3] = 2.
inline BigCount q_sequence(int n) {
  require(n >= 2 && n <= 30, ErrorKind::invalid_argument, "q_sequence needs 2 <= n <= 30");
  BigCount prev = 1;  // q_[2]
  BigCount cur = 2;   // q_[3]
  if (n == 2) return prev;
  for (int m = 2; m + 1 < n; ++m) {
    const BigCount next = static_cast<BigCount>(m + 1) * cur + prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

template <class T>
TupleClassification<T> classify_tuple(const std::vector<T>& x) {
  require(!x.empty(), ErrorKind::invalid_argument, "cannot classify an empty tuple");
  TupleClassification<T> c;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto it = std::find(c.subset.begin(), c.subset.end(), x[i]);
    const auto j = static_cast<std::size_t>(it - c.subset.begin());
    if (it == c.subset.end()) {
      c.subset.push_back(x[i]);
      c.partition.blocks.emplace_back();
    }
    c.partition.blocks[j].push_back(static_cast<int>(i) + 1);
  }
  return c;
}

/// Compositions of n into k positive parts, lexicographic.
inline std::vector<std::vector<int>> integer_partitions_into_k(int n, int k) {
  require(k >= 1 && k <= n, ErrorKind::invalid_argument, "compositions need 1 <= k <= n");
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int remaining, int slots) -> void {
    if (slots == 1) {
      cur.push_back(remaining);
      out.push_back(cur);
      cur.pop_back();
      return;
    }
    for (int part = 1; part <= remaining - (slots - 1); ++part) {
      cur.push_back(part);
      self(self, remaining - part, slots - 1);
      cur.pop_back();
    }
  };
  rec(rec, n, k);
  return out;
}

/// |E_k(X)| = N (N-1) ... (N-k+1), as a double.
inline double falling_factorial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t l = 0; l < k; ++l) {
    if (l >= n) return 0.0;
    r *= static_cast<double>(n - l);
  }
  return r;
}

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace flab
