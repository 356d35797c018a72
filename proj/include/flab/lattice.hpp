#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <vector>

#include "flab/core.hpp"

namespace flab {

using SiteId = std::int64_t;

enum class MetricKind { chain, grid2d, explicit_table };

/// Distance on the lattice. Chain: scale*|x-y|. Grid: scale times the l1
/// distance of (id / width, id % width). Explicit: a symmetric table over a
/// finite support. The triangle inequality is never assumed.
class Metric {
 public:
  static Metric chain(double scale = 1.0) {
    require(scale > 0 && std::isfinite(scale), ErrorKind::invalid_argument,
            "metric scale must be positive");
    Metric m;
    m.kind_ = MetricKind::chain;
    m.scale_ = scale;
    return m;
  }

  static Metric grid2d(std::int64_t width, double scale = 1.0) {
    require(width > 0, ErrorKind::invalid_argument, "grid width must be positive");
    Metric m = chain(scale);
    m.kind_ = MetricKind::grid2d;
    m.width_ = width;
    return m;
  }

  static Metric explicit_table(std::vector<SiteId> sites,
                               std::vector<std::vector<double>> distances) {
    const std::size_t n = sites.size();
    require(n > 0 && distances.size() == n, ErrorKind::invalid_argument,
            "explicit metric needs one distance row per site");
    auto table = std::make_shared<Table>();
    for (std::size_t i = 0; i < n; ++i) {
      require(distances[i].size() == n, ErrorKind::invalid_argument,
              "explicit metric distance table must be square");
      require(table->index.emplace(sites[i], i).second, ErrorKind::invalid_argument,
              "explicit metric has duplicate sites");
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double dij = distances[i][j];
        require(std::isfinite(dij) && dij >= 0, ErrorKind::invalid_argument,
                "explicit distances must be finite and nonnegative");
        require(dij == distances[j][i], ErrorKind::invalid_argument,
                "explicit distance table must be symmetric");
        require((i == j) == (dij == 0.0), ErrorKind::invalid_argument,
                "explicit distance must vanish exactly on the diagonal");
      }
    }
    table->sites = std::move(sites);
    table->d = std::move(distances);
    Metric m;
    m.kind_ = MetricKind::explicit_table;
    m.table_ = std::move(table);
    return m;
  }

  [[nodiscard]] MetricKind kind() const noexcept { return kind_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] std::int64_t width() const noexcept { return width_; }

  [[nodiscard]] bool contains(SiteId x) const {
    if (kind_ != MetricKind::explicit_table) return true;
    return table_->index.count(x) != 0;
  }

  [[nodiscard]] const std::vector<SiteId>& support() const {
    require(kind_ == MetricKind::explicit_table, ErrorKind::invalid_argument,
            "only explicit metrics have a finite support");
    return table_->sites;
  }

  [[nodiscard]] double distance(SiteId x, SiteId y) const {
    switch (kind_) {
      case MetricKind::chain:
        return scale_ * static_cast<double>(x > y ? x - y : y - x);
      case MetricKind::grid2d: {
        const auto [rx, cx] = grid_coords(x);
        const auto [ry, cy] = grid_coords(y);
        return scale_ * static_cast<double>(std::llabs(rx - ry) + std::llabs(cx - cy));
      }
      case MetricKind::explicit_table: {
        const auto ix = table_->index.find(x);
        const auto iy = table_->index.find(y);
        if (ix == table_->index.end() || iy == table_->index.end()) {
          fail(ErrorKind::invalid_argument, "site outside the explicit metric support");
        }
        return table_->d[ix->second][iy->second];
      }
    }
    return 0.0;
  }

  friend bool operator==(const Metric& a, const Metric& b) {
    return a.kind_ == b.kind_ && a.scale_ == b.scale_ && a.width_ == b.width_ &&
           a.table_ == b.table_;
  }

 private:
  struct Table {
    std::vector<SiteId> sites;
    std::vector<std::vector<double>> d;
    std::map<SiteId, std::size_t> index;
  };

  [[nodiscard]] std::pair<std::int64_t, std::int64_t> grid_coords(SiteId x) const {
    std::int64_t row = x / width_;
    std::int64_t col = x % width_;
    if (col < 0) {
      col += width_;
      row -= 1;
    }
    return {row, col};
  }

  MetricKind kind_ = MetricKind::chain;
  double scale_ = 1.0;
  std::int64_t width_ = 1;
  std::shared_ptr<const Table> table_;
};

/// Finite ordered set of distinct sites carrying its metric.
class Region {
 public:
  Region(std::vector<SiteId> sites, Metric metric)
      : sites_(std::move(sites)), metric_(std::move(metric)) {
    std::set<SiteId> seen;
    for (SiteId s : sites_) {
      require(seen.insert(s).second, ErrorKind::invalid_argument,
              "region contains a duplicate site");
      require(metric_.contains(s), ErrorKind::invalid_argument,
              "region site outside the metric support");
    }
  }

  static Region segment(SiteId first, std::size_t count, Metric metric = Metric::chain()) {
    std::vector<SiteId> s(count);
    for (std::size_t i = 0; i < count; ++i) s[i] = first + static_cast<SiteId>(i);
    return Region(std::move(s), std::move(metric));
  }

  [[nodiscard]] std::size_t size() const noexcept { return sites_.size(); }
  [[nodiscard]] bool empty() const noexcept { return sites_.empty(); }
  [[nodiscard]] std::span<const SiteId> sites() const noexcept { return sites_; }
  [[nodiscard]] SiteId operator[](std::size_t i) const { return sites_[i]; }
  [[nodiscard]] const Metric& metric() const noexcept { return metric_; }

  [[nodiscard]] bool contains(SiteId s) const {
    return std::find(sites_.begin(), sites_.end(), s) != sites_.end();
  }

 private:
  std::vector<SiteId> sites_;
  Metric metric_;
};

/// min over pairs; +inf if either side is empty.
inline double set_distance(std::span<const SiteId> xs, std::span<const SiteId> ys,
                           const Metric& m) {
  double best = std::numeric_limits<double>::infinity();
  for (SiteId x : xs) {
    for (SiteId y : ys) best = std::min(best, m.distance(x, y));
  }
  return best;
}

inline double region_distance(const Region& x, const Region& y) {
  require(!x.empty() && !y.empty(), ErrorKind::invalid_argument,
          "region distance needs nonempty regions");
  require(x.metric() == y.metric(), ErrorKind::invalid_argument,
          "regions carry different metrics");
  return set_distance(x.sites(), y.sites(), x.metric());
}

/// d(y, Y \ y) for the element at position i.
inline double distance_to_rest(std::span<const SiteId> ys, std::size_t i, const Metric& m) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < ys.size(); ++j) {
    if (j != i) best = std::min(best, m.distance(ys[i], ys[j]));
  }
  return best;
}

/// Spread with the singleton convention Delta({y}) = 0.
inline double spread_of(std::span<const SiteId> ys, const Metric& m) {
  if (ys.size() < 2) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) worst = std::max(worst, distance_to_rest(ys, i, m));
  return worst;
}

inline double spread(const Region& y) {
  require(y.size() >= 2, ErrorKind::invalid_argument, "spread needs at least two sites");
  return spread_of(y.sites(), y.metric());
}

inline double k_spread(const Region& y, std::size_t k) {
  const std::size_t n = y.size();
  require(k >= 1 && k < n, ErrorKind::invalid_argument, "k-spread needs 1 <= k < |Y|");
  const auto sites = y.sites();
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
  double worst = 0.0;
  std::vector<SiteId> inside, outside;
  do {
    inside.clear();
    outside.clear();
    for (std::size_t i = 0; i < n; ++i) (pick[i] ? inside : outside).push_back(sites[i]);
    worst = std::max(worst, set_distance(inside, outside, y.metric()));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return worst;
}

/// Greedy ordering: repeatedly take the point farthest from the rest of the
/// remaining set, smallest identifier first on ties. Each prefix choice then
/// satisfies d(y_l, {y_{l+1}..}) = Delta({y_l..}).
inline std::vector<SiteId> spread_optimal_order(std::span<const SiteId> ys, const Metric& m) {
  std::vector<SiteId> rest(ys.begin(), ys.end());
  std::sort(rest.begin(), rest.end());
  std::vector<SiteId> out;
  out.reserve(rest.size());
  while (rest.size() > 1) {
    std::size_t pick = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      const double di = distance_to_rest(rest, i, m);
      if (di > best) {
        best = di;
        pick = i;
      }
    }
    out.push_back(rest[pick]);
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  if (!rest.empty()) out.push_back(rest.front());
  return out;
}

inline std::vector<SiteId> spread_optimal_enumeration(const Region& y) {
  return spread_optimal_order(y.sites(), y.metric());
}

/// Largest s with scale * s <= r, evaluated exactly as Metric::distance does.
inline std::int64_t lattice_steps(double scale, double r) {
  auto steps = static_cast<std::int64_t>(std::floor(r / scale));
  while (scale * static_cast<double>(steps + 1) <= r) ++steps;
  while (steps > 0 && scale * static_cast<double>(steps) > r) --steps;
  return steps;
}

/// N(r): sites within distance r of a center, including the center.
/// Chain and grid use the closed-form ambient value; explicit metrics take
/// the supremum over the given support.
inline std::int64_t ball_count(const Metric& m, double r, const Region& support) {
  require(r >= 0, ErrorKind::invalid_argument, "ball radius must be nonnegative");
  switch (m.kind()) {
    case MetricKind::chain: {
      const std::int64_t steps = lattice_steps(m.scale(), r);
      return 2 * steps + 1;
    }
    case MetricKind::grid2d: {
      const std::int64_t steps = lattice_steps(m.scale(), r);
      return 2 * steps * steps + 2 * steps + 1;
    }
    case MetricKind::explicit_table: {
      require(!support.empty(), ErrorKind::invalid_argument, "ball count needs a support");
      std::int64_t best = 0;
      for (SiteId x : support.sites()) {
        std::int64_t c = 0;
        for (SiteId y : support.sites()) c += m.distance(x, y) <= r ? 1 : 0;
        best = std::max(best, c);
      }
      return best;
    }
  }
  return 0;
}

/// N(X, k, r): number of k-subsets Y of X with Delta(Y) <= r, by enumeration.
inline std::int64_t count_subsets_with_spread(const Region& x, std::size_t k, double r) {
  const std::size_t n = x.size();
  require(k >= 2 && k <= n, ErrorKind::invalid_argument, "subset size must satisfy 2 <= k <= |X|");
  const auto sites = x.sites();
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  std::vector<SiteId> ys(k);
  std::int64_t count = 0;
  while (true) {
    for (std::size_t i = 0; i < k; ++i) ys[i] = sites[idx[i]];
    if (spread_of(ys, x.metric()) <= r) ++count;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return count;
}

}  // namespace flab
