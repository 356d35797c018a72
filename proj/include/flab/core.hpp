#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

namespace flab {

using Complex = std::complex<double>;

enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  cost_guard,
  config,
};

/// Every failure raised by the library. The kind selects the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const char* what) {
  if (!cond) fail(kind, what);
}

/// Neumaier-compensated accumulator. Works for double and std::complex<double>
/// (compensation is applied componentwise).
template <class T>
class KahanSum {
 public:
  KahanSum() = default;

  KahanSum& operator+=(const T& value) {
    if constexpr (std::is_same_v<T, Complex>) {
      add(re_sum_, re_cor_, value.real());
      add(im_sum_, im_cor_, value.imag());
    } else {
      add(re_sum_, re_cor_, value);
    }
    return *this;
  }

  [[nodiscard]] T value() const {
    if constexpr (std::is_same_v<T, Complex>) {
      return {re_sum_ + re_cor_, im_sum_ + im_cor_};
    } else {
      return re_sum_ + re_cor_;
    }
  }

 private:
  static void add(double& sum, double& cor, double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      cor += (sum - t) + x;
    } else {
      cor += (x - t) + sum;
    }
    sum = t;
  }

  double re_sum_ = 0.0;
  double re_cor_ = 0.0;
  double im_sum_ = 0.0;
  double im_cor_ = 0.0;
};

/// Execution context handed down from the driver. Work is split into
/// contiguous static chunks; callers write results into preallocated slots
/// and fold them in a fixed order, so values never depend on the thread count.
class Executor {
 public:
  explicit Executor(unsigned threads = 1) : threads_(threads == 0 ? 1 : threads) {}

  [[nodiscard]] unsigned threads() const noexcept { return threads_; }

  template <class Fn>
  void parallel_for(std::size_t count, Fn&& fn) const {
    const std::size_t workers = std::min<std::size_t>(threads_, count);
    if (workers <= 1) {
      for (std::size_t i = 0; i < count; ++i) fn(i);
      return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(count, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

 private:
  unsigned threads_;
};

inline const Executor& sequential() {
  static const Executor exec(1);
  return exec;
}

}  // namespace flab
