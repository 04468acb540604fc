#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hemi {

inline constexpr double pi = std::numbers::pi;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-side contract was violated (bad dimension, wrong metric kind,
/// boundary not minimal, ...). The CLI maps this to exit status 2.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A finite-difference stencil left the domain on which a callback is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, non-positive factors, non-SPD metrics.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

template <int N>
using Point = std::array<double, N>;

template <int N>
double norm(const Point<N>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

template <int N>
std::string format_point(const Point<N>& x) {
  std::string out = "(";
  char buf[32];
  for (int i = 0; i < N; ++i) {
    std::snprintf(buf, sizeof buf, "%.6g", x[i]);
    out += buf;
    out += (i + 1 < N) ? ", " : ")";
  }
  return out;
}

/// Dense tensor with every index running over 0..N-1, row-major.
template <int N, int Rank>
class Tensor {
 public:
  static constexpr std::size_t size = [] {
    std::size_t s = 1;
    for (int r = 0; r < Rank; ++r) s *= N;
    return s;
  }();

  Tensor() { data_.fill(0.0); }

  template <typename... I>
  double& operator()(I... idx) {
    static_assert(sizeof...(I) == Rank);
    return data_[flat(static_cast<int>(idx)...)];
  }
  template <typename... I>
  double operator()(I... idx) const {
    static_assert(sizeof...(I) == Rank);
    return data_[flat(static_cast<int>(idx)...)];
  }

  std::array<double, size>& data() { return data_; }
  const std::array<double, size>& data() const { return data_; }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  template <typename... I>
  static constexpr std::size_t flat(I... idx) {
    std::size_t k = 0;
    ((k = k * N + static_cast<std::size_t>(idx)), ...);
    return k;
  }

  std::array<double, size> data_;
};

template <int N>
using Vec = Tensor<N, 1>;
template <int N>
using Mat = Tensor<N, 2>;

/// Pairwise summation with a fixed recursion order; identical inputs always
/// give bit-identical results.
inline double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t block = 16;
  if (v.size() <= block) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Seeded stream of doubles in [0, 1) (splitmix64). Sequences do not depend on
/// the standard library's distribution implementation.
class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) : state_(seed) {}

  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

/// Exact volume of the unit sphere S^{n-1}.
constexpr double sphere_volume(int n) {
  // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2); only even n are used here.
  switch (n) {
    case 2: return 2.0 * pi;
    case 3: return 4.0 * pi;
    case 4: return 2.0 * pi * pi;
    case 5: return 8.0 * pi * pi / 3.0;
    case 6: return pi * pi * pi;
    case 7: return 16.0 * pi * pi * pi / 15.0;
    default: return std::numeric_limits<double>::quiet_NaN();
  }
}

/// Exact volume of the unit ball B^n.
constexpr double ball_volume(int n) { return sphere_volume(n) / n; }

}  // namespace hemi
