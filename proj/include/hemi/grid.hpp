#pragma once

// Discretization of the closed unit ball in dimension 4 or 6: product
// quadrature (Gauss-Legendre radius x tensorized hyperspherical angles) and a
// fourth-order central finite-difference engine.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hemi/core.hpp"

namespace hemi {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

/// P_n(t) and P_n'(t) by the three-term recurrence.
inline std::pair<double, double> legendre(int n, double t) {
  double p0 = 1.0, p1 = t;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (t * p1 - p0) / (t * t - 1.0)};
}

}  // namespace detail

/// Gauss-Legendre rule with `count` >= 2 nodes on [lo, hi], ascending.
inline QuadratureRule gauss_legendre(int count, double lo, double hi) {
  QuadratureRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  for (int i = 0; i < (count + 1) / 2; ++i) {
    double t = std::cos(pi * (i + 0.75) / (count + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = detail::legendre(count, t);
      const double dt = p / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    const double dp = detail::legendre(count, t).second;
    const double w = 2.0 / ((1.0 - t * t) * dp * dp);
    rule.nodes[i] = mid - half * t;
    rule.nodes[count - 1 - i] = mid + half * t;
    rule.weights[i] = half * w;
    rule.weights[count - 1 - i] = half * w;
  }
  return rule;
}

/// Gauss rule for the weight (1 - z^2)^a on [-1, 1], a >= 0, by Golub-Welsch.
/// Nodes ascending and mirrored exactly.
inline QuadratureRule gauss_gegenbauer(int count, double a) {
  if (count < 1 || a < 0.0) throw PreconditionError("gauss_gegenbauer: need count >= 1, a >= 0");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(count);
  Eigen::VectorXd off(std::max(count - 1, 1));
  for (int j = 1; j < count; ++j) {
    const double s = 2.0 * j + 2.0 * a;
    off(j - 1) = std::sqrt(j * (j + 2.0 * a) / (s * s - 1.0));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, off.head(count - 1), Eigen::ComputeEigenvectors);
  const double mu0 = std::sqrt(pi) * std::tgamma(a + 1.0) / std::tgamma(a + 1.5);
  QuadratureRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  for (int i = 0; i < count; ++i) {
    rule.nodes[i] = eig.eigenvalues()(i);
    const double v = eig.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v * v;
  }
  for (int i = 0; i < count / 2; ++i) {
    const int j = count - 1 - i;
    const double z = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -z, rule.nodes[j] = z;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (count % 2 == 1) rule.nodes[count / 2] = 0.0;
  return rule;
}

template <int N>
struct BallGrid {
  static_assert(N == 4 || N == 6, "ball grids exist for dimensions 4 and 6");
  static constexpr int dimension = N;

  int radial_count = 0;
  int angular_count_per_axis = 0;
  double fd_step = 0.0;
  bool radial_only = false;

  /// Gauss-Legendre nodes and plain weights on [0, 1].
  QuadratureRule radial;
  /// Unit vectors with weights summing to |S^{N-1}|.
  std::vector<Point<N>> angular_nodes;
  std::vector<double> angular_weights;

  /// Bulk nodes r_i * w_j, weight = radial weight * r^{N-1} * angular weight.
  std::vector<Point<N>> bulk_nodes;
  std::vector<double> bulk_weights;

  /// The angular nodes placed at radius 1.
  std::vector<Point<N>> boundary_nodes;
  std::vector<double> boundary_weights;
};

namespace detail {

/// Fixed generic direction for the single ray of a radial-only grid.
template <int N>
Point<N> ray_direction() {
  Point<N> d{};
  double s = 0.0;
  for (int i = 0; i < N; ++i) {
    d[i] = 1.0 + 0.37 * i;
    s += d[i] * d[i];
  }
  for (double& v : d) v /= std::sqrt(s);
  return d;
}

/// Tensorized rule on S^{N-1} in hyperspherical angles
///   x_1 = cos t_1, x_2 = sin t_1 cos t_2, ..., x_N = sin t_1 ... sin t_{N-2} sin p.
/// Polar angle t_a carries the weight sin^k t_a, k = N - 2 - a; in z = cos t_a
/// this is the Gauss-Gegenbauer weight (1 - z^2)^{(k-1)/2}. The azimuth uses
/// the periodic trapezoid rule.
template <int N>
void angular_rule(int count, std::vector<Point<N>>& nodes,
                  std::vector<double>& weights) {
  constexpr int polar_axes = N - 2;
  std::array<QuadratureRule, polar_axes> polar;
  for (int a = 0; a < polar_axes; ++a)
    polar[a] = gauss_gegenbauer(count, 0.5 * (polar_axes - a - 1));
  std::array<int, polar_axes + 1> idx{};
  std::size_t total = 1;
  for (int a = 0; a <= polar_axes; ++a) total *= static_cast<std::size_t>(count);
  nodes.reserve(total);
  weights.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int a = polar_axes; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % count);
      rem /= count;
    }
    Point<N> x{};
    double w = 1.0;
    double sin_prod = 1.0;
    for (int a = 0; a < polar_axes; ++a) {
      const double z = polar[a].nodes[idx[a]];
      x[a] = sin_prod * z;
      w *= polar[a].weights[idx[a]];
      sin_prod *= std::sqrt((1.0 - z) * (1.0 + z));
    }
    const double p = 2.0 * pi * (idx[polar_axes] + 0.5) / count;
    x[N - 2] = sin_prod * std::cos(p);
    x[N - 1] = sin_prod * std::sin(p);
    w *= 2.0 * pi / count;
    nodes.push_back(x);
    weights.push_back(w);
  }
}

}  // namespace detail

/// Builds the product grid. In radial-only mode a single ray carries the
/// radial nodes and the angular factor is the exact sphere volume.
template <int N>
BallGrid<N> build_grid(int radial_count, int angular_count_per_axis,
                       double fd_step, bool radial_only) {
  if (radial_count < 4)
    throw PreconditionError("build_grid: radial_count must be >= 4");
  if (!radial_only && angular_count_per_axis < 4)
    throw PreconditionError("build_grid: angular_count_per_axis must be >= 4");
  if (!(fd_step > 0.0) || fd_step > 0.05)
    throw PreconditionError("build_grid: fd_step must lie in (0, 0.05], got " +
                            std::to_string(fd_step));

  BallGrid<N> g;
  g.radial_count = radial_count;
  g.angular_count_per_axis = radial_only ? 0 : angular_count_per_axis;
  g.fd_step = fd_step;
  g.radial_only = radial_only;
  g.radial = gauss_legendre(radial_count, 0.0, 1.0);

  if (radial_only) {
    g.angular_nodes.push_back(detail::ray_direction<N>());
    g.angular_weights.push_back(sphere_volume(N));
  } else {
    detail::angular_rule<N>(angular_count_per_axis, g.angular_nodes,
                            g.angular_weights);
  }

  g.bulk_nodes.reserve(g.radial.nodes.size() * g.angular_nodes.size());
  for (std::size_t i = 0; i < g.radial.nodes.size(); ++i) {
    const double r = g.radial.nodes[i];
    const double wr = g.radial.weights[i] * std::pow(r, N - 1);
    for (std::size_t j = 0; j < g.angular_nodes.size(); ++j) {
      Point<N> x = g.angular_nodes[j];
      for (double& v : x) v *= r;
      g.bulk_nodes.push_back(x);
      g.bulk_weights.push_back(wr * g.angular_weights[j]);
    }
  }
  g.boundary_nodes = g.angular_nodes;
  g.boundary_weights = g.angular_weights;
  return g;
}

namespace detail {

template <int N>
double weighted_sum(const std::vector<Point<N>>& nodes,
                    const std::vector<double>& weights,
                    std::span<const double> values, const char* what) {
  if (values.size() != nodes.size())
    throw PreconditionError(std::string(what) + ": value count does not match node count");
  std::vector<double> terms(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k]))
      throw NumericalError(std::string(what) + ": non-finite value at node " +
                           std::to_string(k) + " " + format_point<N>(nodes[k]));
    terms[k] = weights[k] * values[k];
  }
  return pairwise_sum(terms);
}

}  // namespace detail

/// Sum of weight * value over bulk nodes; `values` already include any
/// volume density.
template <int N>
double integrate_bulk(const BallGrid<N>& grid, std::span<const double> values) {
  return detail::weighted_sum<N>(grid.bulk_nodes, grid.bulk_weights, values,
                                 "integrate_bulk");
}

template <int N, class Field, class Density>
double integrate_bulk(const BallGrid<N>& grid, Field&& field, Density&& density) {
  std::vector<double> v(grid.bulk_nodes.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    v[k] = field(grid.bulk_nodes[k]) * density(grid.bulk_nodes[k]);
  return integrate_bulk(grid, std::span<const double>(v));
}

template <int N>
double integrate_boundary(const BallGrid<N>& grid, std::span<const double> values) {
  return detail::weighted_sum<N>(grid.boundary_nodes, grid.boundary_weights,
                                 values, "integrate_boundary");
}

template <int N, class Field, class Density>
double integrate_boundary(const BallGrid<N>& grid, Field&& field,
                          Density&& area_density) {
  std::vector<double> v(grid.boundary_nodes.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    v[k] = field(grid.boundary_nodes[k]) * area_density(grid.boundary_nodes[k]);
  return integrate_boundary(grid, std::span<const double>(v));
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

/// Five-point central stencils, fourth order in the step.
struct Stencil {
  std::array<int, 5> offsets;
  std::array<double, 5> coeffs;  // multiply by step^-order
  int order;
};

inline constexpr Stencil first_derivative_stencil{
    {-2, -1, 0, 1, 2}, {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0}, 1};
inline constexpr Stencil second_derivative_stencil{
    {-2, -1, 0, 1, 2},
    {-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0},
    2};

/// Central-difference engine for callbacks defined on the ball of radius
/// `domain_radius`. Every evaluation point is checked against that radius.
template <int N>
class FiniteDifference {
 public:
  FiniteDifference(double step, double domain_radius)
      : step_(step), domain_radius_(domain_radius) {
    if (!(step > 0.0)) throw PreconditionError("finite difference step must be positive");
  }

  double step() const { return step_; }
  double domain_radius() const { return domain_radius_; }

  /// Throws DomainError if `p` lies outside the callback domain.
  void check_point(const Point<N>& p) const {
    if (norm<N>(p) > domain_radius_ * (1.0 + 1e-14))
      throw DomainError("finite-difference stencil point " + format_point<N>(p) +
                        " lies outside the callback domain of radius " +
                        std::to_string(domain_radius_));
  }

  /// Mixed partial derivative with per-axis order 0, 1 or 2, built as the
  /// tensor product of the one-dimensional stencils.
  template <class F>
  double derivative(F&& f, const Point<N>& x, const std::array<int, N>& orders) const {
    std::array<int, N> axes{};
    int active = 0;
    int total_order = 0;
    for (int i = 0; i < N; ++i) {
      if (orders[i] < 0 || orders[i] > 2)
        throw PreconditionError("fd_derivative: per-axis order must be 0, 1 or 2");
      if (orders[i] > 0) axes[active++] = i;
      total_order += orders[i];
    }
    if (active == 0) {
      check_point(x);
      return f(x);
    }
    std::array<int, N> pos{};
    double acc = 0.0;
    while (true) {
      Point<N> p = x;
      double c = 1.0;
      for (int a = 0; a < active; ++a) {
        const Stencil& s = orders[axes[a]] == 1 ? first_derivative_stencil
                                                : second_derivative_stencil;
        c *= s.coeffs[pos[a]];
        p[axes[a]] += s.offsets[pos[a]] * step_;
      }
      if (c != 0.0) {
        check_point(p);
        acc += c * f(p);
      }
      int a = 0;
      for (; a < active; ++a) {
        if (++pos[a] < 5) break;
        pos[a] = 0;
      }
      if (a == active) break;
    }
    return acc / std::pow(step_, total_order);
  }

 private:
  double step_;
  double domain_radius_;
};

/// Value, gradient and Hessian of a K-component field at one point.
template <int N, std::size_t K>
struct Jet2 {
  std::array<double, K> value{};
  std::array<std::array<double, K>, N> d1{};
  std::array<std::array<std::array<double, K>, N>, N> d2{};
};

template <int N, std::size_t K>
struct Jet1 {
  std::array<double, K> value{};
  std::array<std::array<double, K>, N> d1{};
};

/// First derivatives of a K-component field with the five-point stencil.
template <int N, std::size_t K, class F>
Jet1<N, K> first_jet(const FiniteDifference<N>& fd, F&& f, const Point<N>& x) {
  const double h = fd.step();
  Jet1<N, K> jet;
  fd.check_point(x);
  jet.value = f(x);
  for (int i = 0; i < N; ++i) {
    std::array<std::array<double, K>, 4> s;
    const int off[4] = {-2, -1, 1, 2};
    for (int t = 0; t < 4; ++t) {
      Point<N> p = x;
      p[i] += off[t] * h;
      fd.check_point(p);
      s[t] = f(p);
    }
    for (std::size_t c = 0; c < K; ++c)
      jet.d1[i][c] = (s[0][c] - 8.0 * s[1][c] + 8.0 * s[2][c] - s[3][c]) / (12.0 * h);
  }
  return jet;
}

/// Value, gradient and Hessian with fourth-order stencils; mixed second
/// derivatives use the composed first-derivative stencil (16 points per pair).
template <int N, std::size_t K, class F>
Jet2<N, K> second_jet(const FiniteDifference<N>& fd, F&& f, const Point<N>& x) {
  const double h = fd.step();
  Jet2<N, K> jet;
  fd.check_point(x);
  jet.value = f(x);
  const int off[4] = {-2, -1, 1, 2};
  const double c1[4] = {1.0, -8.0, 8.0, -1.0};  // /12h
  for (int i = 0; i < N; ++i) {
    std::array<std::array<double, K>, 4> s;
    for (int t = 0; t < 4; ++t) {
      Point<N> p = x;
      p[i] += off[t] * h;
      fd.check_point(p);
      s[t] = f(p);
    }
    for (std::size_t c = 0; c < K; ++c) {
      jet.d1[i][c] = (s[0][c] - 8.0 * s[1][c] + 8.0 * s[2][c] - s[3][c]) / (12.0 * h);
      jet.d2[i][i][c] = (-s[0][c] + 16.0 * s[1][c] - 30.0 * jet.value[c] +
                         16.0 * s[2][c] - s[3][c]) /
                        (12.0 * h * h);
    }
  }
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      std::array<double, K> acc{};
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          Point<N> p = x;
          p[i] += off[a] * h;
          p[j] += off[b] * h;
          fd.check_point(p);
          const auto v = f(p);
          const double w = c1[a] * c1[b];
          for (std::size_t c = 0; c < K; ++c) acc[c] += w * v[c];
        }
      }
      for (std::size_t c = 0; c < K; ++c) {
        jet.d2[i][j][c] = acc[c] / (144.0 * h * h);
        jet.d2[j][i][c] = jet.d2[i][j][c];
      }
    }
  }
  return jet;
}

}  // namespace hemi
