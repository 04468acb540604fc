#pragma once

#include <functional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "hemi/core.hpp"
#include "hemi/grid.hpp"

namespace hemi {

enum class MetricKind { ConformalToFlat, GeneralMatrix };

/// Smooth metric on (a neighbourhood of) the closed unit ball.
///
/// ConformalToFlat: g = factor(x)^2 * flat.
/// GeneralMatrix:   g = matrix(x), symmetric positive definite.
///
/// Callbacks must be defined on the ball of radius `domain_radius`, which has
/// to exceed 1 + 4 * fd_step for boundary stencils to stay central.
template <int N>
struct MetricSpec {
  using Matrix = Eigen::Matrix<double, N, N>;

  MetricKind kind = MetricKind::ConformalToFlat;
  std::function<double(const Point<N>&)> factor;
  std::function<Matrix(const Point<N>&)> matrix;
  bool rotationally_symmetric = false;
  std::string name;
  double domain_radius = 2.0;

  static constexpr int dimension = N;

  bool conformally_flat() const { return kind == MetricKind::ConformalToFlat; }

  Matrix at(const Point<N>& x) const {
    if (kind == MetricKind::ConformalToFlat) {
      const double f = factor(x);
      return Matrix::Identity() * (f * f);
    }
    return matrix(x);
  }
};

template <int N>
MetricSpec<N> conformal_metric(std::string name,
                               std::function<double(const Point<N>&)> factor,
                               bool rotationally_symmetric,
                               double domain_radius = 2.0) {
  MetricSpec<N> m;
  m.kind = MetricKind::ConformalToFlat;
  m.factor = std::move(factor);
  m.rotationally_symmetric = rotationally_symmetric;
  m.name = std::move(name);
  m.domain_radius = domain_radius;
  return m;
}

template <int N>
MetricSpec<N> matrix_metric(
    std::string name,
    std::function<Eigen::Matrix<double, N, N>(const Point<N>&)> matrix,
    bool rotationally_symmetric, double domain_radius = 2.0) {
  MetricSpec<N> m;
  m.kind = MetricKind::GeneralMatrix;
  m.matrix = std::move(matrix);
  m.rotationally_symmetric = rotationally_symmetric;
  m.name = std::move(name);
  m.domain_radius = domain_radius;
  return m;
}

/// Metric components and their first and second coordinate derivatives at a
/// point: dg(c, a, b) = d_c g_ab, ddg(c, d, a, b) = d_c d_d g_ab.
template <int N>
struct MetricJet {
  Mat<N> g;
  Tensor<N, 3> dg;
  Tensor<N, 4> ddg;
};

template <int N>
MetricJet<N> metric_jet(const MetricSpec<N>& metric, const FiniteDifference<N>& fd,
                        const Point<N>& x) {
  MetricJet<N> jet;
  if (metric.kind == MetricKind::ConformalToFlat) {
    auto psi = [&](const Point<N>& p) {
      const double f = metric.factor(p);
      return std::array<double, 1>{f * f};
    };
    const auto s = second_jet<N, 1>(fd, psi, x);
    for (int a = 0; a < N; ++a) {
      jet.g(a, a) = s.value[0];
      for (int c = 0; c < N; ++c) {
        jet.dg(c, a, a) = s.d1[c][0];
        for (int d = 0; d < N; ++d) jet.ddg(c, d, a, a) = s.d2[c][d][0];
      }
    }
    return jet;
  }
  constexpr std::size_t K = static_cast<std::size_t>(N * (N + 1) / 2);
  auto packed = [&](const Point<N>& p) {
    const auto m = metric.matrix(p);
    std::array<double, K> v{};
    std::size_t k = 0;
    for (int a = 0; a < N; ++a)
      for (int b = a; b < N; ++b) v[k++] = 0.5 * (m(a, b) + m(b, a));
    return v;
  };
  const auto s = second_jet<N, K>(fd, packed, x);
  std::size_t k = 0;
  for (int a = 0; a < N; ++a) {
    for (int b = a; b < N; ++b, ++k) {
      jet.g(a, b) = jet.g(b, a) = s.value[k];
      for (int c = 0; c < N; ++c) {
        jet.dg(c, a, b) = jet.dg(c, b, a) = s.d1[c][k];
        for (int d = 0; d < N; ++d)
          jet.ddg(c, d, a, b) = jet.ddg(c, d, b, a) = s.d2[c][d][k];
      }
    }
  }
  return jet;
}

/// Positivity / SPD scan over every bulk and boundary node and over the
/// boundary nodes pushed out to radius 1 + 4h, plus a seeded spot-check of
/// rotational symmetry when the metric claims it. Throws with the offending
/// node named.
template <int N>
void validate_metric(const MetricSpec<N>& metric, const BallGrid<N>& grid) {
  if (metric.kind == MetricKind::ConformalToFlat && !metric.factor)
    throw PreconditionError("metric '" + metric.name + "' has no conformal factor");
  if (metric.kind == MetricKind::GeneralMatrix && !metric.matrix)
    throw PreconditionError("metric '" + metric.name + "' has no matrix callback");
  if (grid.radial_only && !metric.rotationally_symmetric)
    throw PreconditionError("metric '" + metric.name +
                            "' is not rotationally symmetric; the radial-only grid does not apply");
  const double reach = 1.0 + 4.0 * grid.fd_step;
  if (metric.domain_radius < reach)
    throw DomainError("metric '" + metric.name + "' is defined only up to radius " +
                      std::to_string(metric.domain_radius) + " < 1 + 4 fd_step");

  auto check = [&](const Point<N>& x) {
    if (metric.kind == MetricKind::ConformalToFlat) {
      const double f = metric.factor(x);
      if (!std::isfinite(f) || !(f > 0.0))
        throw NumericalError("metric '" + metric.name +
                             "': conformal factor not positive at " + format_point<N>(x));
    } else {
      const auto m = metric.matrix(x);
      if (!m.allFinite() || !m.isApprox(m.transpose(), 1e-12))
        throw NumericalError("metric '" + metric.name + "': matrix not symmetric at " +
                             format_point<N>(x));
      Eigen::LLT<Eigen::Matrix<double, N, N>> llt(m);
      if (llt.info() != Eigen::Success)
        throw NumericalError("metric '" + metric.name +
                             "': matrix not positive definite at " + format_point<N>(x));
    }
  };
  for (const auto& x : grid.bulk_nodes) check(x);
  for (const auto& x : grid.boundary_nodes) {
    check(x);
    Point<N> y = x;
    for (double& v : y) v *= reach;
    check(y);
  }

  if (metric.rotationally_symmetric) {
    SeededStream rng(0x5eed);
    for (int trial = 0; trial < 8; ++trial) {
      // random orthogonal matrix via Householder QR of a random matrix
      Eigen::Matrix<double, N, N> a;
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
      const Eigen::Matrix<double, N, N> q =
          Eigen::HouseholderQR<Eigen::Matrix<double, N, N>>(a).householderQ();
      Eigen::Matrix<double, N, 1> v;
      for (int i = 0; i < N; ++i) v(i) = rng.uniform(-1.0, 1.0);
      v *= rng.uniform(0.05, 1.0) / v.norm();
      const Eigen::Matrix<double, N, 1> w = q * v;
      Point<N> x, y;
      for (int i = 0; i < N; ++i) x[i] = v(i), y[i] = w(i);
      double diff = 0.0, scale = 0.0;
      if (metric.kind == MetricKind::ConformalToFlat) {
        diff = std::abs(metric.factor(x) - metric.factor(y));
        scale = std::abs(metric.factor(x));
      } else {
        const auto gx = metric.matrix(x);
        const auto gy = metric.matrix(y);
        diff = (q * gx * q.transpose() - gy).norm();
        scale = gx.norm();
      }
      if (diff > 1e-12 * scale)
        throw PreconditionError("metric '" + metric.name +
                                "' is flagged rotationally symmetric but differs at " +
                                format_point<N>(x) + " and its rotation");
    }
  }
}

}  // namespace hemi
