#pragma once

// Conformal rescaling g -> f^2 g, the transformation laws of scalar and mean
// curvature through L = 6 Lap + R and B = d/dN + H_mean (n = 4), the
// conformal invariant F2, and the Yamabe quotient.
//
// Lap is the positive-spectrum Laplacian, Lap f = -g^ab nabla_a nabla_b f.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hemi/boundary.hpp"
#include "hemi/core.hpp"
#include "hemi/curvature.hpp"
#include "hemi/grid.hpp"
#include "hemi/metric.hpp"
#include "hemi/parallel.hpp"

namespace hemi {

/// Positive scalar f acting on metrics as g -> f^2 g (f = e^w for an
/// exponent w), in every dimension.
template <int N>
struct ConformalFactor {
  std::function<double(const Point<N>&)> f;
  bool rotationally_symmetric = false;
  std::string name;

  static ConformalFactor constant(double c) {
    return {[c](const Point<N>&) { return c; }, true, "const"};
  }
  static ConformalFactor from_exponent(std::function<double(const Point<N>&)> w,
                                       bool rotationally_symmetric, std::string name) {
    return {[w = std::move(w)](const Point<N>& x) { return std::exp(w(x)); },
            rotationally_symmetric, std::move(name)};
  }
};

namespace detail {

template <int N>
double checked_factor(const ConformalFactor<N>& factor, const Point<N>& x) {
  const double v = factor.f(x);
  if (!std::isfinite(v) || !(v > 0.0))
    throw NumericalError("conformal factor '" + factor.name + "' is not positive at " +
                         format_point<N>(x));
  return v;
}

}  // namespace detail

/// The metric f^2 g. Conformally flat metrics stay conformally flat with
/// multiplied factors; matrix metrics are rescaled pointwise.
template <int N>
MetricSpec<N> rescale(const MetricSpec<N>& metric, const ConformalFactor<N>& factor) {
  MetricSpec<N> out = metric;
  out.name = metric.name + "*" + factor.name;
  out.rotationally_symmetric = metric.rotationally_symmetric && factor.rotationally_symmetric;
  if (metric.kind == MetricKind::ConformalToFlat) {
    out.factor = [base = metric.factor, factor](const Point<N>& x) {
      return base(x) * detail::checked_factor<N>(factor, x);
    };
  } else {
    out.matrix = [base = metric.matrix, factor](const Point<N>& x) {
      const double f = detail::checked_factor<N>(factor, x);
      return Eigen::Matrix<double, N, N>(base(x) * (f * f));
    };
  }
  return out;
}

/// Positive-spectrum Laplacian of a scalar callback at x under `p`'s metric.
template <int N>
double laplacian(const CurvaturePackage<N>& p, const Jet2<N, 1>& f) {
  double s = 0.0;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      double hess = f.d2[a][b][0];
      for (int c = 0; c < N; ++c) hess -= p.christoffel(c, a, b) * f.d1[c][0];
      s += p.ginv(a, b) * hess;
    }
  return -s;
}

/// |R_{f^2 g} - f^{-3} (6 Lap_g f + R_g f)| at an interior node (n = 4).
template <int N>
double scalar_transform_residual(const MetricSpec<N>& metric, const ConformalFactor<N>& factor,
                                 const BallGrid<N>& grid, const Point<N>& x) {
  if constexpr (N != 4) {
    throw PreconditionError("scalar_transform_residual is the n = 4 law");
  } else {
    const double h = grid.fd_step;
    const auto p = curvature_at<N>(metric, h, x);
    const auto q = curvature_at<N>(rescale<N>(metric, factor), h, x);
    const FiniteDifference<N> fd(h, metric.domain_radius);
    const auto fj = second_jet<N, 1>(
        fd, [&](const Point<N>& y) { return std::array<double, 1>{detail::checked_factor<N>(factor, y)}; },
        x);
    const double f = fj.value[0];
    const double lf = 6.0 * laplacian<N>(p, fj) + p.scalar * f;
    return std::abs(q.scalar - lf / (f * f * f));
  }
}

/// |H_mean(f^2 g) - f^{-2} (df/dN + H_mean(g) f)| at a boundary node (n = 4).
template <int N>
double mean_curvature_transform_residual(const MetricSpec<N>& metric,
                                         const ConformalFactor<N>& factor,
                                         const BallGrid<N>& grid, const Point<N>& x) {
  if constexpr (N != 4) {
    throw PreconditionError("mean_curvature_transform_residual is the n = 4 law");
  } else {
    const auto b = boundary_package<N>(metric, grid, x);
    const auto b_new = boundary_package<N>(rescale<N>(metric, factor), grid, x);
    const FiniteDifference<N> fd(grid.fd_step, metric.domain_radius);
    const auto fj = first_jet<N, 1>(
        fd, [&](const Point<N>& y) { return std::array<double, 1>{detail::checked_factor<N>(factor, y)}; },
        x);
    const double f = fj.value[0];
    double df_dn = 0.0;
    for (int a = 0; a < N; ++a) df_dn += b.normal(a) * fj.d1[a][0];
    return std::abs(b_new.h_mean - (df_dn + b.h_mean * f) / (f * f));
  }
}

/// Bulk values field(package) * sqrt(det g) at every bulk node.
template <int N, class Field>
std::vector<double> bulk_values(const MetricSpec<N>& metric, const BallGrid<N>& grid,
                                Field&& field) {
  return parallel_map(grid.bulk_nodes.size(), [&](std::size_t k) {
    const auto p = curvature_at<N>(metric, grid.fd_step, grid.bulk_nodes[k]);
    return field(p) * p.volume_density;
  });
}

/// Boundary values field(boundary package) * area density at every boundary node.
template <int N, class Field>
std::vector<double> boundary_values(const MetricSpec<N>& metric, const BallGrid<N>& grid,
                                    Field&& field) {
  return parallel_map(grid.boundary_nodes.size(), [&](std::size_t k) {
    const auto b = boundary_package<N>(metric, grid, grid.boundary_nodes[k]);
    return field(b) * b.area_density;
  });
}

template <int N>
double volume(const MetricSpec<N>& metric, const BallGrid<N>& grid) {
  const auto v = parallel_map(grid.bulk_nodes.size(), [&](std::size_t k) {
    return std::sqrt(metric.at(grid.bulk_nodes[k]).determinant());
  });
  return integrate_bulk<N>(grid, v);
}

/// Bulk and boundary parts of F2 = int (R^2/96 - |E|^2/8) dv + 1/2 int B ds.
struct F2Parts {
  double bulk = 0.0;
  double boundary = 0.0;  // 1/2 int B ds
  double total() const { return bulk + boundary; }
};

template <int N>
F2Parts f2_parts(const MetricSpec<N>& metric, const BallGrid<N>& grid) {
  if constexpr (N != 4) {
    throw PreconditionError("F2 is defined in dimension 4");
  } else {
    F2Parts out;
    const auto bulk = bulk_values<N>(metric, grid, [](const CurvaturePackage<N>& p) {
      return p.scalar * p.scalar / 96.0 - p.e_norm2 / 8.0;
    });
    const auto bdry = boundary_values<N>(
        metric, grid, [](const BoundaryPackage<N>& b) { return b.gauss_bonnet_integrand; });
    out.bulk = integrate_bulk<N>(grid, bulk);
    out.boundary = 0.5 * integrate_boundary<N>(grid, bdry);
    return out;
  }
}

template <int N>
double f2_invariant(const MetricSpec<N>& metric, const BallGrid<N>& grid) {
  return f2_parts<N>(metric, grid).total();
}

/// Largest |H_mean| over the boundary nodes.
template <int N>
double max_boundary_mean_curvature(const MetricSpec<N>& metric, const BallGrid<N>& grid) {
  const auto h = parallel_map(grid.boundary_nodes.size(), [&](std::size_t k) {
    return std::abs(boundary_package<N>(metric, grid, grid.boundary_nodes[k]).h_mean);
  });
  double m = 0.0;
  for (double v : h) m = std::max(m, v);
  return m;
}

inline constexpr double minimal_boundary_tolerance = 1e-4;

/// int R dv / Vol^{(n-2)/n} for a representative with minimal boundary.
template <int N>
double yamabe_quotient(const MetricSpec<N>& metric, const BallGrid<N>& grid) {
  const double h = max_boundary_mean_curvature<N>(metric, grid);
  if (h > minimal_boundary_tolerance)
    throw PreconditionError(
        "yamabe_quotient: boundary mean curvature " + std::to_string(h) + " of '" +
        metric.name +
        "' exceeds 1e-4; rescale to a representative with minimal boundary first");
  const auto r = bulk_values<N>(metric, grid, [](const CurvaturePackage<N>& p) { return p.scalar; });
  const double total = integrate_bulk<N>(grid, r);
  const double vol = volume<N>(metric, grid);
  return total / std::pow(vol, (N - 2.0) / N);
}

}  // namespace hemi
