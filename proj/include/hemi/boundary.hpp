#pragma once

// Extrinsic geometry of the boundary sphere |x| = 1.
//
// N is the outward g-unit normal. The second fundamental form is
// S(X, Y) = g(nabla_X N, Y), so the flat unit ball has S = +g. Two mean
// curvatures are kept: H_trace = tr S (used in the Gauss-Bonnet boundary
// integrand) and H_mean = tr S / (n - 1) (used in the Robin operator).

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "hemi/core.hpp"
#include "hemi/curvature.hpp"
#include "hemi/grid.hpp"
#include "hemi/metric.hpp"

namespace hemi {

template <int N>
struct BoundaryPackage {
  static constexpr int T = N - 1;  // tangent dimension

  Point<N> x{};
  Vec<N> normal;        // N^a
  Vec<N> normal_lower;  // N_a
  std::array<Vec<N>, N - 1> frame;  // g-orthonormal tangent frame e_alpha
  Eigen::Matrix<double, N - 1, N - 1> second_fundamental_form;  // S_ab in the frame
  Mat<N> shape_tensor;  // T_cb = nabla_c N_b (level-sphere normal field)

  double h_trace = 0.0;
  double h_mean = 0.0;
  double umbilicity_residual = 0.0;
  double area_density = 0.0;  // relative to the round unit-sphere measure
  double s_norm2 = 0.0;       // |S|^2
  double tr_s3 = 0.0;         // S_ab S_bc S_ca
  double ricci_nn = 0.0;      // Ric(N, N)
  double tangential_riemann_contraction = 0.0;  // sum Riem(e_c, e_a, e_c, e_b) S^ab
  double gauss_bonnet_integrand = 0.0;          // B, with H = H_trace
  double normal_unit_defect = 0.0;              // |g(N, N) - 1|
  double s_asymmetry = 0.0;

  CurvaturePackage<N> curvature;
};

namespace detail {

/// Index of the coordinate axis most aligned with x (lowest index on ties).
template <int N>
int dominant_axis(const Point<N>& x) {
  int best = 0;
  for (int i = 1; i < N; ++i)
    if (std::abs(x[i]) > std::abs(x[best])) best = i;
  return best;
}

template <int N>
double inner(const Mat<N>& g, const Vec<N>& u, const Vec<N>& v) {
  double s = 0.0;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) s += g(a, b) * u(a) * v(b);
  return s;
}

/// Orthonormal basis of the tangent space of the level sphere through x with
/// respect to the bilinear form `g`: Gram-Schmidt of the coordinate axes in
/// fixed order, skipping the dominant axis, against the unit normal.
template <int N>
std::array<Vec<N>, N - 1> tangent_frame(const Point<N>& x, const Mat<N>& g, const Vec<N>& unit_normal) {
  std::array<Vec<N>, N - 1> frame;
  const int skip = dominant_axis<N>(x);
  int filled = 0;
  for (int axis = 0; axis < N; ++axis) {
    if (axis == skip) continue;
    Vec<N> u;
    u(axis) = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      const double cn = inner<N>(g, u, unit_normal);
      for (int a = 0; a < N; ++a) u(a) -= cn * unit_normal(a);
      for (int k = 0; k < filled; ++k) {
        const double c = inner<N>(g, u, frame[k]);
        for (int a = 0; a < N; ++a) u(a) -= c * frame[k](a);
      }
    }
    const double len = std::sqrt(inner<N>(g, u, u));
    for (int a = 0; a < N; ++a) u(a) /= len;
    frame[filled++] = u;
  }
  return frame;
}

/// Unit normal of the level sphere through x and T_cb = nabla_c N_b.
template <int N>
void level_sphere_normal(const CurvaturePackage<N>& p, Vec<N>& n_up, Vec<N>& n_low, Mat<N>& t) {
  const Point<N>& x = p.x;
  const double r = norm<N>(x);
  if (!(r > 0.0)) throw PreconditionError("level sphere normal undefined at the origin");
  Vec<N> dr;
  Mat<N> ddr;
  for (int a = 0; a < N; ++a) {
    dr(a) = x[a] / r;
    for (int b = 0; b < N; ++b) ddr(a, b) = ((a == b ? 1.0 : 0.0) - x[a] * x[b] / (r * r)) / r;
  }
  const Mat<N>& gi = p.ginv;
  Tensor<N, 3> dginv;  // d_c g^ab
  for (int c = 0; c < N; ++c)
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) {
        double s = 0.0;
        for (int k = 0; k < N; ++k)
          for (int l = 0; l < N; ++l) s += gi(a, k) * p.dg(c, k, l) * gi(l, b);
        dginv(c, a, b) = -s;
      }
  double q = 0.0;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) q += gi(a, b) * dr(a) * dr(b);
  const double nu = std::sqrt(q);
  Vec<N> dq;
  for (int c = 0; c < N; ++c) {
    double s = 0.0;
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b)
        s += dginv(c, a, b) * dr(a) * dr(b) + 2.0 * gi(a, b) * ddr(c, a) * dr(b);
    dq(c) = s;
  }
  for (int b = 0; b < N; ++b) n_low(b) = dr(b) / nu;
  for (int a = 0; a < N; ++a) {
    double s = 0.0;
    for (int b = 0; b < N; ++b) s += gi(a, b) * n_low(b);
    n_up(a) = s;
  }
  for (int c = 0; c < N; ++c)
    for (int b = 0; b < N; ++b) {
      double d = ddr(c, b) / nu - dr(b) * dq(c) / (2.0 * nu * nu * nu);
      for (int m = 0; m < N; ++m) d -= p.christoffel(m, c, b) * n_low(m);
      t(c, b) = d;
    }
}

}  // namespace detail

/// Extrinsic package at a point of the boundary sphere (or of any level
/// sphere |x| = r > 0) from an already computed curvature package.
template <int N>
BoundaryPackage<N> boundary_from_curvature(const CurvaturePackage<N>& p) {
  BoundaryPackage<N> b;
  b.x = p.x;
  b.curvature = p;
  detail::level_sphere_normal<N>(p, b.normal, b.normal_lower, b.shape_tensor);
  b.normal_unit_defect = std::abs(detail::inner<N>(p.g, b.normal, b.normal) - 1.0);
  b.frame = detail::tangent_frame<N>(p.x, p.g, b.normal);

  constexpr int T = N - 1;
  Eigen::Matrix<double, T, T> s;
  double asym = 0.0;
  for (int a = 0; a < T; ++a)
    for (int c = 0; c < T; ++c) {
      double v = 0.0;
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) v += b.frame[a](i) * b.frame[c](j) * b.shape_tensor(i, j);
      s(a, c) = v;
    }
  for (int a = 0; a < T; ++a)
    for (int c = a + 1; c < T; ++c) {
      asym = std::max(asym, std::abs(s(a, c) - s(c, a)));
      s(a, c) = s(c, a) = 0.5 * (s(a, c) + s(c, a));
    }
  b.second_fundamental_form = s;
  b.s_asymmetry = asym;
  b.h_trace = s.trace();
  b.h_mean = b.h_trace / T;
  b.umbilicity_residual =
      (s - b.h_mean * Eigen::Matrix<double, T, T>::Identity()).cwiseAbs().maxCoeff();
  b.s_norm2 = s.squaredNorm();
  b.tr_s3 = (s * s * s).trace();

  // induced area element against a Euclidean-orthonormal tangent basis
  {
    const Point<N>& x = p.x;
    const double r = norm<N>(x);
    Mat<N> flat;
    for (int a = 0; a < N; ++a) flat(a, a) = 1.0;
    Vec<N> radial;
    for (int a = 0; a < N; ++a) radial(a) = x[a] / r;
    const auto e = detail::tangent_frame<N>(x, flat, radial);
    Eigen::Matrix<double, T, T> h;
    for (int a = 0; a < T; ++a)
      for (int c = 0; c < T; ++c) h(a, c) = detail::inner<N>(p.g, e[a], e[c]);
    b.area_density = std::sqrt(h.determinant());
  }

  double rnn = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) rnn += p.ricci(i, j) * b.normal(i) * b.normal(j);
  b.ricci_nn = rnn;

  // Riem(e_c, e_a, e_c, e_b) S^ab
  auto riem_frame = [&](const Vec<N>& u, const Vec<N>& v, const Vec<N>& w, const Vec<N>& z) {
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
      if (u(i) == 0.0) continue;
      for (int j = 0; j < N; ++j) {
        if (v(j) == 0.0) continue;
        for (int k = 0; k < N; ++k) {
          if (w(k) == 0.0) continue;
          for (int l = 0; l < N; ++l)
            acc += u(i) * v(j) * w(k) * z(l) * p.riemann(i, j, k, l);
        }
      }
    }
    return acc;
  };
  double contraction = 0.0;
  for (int c = 0; c < T; ++c)
    for (int a = 0; a < T; ++a)
      for (int d = 0; d < T; ++d)
        contraction += riem_frame(b.frame[c], b.frame[a], b.frame[c], b.frame[d]) * s(a, d);
  b.tangential_riemann_contraction = contraction;

  const double h = b.h_trace;
  b.gauss_bonnet_integrand = 0.5 * p.scalar * h - rnn * h - contraction + h * h * h / 3.0 -
                             h * b.s_norm2 + 2.0 / 3.0 * b.tr_s3;
  return b;
}

/// boundary_package(metric, grid, node) for a node on |x| = 1.
template <int N>
BoundaryPackage<N> boundary_package(const MetricSpec<N>& metric, const BallGrid<N>& grid,
                                    const Point<N>& x) {
  if (std::abs(norm<N>(x) - 1.0) > 1e-12)
    throw PreconditionError("boundary_package: node " + format_point<N>(x) +
                            " is not on the unit sphere");
  return boundary_from_curvature<N>(curvature_at<N>(metric, grid.fd_step, x));
}

/// Max over tangential frame indices (i, j, k) of
///   | Riem(e_i, e_j, e_k, N) - ((nabla_i S)_jk - (nabla_j S)_ik) |,
/// with nabla the induced connection. `sign` = +1 is the pairing for which
/// the Codazzi equation holds under this library's Riemann convention; -1
/// evaluates the opposite pairing.
template <int N>
double codazzi_residual(const MetricSpec<N>& metric, const BallGrid<N>& grid,
                        const Point<N>& x, int sign = 1) {
  if (sign != 1 && sign != -1) throw PreconditionError("codazzi_residual: sign must be +1 or -1");
  const StepPolicy policy = StepPolicy::from_fd_step(grid.fd_step);
  const auto base = boundary_package<N>(metric, grid, x);
  const auto& p = base.curvature;

  // d_a T_cb by first-differencing the level-sphere shape tensor
  auto field = [&](const Point<N>& y) {
    const auto q = curvature_at<N>(metric, policy.metric, y);
    Vec<N> nu, nl;
    Mat<N> t;
    detail::level_sphere_normal<N>(q, nu, nl, t);
    std::array<double, N * N> v{};
    for (int c = 0; c < N; ++c)
      for (int b = 0; b < N; ++b) v[c * N + b] = t(c, b);
    return v;
  };
  const FiniteDifference<N> outer(policy.first_outer, metric.domain_radius - 3.0 * policy.metric);
  const auto jet = first_jet<N, N * N>(outer, field, x);
  const auto& G = p.christoffel;
  const auto& T = base.shape_tensor;
  Tensor<N, 3> nabla_t;  // (a, c, b) = nabla_a T_cb
  for (int a = 0; a < N; ++a)
    for (int c = 0; c < N; ++c)
      for (int b = 0; b < N; ++b) {
        double s = jet.d1[a][c * N + b];
        for (int m = 0; m < N; ++m) s -= G(m, a, c) * T(m, b) + G(m, a, b) * T(c, m);
        nabla_t(a, c, b) = s;
      }
  auto contract3 = [&](const Tensor<N, 3>& t3, const Vec<N>& u, const Vec<N>& v, const Vec<N>& w) {
    double acc = 0.0;
    for (int a = 0; a < N; ++a)
      for (int c = 0; c < N; ++c)
        for (int b = 0; b < N; ++b) acc += u(a) * v(c) * w(b) * t3(a, c, b);
    return acc;
  };
  auto t2 = [&](const Vec<N>& u, const Vec<N>& v) {
    double acc = 0.0;
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) acc += u(a) * v(b) * T(a, b);
    return acc;
  };
  // (nabla^boundary_X S)(Y, Z) = (nabla_X T)(Y, Z) - T(X, Y) T(N, Z)
  auto nabla_s = [&](const Vec<N>& xv, const Vec<N>& yv, const Vec<N>& zv) {
    return contract3(nabla_t, xv, yv, zv) - t2(xv, yv) * t2(base.normal, zv);
  };
  auto riem = [&](const Vec<N>& u, const Vec<N>& v, const Vec<N>& w, const Vec<N>& z) {
    double acc = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k)
          for (int l = 0; l < N; ++l) acc += u(i) * v(j) * w(k) * z(l) * p.riemann(i, j, k, l);
    return acc;
  };
  double m = 0.0;
  const auto& e = base.frame;
  for (int i = 0; i < N - 1; ++i)
    for (int j = 0; j < N - 1; ++j)
      for (int k = 0; k < N - 1; ++k) {
        const double lhs = riem(e[i], e[j], e[k], base.normal);
        const double rhs = sign * (nabla_s(e[i], e[j], e[k]) - nabla_s(e[j], e[i], e[k]));
        m = std::max(m, std::abs(lhs - rhs));
      }
  return m;
}

/// <nabla_N Ric, Ric> = N^k nabla_k Ric_ij Ric^ij at a boundary node.
template <int N>
double normal_ricci_product(const MetricSpec<N>& metric, const BallGrid<N>& grid,
                            const Point<N>& x) {
  const StepPolicy policy = StepPolicy::from_fd_step(grid.fd_step);
  auto b = boundary_package<N>(metric, grid, x);
  attach_gradients<N>(b.curvature, metric, policy);
  const auto& p = b.curvature;
  const Mat<N> ric_up = detail::raise_both<N>(p.ricci, p.ginv);
  double s = 0.0;
  for (int k = 0; k < N; ++k)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) s += b.normal(k) * p.nabla_ricci(k, i, j) * ric_up(i, j);
  return s;
}

/// The two boundary terms of the integrated Tr(E^3) identity:
/// (1/2) d|E|^2/dN and E(N, grad R). `b` must carry gradients.
template <int N>
std::pair<double, double> e_flux_terms(const BoundaryPackage<N>& b) {
  const auto& p = b.curvature;
  if (!p.has_gradients) throw PreconditionError("e_flux needs a package with gradients");
  const Mat<N> e_up = detail::raise_both<N>(p.traceless_ricci, p.ginv);
  double half_dn = 0.0;
  for (int k = 0; k < N; ++k)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) half_dn += b.normal(k) * e_up(i, j) * p.nabla_e(k, i, j);
  double en = 0.0;
  for (int a = 0; a < N; ++a)
    for (int c = 0; c < N; ++c) {
      double grad_up = 0.0;
      for (int d = 0; d < N; ++d) grad_up += p.ginv(c, d) * p.grad_scalar(d);
      en += p.traceless_ricci(a, c) * b.normal(a) * grad_up;
    }
  return {half_dn, en};
}

/// Boundary flux (1/2) d|E|^2/dN - E(N, grad R).
template <int N>
double e_flux(const BoundaryPackage<N>& b) {
  const auto [half_dn, en] = e_flux_terms<N>(b);
  return half_dn - en;
}

}  // namespace hemi
