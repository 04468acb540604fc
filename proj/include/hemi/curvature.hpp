#pragma once

// Pointwise curvature of a metric on the ball from finite differences of the
// metric callback, and the residuals of the locally-conformally-flat tensor
// identities.
//
// Conventions (fixed so that the round metric has R = n(n-1) > 0):
//   R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
//   Riem_ijkl = g(R(d_i, d_j) d_l, d_k)      (round: g_ik g_jl - g_il g_jk)
//   Ric_ij   = g^kl Riem_ikjl,  R = g^ij Ric_ij,  E = Ric - (R/n) g.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "hemi/core.hpp"
#include "hemi/grid.hpp"
#include "hemi/metric.hpp"

namespace hemi {

/// Step sizes used by every pipeline, all proportional to the grid fd_step so
/// that halving fd_step refines every stage.
///
/// Metric derivatives use `metric`. Curvature quantities that need a third
/// metric derivative are first-differenced at `first_outer`. Quantities that
/// need a fourth derivative rebuild the curvature with the coarser
/// `second_inner` and second-difference it at `second_outer`.
struct StepPolicy {
  double metric = 1e-3;
  double first_outer = 1e-2;
  double second_inner = 4e-3;
  double second_outer = 4e-2;

  static StepPolicy from_fd_step(double h) {
    return {h, 10.0 * h, 4.0 * h, 40.0 * h};
  }
};

template <int N>
struct CurvaturePackage {
  Point<N> x{};
  Mat<N> g;
  Mat<N> ginv;
  Tensor<N, 3> dg;              // (c, a, b) = d_c g_ab
  double volume_density = 0.0;  // sqrt(det g)
  Tensor<N, 3> christoffel;     // (k, i, j) = Gamma^k_ij
  Tensor<N, 4> d_christoffel;   // (m, k, i, j) = d_m Gamma^k_ij
  Tensor<N, 4> riemann;         // Riem_ijkl
  Mat<N> ricci;
  double scalar = 0.0;
  Tensor<N, 4> weyl;
  Mat<N> traceless_ricci;  // E

  double weyl_norm2 = 0.0;  // |W|^2
  double e_norm2 = 0.0;     // |E|^2
  double tr_e3 = 0.0;       // E_i^j E_j^k E_k^i

  // Filled by attach_gradients.
  bool has_gradients = false;
  Vec<N> grad_scalar;         // d_i R
  Tensor<N, 3> nabla_ricci;   // (k, i, j) = nabla_k Ric_ij
  Tensor<N, 3> nabla_e;       // (k, i, j) = nabla_k E_ij
  double grad_scalar_norm2 = 0.0;  // |nabla R|^2
  double nabla_e_norm2 = 0.0;      // |nabla E|^2
};

namespace detail {

template <int N>
Tensor<N, 4> raise_all(const Tensor<N, 4>& t, const Mat<N>& ginv) {
  // T^{abcd} = g^ai g^bj g^ck g^dl T_ijkl, one index at a time
  Tensor<N, 4> a, b;
  const Tensor<N, 4>* src = &t;
  Tensor<N, 4>* dst = &a;
  for (int slot = 0; slot < 4; ++slot) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k)
          for (int l = 0; l < N; ++l) {
            int idx[4] = {i, j, k, l};
            double s = 0.0;
            for (int m = 0; m < N; ++m) {
              int jdx[4] = {i, j, k, l};
              jdx[slot] = m;
              s += ginv(idx[slot], m) * (*src)(jdx[0], jdx[1], jdx[2], jdx[3]);
            }
            (*dst)(i, j, k, l) = s;
          }
    src = dst;
    dst = (dst == &a) ? &b : &a;
  }
  return *src;
}

template <int N>
Mat<N> raise_both(const Mat<N>& t, const Mat<N>& ginv) {
  Mat<N> out;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      double s = 0.0;
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) s += ginv(a, i) * ginv(b, j) * t(i, j);
      out(a, b) = s;
    }
  return out;
}

/// E_i^j (one index raised).
template <int N>
Mat<N> mixed(const Mat<N>& t, const Mat<N>& ginv) {
  Mat<N> out;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double s = 0.0;
      for (int k = 0; k < N; ++k) s += t(i, k) * ginv(k, j);
      out(i, j) = s;
    }
  return out;
}

}  // namespace detail

/// Kulkarni-Nomizu style combination used by the Weyl decomposition:
///   (A wedge g)_ijkl = A_ik g_jl + A_jl g_ik - A_il g_jk - A_jk g_il.
template <int N>
Tensor<N, 4> kulkarni_nomizu(const Mat<N>& a, const Mat<N>& g) {
  Tensor<N, 4> t;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l)
          t(i, j, k, l) = a(i, k) * g(j, l) + a(j, l) * g(i, k) - a(i, l) * g(j, k) -
                          a(j, k) * g(i, l);
  return t;
}

/// All pointwise curvature quantities from a metric jet. Pure algebra; used
/// both by the finite-difference pipeline and with exact jets in tests.
template <int N>
CurvaturePackage<N> curvature_from_jet(const MetricJet<N>& jet, const Point<N>& x = {}) {
  using Matrix = Eigen::Matrix<double, N, N>;
  CurvaturePackage<N> p;
  p.x = x;
  p.g = jet.g;
  p.dg = jet.dg;

  Matrix gm;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) gm(a, b) = jet.g(a, b);
  Eigen::LLT<Matrix> llt(gm);
  if (llt.info() != Eigen::Success || !gm.allFinite())
    throw NumericalError("metric is not symmetric positive definite at " +
                         format_point<N>(x));
  const Matrix gi = llt.solve(Matrix::Identity());
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) p.ginv(a, b) = 0.5 * (gi(a, b) + gi(b, a));
  {
    const auto l = llt.matrixL();
    double d = 1.0;
    for (int a = 0; a < N; ++a) d *= l(a, a);
    p.volume_density = d;
  }
  const Mat<N>& ginv = p.ginv;

  // d_m g^kl = -g^ka d_m g_ab g^bl
  Tensor<N, 3> dginv;
  for (int m = 0; m < N; ++m)
    for (int k = 0; k < N; ++k)
      for (int l = 0; l < N; ++l) {
        double s = 0.0;
        for (int a = 0; a < N; ++a)
          for (int b = 0; b < N; ++b) s += ginv(k, a) * jet.dg(m, a, b) * ginv(b, l);
        dginv(m, k, l) = -s;
      }

  // Christoffel symbols of the first kind and their derivatives.
  Tensor<N, 3> first;       // (l, i, j) = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
  Tensor<N, 4> d_first;     // (m, l, i, j)
  for (int l = 0; l < N; ++l)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        first(l, i, j) = 0.5 * (jet.dg(i, j, l) + jet.dg(j, i, l) - jet.dg(l, i, j));
        for (int m = 0; m < N; ++m)
          d_first(m, l, i, j) =
              0.5 * (jet.ddg(m, i, j, l) + jet.ddg(m, j, i, l) - jet.ddg(m, l, i, j));
      }
  for (int k = 0; k < N; ++k)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        double s = 0.0;
        for (int l = 0; l < N; ++l) s += ginv(k, l) * first(l, i, j);
        p.christoffel(k, i, j) = s;
        for (int m = 0; m < N; ++m) {
          double t = 0.0;
          for (int l = 0; l < N; ++l)
            t += dginv(m, k, l) * first(l, i, j) + ginv(k, l) * d_first(m, l, i, j);
          p.d_christoffel(m, k, i, j) = t;
        }
      }
  const auto& G = p.christoffel;
  const auto& dG = p.d_christoffel;

  // R^l_kij = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik
  Tensor<N, 4> rup;  // (l, k, i, j)
  for (int l = 0; l < N; ++l)
    for (int k = 0; k < N; ++k)
      for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
          double s = dG(i, l, j, k) - dG(j, l, i, k);
          for (int m = 0; m < N; ++m) s += G(l, i, m) * G(m, j, k) - G(l, j, m) * G(m, i, k);
          rup(l, k, i, j) = s;
          rup(l, k, j, i) = -s;
        }
  // Riem_ijkl = g_km R^m_lij
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l) {
          double s = 0.0;
          for (int m = 0; m < N; ++m) s += jet.g(k, m) * rup(m, l, i, j);
          p.riemann(i, j, k, l) = s;
        }

  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double s = 0.0;
      for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l) s += ginv(k, l) * p.riemann(i, k, j, l);
      p.ricci(i, j) = s;
    }
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      p.ricci(i, j) = p.ricci(j, i) = 0.5 * (p.ricci(i, j) + p.ricci(j, i));
  double r = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) r += ginv(i, j) * p.ricci(i, j);
  p.scalar = r;

  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) p.traceless_ricci(i, j) = p.ricci(i, j) - r / N * jet.g(i, j);

  const auto ric_g = kulkarni_nomizu<N>(p.ricci, jet.g);
  const auto g_g = kulkarni_nomizu<N>(jet.g, jet.g);  // = 2 (g_ik g_jl - g_il g_jk)
  const double c1 = 1.0 / (N - 2);
  const double c2 = r / (2.0 * (N - 1) * (N - 2));
  for (std::size_t q = 0; q < Tensor<N, 4>::size; ++q)
    p.weyl.data()[q] = p.riemann.data()[q] - c1 * ric_g.data()[q] + c2 * g_g.data()[q];

  const auto w_up = detail::raise_all<N>(p.weyl, ginv);
  double w2 = 0.0;
  for (std::size_t q = 0; q < Tensor<N, 4>::size; ++q)
    w2 += w_up.data()[q] * p.weyl.data()[q];
  p.weyl_norm2 = w2;

  const auto e_mixed = detail::mixed<N>(p.traceless_ricci, ginv);  // E_i^j
  double e2 = 0.0, e3 = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      e2 += e_mixed(i, j) * e_mixed(j, i);
      for (int k = 0; k < N; ++k) e3 += e_mixed(i, j) * e_mixed(j, k) * e_mixed(k, i);
    }
  p.e_norm2 = e2;
  p.tr_e3 = e3;
  return p;
}

/// Curvature at a node from fourth-order differences of the metric callback
/// with step `step`.
template <int N>
CurvaturePackage<N> curvature_at(const MetricSpec<N>& metric, double step,
                                 const Point<N>& x) {
  const FiniteDifference<N> fd(step, metric.domain_radius);
  return curvature_from_jet<N>(metric_jet<N>(metric, fd, x), x);
}

/// curvature_package(metric, grid, node): every pointwise field, including
/// nabla R and nabla E (first-differenced curvature, step policy of the grid).
template <int N>
CurvaturePackage<N> curvature_package(const MetricSpec<N>& metric, const BallGrid<N>& grid,
                                      const Point<N>& x);

namespace detail {

/// Packs Ric_ij (all N^2 entries) followed by R.
template <int N>
std::array<double, N * N + 1> pack_ricci(const CurvaturePackage<N>& p) {
  std::array<double, N * N + 1> v{};
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) v[i * N + j] = p.ricci(i, j);
  v[N * N] = p.scalar;
  return v;
}

}  // namespace detail

/// Adds nabla R, nabla Ric and nabla E to a package by first-differencing the
/// curvature pipeline (step `policy.metric`) at step `policy.first_outer`.
template <int N>
void attach_gradients(CurvaturePackage<N>& p, const MetricSpec<N>& metric,
                      const StepPolicy& policy) {
  const FiniteDifference<N> outer(policy.first_outer,
                                  metric.domain_radius - 3.0 * policy.metric);
  auto field = [&](const Point<N>& y) {
    return detail::pack_ricci<N>(curvature_at<N>(metric, policy.metric, y));
  };
  constexpr std::size_t K = N * N + 1;
  const auto jet = first_jet<N, K>(outer, field, p.x);
  const auto& G = p.christoffel;
  for (int k = 0; k < N; ++k) {
    p.grad_scalar(k) = jet.d1[k][N * N];
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        double s = jet.d1[k][i * N + j];
        for (int m = 0; m < N; ++m) s -= G(m, k, i) * p.ricci(m, j) + G(m, k, j) * p.ricci(i, m);
        p.nabla_ricci(k, i, j) = s;
      }
  }
  for (int k = 0; k < N; ++k)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        p.nabla_e(k, i, j) = p.nabla_ricci(k, i, j) - p.grad_scalar(k) / N * p.g(i, j);

  const Mat<N>& gi = p.ginv;
  double gr2 = 0.0;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) gr2 += gi(a, b) * p.grad_scalar(a) * p.grad_scalar(b);
  p.grad_scalar_norm2 = gr2;

  // |nabla E|^2 = g^ka g^ib g^jc nabla_k E_ij nabla_a E_bc
  Tensor<N, 3> up;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b)
      for (int c = 0; c < N; ++c) {
        double s = 0.0;
        for (int k = 0; k < N; ++k)
          for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
              s += gi(a, k) * gi(b, i) * gi(c, j) * p.nabla_e(k, i, j);
        up(a, b, c) = s;
      }
  double ne2 = 0.0;
  for (std::size_t q = 0; q < Tensor<N, 3>::size; ++q) ne2 += up.data()[q] * p.nabla_e.data()[q];
  p.nabla_e_norm2 = ne2;
  p.has_gradients = true;
}

template <int N>
CurvaturePackage<N> curvature_package(const MetricSpec<N>& metric, const BallGrid<N>& grid,
                                      const Point<N>& x) {
  const StepPolicy policy = StepPolicy::from_fd_step(grid.fd_step);
  auto p = curvature_at<N>(metric, policy.metric, x);
  attach_gradients<N>(p, metric, policy);
  return p;
}

/// Second covariant derivatives of E and R at a node, from second differences
/// of the curvature pipeline.
template <int N>
struct SecondDerivatives {
  CurvaturePackage<N> base;     // built with policy.second_inner
  Tensor<N, 3> nabla_e;         // (l, i, j)
  Tensor<N, 4> hess_e;          // (k, l, i, j) = nabla_k nabla_l E_ij
  Mat<N> hess_scalar;           // nabla_i nabla_j R
  Vec<N> grad_scalar;
  Mat<N> trace_hess_e;          // g^kl nabla_k nabla_l E_ij
  double trace_hess_scalar = 0.0;  // g^ij nabla_i nabla_j R
};

template <int N>
SecondDerivatives<N> second_derivatives(const MetricSpec<N>& metric,
                                        const StepPolicy& policy, const Point<N>& x) {
  SecondDerivatives<N> out;
  out.base = curvature_at<N>(metric, policy.second_inner, x);
  const auto& p = out.base;
  constexpr std::size_t K = N * N + 1;
  auto field = [&](const Point<N>& y) {
    const auto q = curvature_at<N>(metric, policy.second_inner, y);
    std::array<double, K> v{};
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) v[i * N + j] = q.traceless_ricci(i, j);
    v[N * N] = q.scalar;
    return v;
  };
  const FiniteDifference<N> outer(policy.second_outer,
                                  metric.domain_radius - 3.0 * policy.second_inner);
  const auto jet = second_jet<N, K>(outer, field, x);
  const auto& G = p.christoffel;
  const auto& dG = p.d_christoffel;
  const auto& E = p.traceless_ricci;
  auto dE = [&](int k, int i, int j) { return jet.d1[k][i * N + j]; };
  auto ddE = [&](int k, int l, int i, int j) { return jet.d2[k][l][i * N + j]; };

  for (int l = 0; l < N; ++l)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        double s = dE(l, i, j);
        for (int m = 0; m < N; ++m) s -= G(m, l, i) * E(m, j) + G(m, l, j) * E(i, m);
        out.nabla_e(l, i, j) = s;
      }

  for (int k = 0; k < N; ++k)
    for (int l = 0; l < N; ++l)
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
          // d_k (nabla_l E_ij)
          double s = ddE(k, l, i, j);
          for (int m = 0; m < N; ++m)
            s -= dG(k, m, l, i) * E(m, j) + G(m, l, i) * dE(k, m, j) +
                 dG(k, m, l, j) * E(i, m) + G(m, l, j) * dE(k, i, m);
          // connection terms on the three lower indices of nabla E
          for (int m = 0; m < N; ++m)
            s -= G(m, k, l) * out.nabla_e(m, i, j) + G(m, k, i) * out.nabla_e(l, m, j) +
                 G(m, k, j) * out.nabla_e(l, i, m);
          out.hess_e(k, l, i, j) = s;
        }

  for (int i = 0; i < N; ++i) out.grad_scalar(i) = jet.d1[i][N * N];
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double s = jet.d2[i][j][N * N];
      for (int k = 0; k < N; ++k) s -= G(k, i, j) * out.grad_scalar(k);
      out.hess_scalar(i, j) = s;
    }

  const Mat<N>& gi = p.ginv;
  double lap_r = 0.0;
  for (int k = 0; k < N; ++k)
    for (int l = 0; l < N; ++l) lap_r += gi(k, l) * out.hess_scalar(k, l);
  out.trace_hess_scalar = lap_r;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double s = 0.0;
      for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l) s += gi(k, l) * out.hess_e(k, l, i, j);
      out.trace_hess_e(i, j) = s;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Tensor identity residuals
// ---------------------------------------------------------------------------

/// Max-norm of the algebraic symmetry defects of Riem, Ric, E and W.
template <int N>
double symmetry_residual(const CurvaturePackage<N>& p) {
  double m = 0.0;
  auto upd = [&](double v) { m = std::max(m, std::abs(v)); };
  const auto& R = p.riemann;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l) {
          upd(R(i, j, k, l) + R(j, i, k, l));
          upd(R(i, j, k, l) + R(i, j, l, k));
          upd(R(i, j, k, l) - R(k, l, i, j));
          upd(R(i, j, k, l) + R(j, k, i, l) + R(k, i, j, l));  // first Bianchi
        }
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) upd(p.ricci(i, j) - p.ricci(j, i));
  double tr = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) tr += p.ginv(i, j) * p.traceless_ricci(i, j);
  upd(tr);
  // W totally trace-free: g^ik W_ijkl = 0
  for (int j = 0; j < N; ++j)
    for (int l = 0; l < N; ++l) {
      double s = 0.0;
      for (int i = 0; i < N; ++i)
        for (int k = 0; k < N; ++k) s += p.ginv(i, k) * p.weyl(i, j, k, l);
      upd(s);
    }
  return m;
}

/// |W| at a node of a conformally flat metric (zero up to discretization).
template <int N>
double lcf_weyl_residual(const MetricSpec<N>& metric, const BallGrid<N>& grid,
                         const Point<N>& x) {
  if (!metric.conformally_flat())
    throw PreconditionError("lcf_weyl_residual: metric '" + metric.name +
                            "' is not given as conformal to flat");
  const auto p = curvature_at<N>(metric, grid.fd_step, x);
  return std::sqrt(std::max(0.0, p.weyl_norm2));
}

/// Max-norm of Riem - (1/4) Ric wedge g + (R/20)(g_ik g_jl - g_il g_jk) in
/// dimension 6.
template <int N>
double weyl_decomposition_residual_dim6(const MetricSpec<N>& metric,
                                        const BallGrid<N>& grid, const Point<N>& x) {
  if constexpr (N != 6) {
    throw PreconditionError("weyl_decomposition_residual_dim6 requires dimension 6");
  } else {
    if (!metric.conformally_flat())
      throw PreconditionError("weyl_decomposition_residual_dim6: metric '" + metric.name +
                              "' is not given as conformal to flat");
    const auto p = curvature_at<N>(metric, grid.fd_step, x);
    const auto rg = kulkarni_nomizu<N>(p.ricci, p.g);
    double m = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k)
          for (int l = 0; l < N; ++l) {
            const double rhs = 0.25 * rg(i, j, k, l) -
                               p.scalar / 20.0 * (p.g(i, k) * p.g(j, l) - p.g(i, l) * p.g(j, k));
            m = std::max(m, std::abs(p.riemann(i, j, k, l) - rhs));
          }
    return m;
  }
}

/// Residual of the locally-conformally-flat identity
///   Lap E_ij = -1/2 (n-2)/(n-1) nabla_i nabla_j R - 1/(2n) (n-2)/(n-1) (Lap R) g_ij
///              + 1/(n-2) |E|^2 g_ij - n/(n-2) E_ia E_j^a - 1/(n-1) R E_ij
/// with Lap = laplacian_sign * g^kl nabla_k nabla_l on both E and R.
template <int N>
double lcf_laplace_E_residual(const MetricSpec<N>& metric, const BallGrid<N>& grid,
                              const Point<N>& x, int laplacian_sign) {
  if (!metric.conformally_flat())
    throw PreconditionError("lcf_laplace_E_residual: metric '" + metric.name +
                            "' is not given as conformal to flat");
  if (laplacian_sign != 1 && laplacian_sign != -1)
    throw PreconditionError("lcf_laplace_E_residual: laplacian_sign must be +1 or -1");
  const StepPolicy policy = StepPolicy::from_fd_step(grid.fd_step);
  if (norm<N>(x) > 1.0 - 4.0 * grid.fd_step)
    throw PreconditionError("lcf_laplace_E_residual: node " + format_point<N>(x) +
                            " is closer than 4 fd_step to the boundary");
  const auto d = second_derivatives<N>(metric, policy, x);
  const auto& p = d.base;
  const double n = N;
  const double lap_r = laplacian_sign * d.trace_hess_scalar;
  const auto e_mixed = detail::mixed<N>(p.traceless_ricci, p.ginv);
  double m = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double ee = 0.0;  // E_ia E_j^a
      for (int a = 0; a < N; ++a) ee += p.traceless_ricci(i, a) * e_mixed(j, a);
      const double lhs = laplacian_sign * d.trace_hess_e(i, j);
      const double rhs = -0.5 * (n - 2) / (n - 1) * d.hess_scalar(i, j) -
                         0.5 / n * (n - 2) / (n - 1) * lap_r * p.g(i, j) +
                         p.e_norm2 / (n - 2) * p.g(i, j) - n / (n - 2) * ee -
                         p.scalar / (n - 1) * p.traceless_ricci(i, j);
      m = std::max(m, std::abs(lhs - rhs));
    }
  return m;
}

/// max_l | d_l R - 2 (div Ric)_l |, (div Ric)_l = g^ik nabla_k Ric_il.
template <int N>
double contracted_bianchi_residual(const MetricSpec<N>& metric, const BallGrid<N>& grid,
                                   const Point<N>& x) {
  const auto p = curvature_package<N>(metric, grid, x);
  double m = 0.0;
  for (int l = 0; l < N; ++l) {
    double div = 0.0;
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < N; ++k) div += p.ginv(i, k) * p.nabla_ricci(k, i, l);
    m = std::max(m, std::abs(p.grad_scalar(l) - 2.0 * div));
  }
  return m;
}

}  // namespace hemi
