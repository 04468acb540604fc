#pragma once

// First eigenvalue of L = 6 Lap + R with the Robin condition
// df/dN + H_mean f = 0 on a rotationally symmetric conformally flat 4-ball
// g = phi(r)^2 delta. With h = phi f the problem becomes the radial pencil
//   6 (int h'^2 r^3 dr + h(1)^2) = lambda int phi^2 h^2 r^3 dr
// (the common factor |S^3| cancels), discretized with quadratic finite
// elements on a uniform mesh of [0, 1]. h'(0) = 0 and h'(1) + h(1) = 0 are
// natural conditions of the form.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hemi/conformal.hpp"
#include "hemi/core.hpp"
#include "hemi/grid.hpp"
#include "hemi/metric.hpp"

namespace hemi {

struct RadialOperator {
  int mesh_size = 0;                 // number of elements
  std::vector<double> nodes;         // 2 m + 1 nodes (vertices and midpoints)
  std::vector<double> factor;        // phi at the nodes
  std::vector<double> quad_factor;   // phi^2 r^3 w at the element quadrature points
  Eigen::SparseMatrix<double> stiffness;
  Eigen::SparseMatrix<double> mass;
  double boundary_coefficient = 1.0;  // flat-ball H_mean
  int max_iterations = 10000;
  std::string name;
};

struct SpectralResult {
  double lambda1 = 0.0;
  std::vector<double> r;
  std::vector<double> h;
  std::vector<double> f;  // h / phi, max f = 1
  double rayleigh_quotient = 0.0;
  double robin_residual = 0.0;      // |h'(1) + h(1)| / max |h|
  double positivity_margin = 0.0;   // min f
  double f_spread = 0.0;            // max f - min f
  double eigen_residual = 0.0;      // |K x - lambda M x| / |K x|
  int iterations = 0;
};

namespace detail {

/// Quadratic Lagrange basis on [0, 1] with nodes 0, 1/2, 1, and derivatives.
inline void p2_basis(double t, double v[3], double d[3]) {
  v[0] = 2.0 * (t - 0.5) * (t - 1.0);
  v[1] = 4.0 * t * (1.0 - t);
  v[2] = 2.0 * t * (t - 0.5);
  d[0] = 4.0 * t - 3.0;
  d[1] = 4.0 - 8.0 * t;
  d[2] = 4.0 * t - 1.0;
}

}  // namespace detail

/// Radial operator from a callback phi(r).
template <class Phi>
RadialOperator assemble_radial(Phi&& phi, int mesh_size, std::string name = "radial") {
  if (mesh_size < 16) throw PreconditionError("spectral mesh must have at least 16 elements");
  RadialOperator op;
  op.mesh_size = mesh_size;
  op.name = std::move(name);
  const int dofs = 2 * mesh_size + 1;
  const double len = 1.0 / mesh_size;
  op.nodes.resize(dofs);
  op.factor.resize(dofs);
  for (int k = 0; k < dofs; ++k) {
    op.nodes[k] = 0.5 * len * k;
    op.factor[k] = phi(op.nodes[k]);
    if (!std::isfinite(op.factor[k]) || !(op.factor[k] > 0.0))
      throw NumericalError("radial factor of '" + op.name + "' is not positive at r = " +
                           std::to_string(op.nodes[k]));
  }
  const QuadratureRule q = gauss_legendre(5, 0.0, 1.0);
  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(9 * mesh_size + 1);
  mt.reserve(9 * mesh_size);
  for (int e = 0; e < mesh_size; ++e) {
    double ke[3][3] = {}, me[3][3] = {};
    const double r0 = e * len;
    for (std::size_t s = 0; s < q.nodes.size(); ++s) {
      const double t = q.nodes[s];
      const double r = r0 + t * len;
      const double w = q.weights[s] * len * r * r * r;
      const double p = phi(r);
      op.quad_factor.push_back(w * p * p);
      double v[3], d[3];
      detail::p2_basis(t, v, d);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          ke[a][b] += 6.0 * w * d[a] * d[b] / (len * len);
          me[a][b] += w * p * p * v[a] * v[b];
        }
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        kt.emplace_back(2 * e + a, 2 * e + b, ke[a][b]);
        mt.emplace_back(2 * e + a, 2 * e + b, me[a][b]);
      }
  }
  kt.emplace_back(dofs - 1, dofs - 1, 6.0 * op.boundary_coefficient);
  op.stiffness.resize(dofs, dofs);
  op.mass.resize(dofs, dofs);
  op.stiffness.setFromTriplets(kt.begin(), kt.end());
  op.mass.setFromTriplets(mt.begin(), mt.end());
  return op;
}

/// Stiffness and mass forms of a coefficient vector, summed element by
/// element from non-negative terms (the assembled matrices cancel badly on
/// fine meshes).
inline std::pair<double, double> radial_forms(const RadialOperator& op, const Eigen::VectorXd& x) {
  static const QuadratureRule q = gauss_legendre(5, 0.0, 1.0);
  const double len = 1.0 / op.mesh_size;
  std::vector<double> k_terms, m_terms;
  k_terms.reserve(op.quad_factor.size() + 1);
  m_terms.reserve(op.quad_factor.size());
  std::size_t at = 0;
  for (int e = 0; e < op.mesh_size; ++e) {
    for (std::size_t s = 0; s < q.nodes.size(); ++s, ++at) {
      const double t = q.nodes[s];
      const double r = (e + t) * len;
      double v[3], d[3];
      detail::p2_basis(t, v, d);
      double hv = 0.0, hd = 0.0;
      for (int a = 0; a < 3; ++a) {
        hv += v[a] * x(2 * e + a);
        hd += d[a] * x(2 * e + a);
      }
      hd /= len;
      k_terms.push_back(6.0 * q.weights[s] * len * r * r * r * hd * hd);
      m_terms.push_back(op.quad_factor[at] * hv * hv);
    }
  }
  const double hb = x(x.size() - 1);
  k_terms.push_back(6.0 * op.boundary_coefficient * hb * hb);
  return {pairwise_sum(std::span<const double>(k_terms)),
          pairwise_sum(std::span<const double>(m_terms))};
}

/// Radial operator of a rotationally symmetric conformally flat 4-metric.
template <int N>
RadialOperator assemble(const MetricSpec<N>& metric, int mesh_size) {
  if constexpr (N != 4) {
    throw PreconditionError("the Yamabe eigenproblem is implemented in dimension 4");
  } else {
    if (!metric.conformally_flat() || !metric.rotationally_symmetric)
      throw PreconditionError("assemble: metric '" + metric.name +
                              "' must be conformally flat and rotationally symmetric");
    auto phi = [&](double r) {
      Point<N> x{};
      x[0] = r;
      return metric.factor(x);
    };
    return assemble_radial(phi, mesh_size, metric.name);
  }
}

/// Smallest eigenvalue of the pencil by inverse power iteration (shift 0)
/// from the all-ones vector, until the quotient changes by at most 1e-12
/// (relative) and the max-normalized iterate by at most 1e-11.
inline SpectralResult lambda1(const RadialOperator& op) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(op.stiffness);
  if (solver.info() != Eigen::Success)
    throw NumericalError("stiffness matrix of '" + op.name + "' is not positive definite");
  const Eigen::Index n = op.stiffness.rows();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  auto quotient = [&](const Eigen::VectorXd& v) {
    const auto [k, m] = radial_forms(op, v);
    return k / m;
  };
  double lambda = quotient(x);
  SpectralResult out;
  bool converged = false;
  for (int it = 1; it <= op.max_iterations; ++it) {
    Eigen::VectorXd y = solver.solve(op.mass * x);
    y /= y.cwiseAbs().maxCoeff();
    if (y.sum() < 0.0) y = -y;
    const double step = (y - x).cwiseAbs().maxCoeff();
    x = y;
    const double next = quotient(x);
    out.iterations = it;
    const bool done = std::abs(next - lambda) <= 1e-12 * std::max(1.0, std::abs(next)) &&
                      step <= 1e-11;
    lambda = next;
    if (done) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("inverse iteration for '" + op.name + "' did not converge in " +
                           std::to_string(op.max_iterations) + " iterations");

  if (x.sum() < 0.0) x = -x;
  const Eigen::VectorXd kx = op.stiffness * x;
  out.lambda1 = lambda;
  out.rayleigh_quotient = quotient(x);
  out.eigen_residual = (kx - lambda * (op.mass * x)).norm() / kx.norm();

  out.r = op.nodes;
  out.h.resize(n);
  out.f.resize(n);
  double fmax = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) fmax = std::max(fmax, x(k) / op.factor[k]);
  double hmax = 0.0, fmin = INFINITY;
  for (Eigen::Index k = 0; k < n; ++k) {
    out.h[k] = x(k) / fmax;
    out.f[k] = out.h[k] / op.factor[k];
    hmax = std::max(hmax, std::abs(out.h[k]));
    fmin = std::min(fmin, out.f[k]);
  }
  out.positivity_margin = fmin;
  out.f_spread = 1.0 - fmin;
  const double len = 1.0 / op.mesh_size;
  const double dh1 = (out.h[n - 3] - 4.0 * out.h[n - 2] + 3.0 * out.h[n - 1]) / len;
  out.robin_residual = std::abs(dh1 + op.boundary_coefficient * out.h[n - 1]) / hmax;
  return out;
}

/// lambda1^2 - 96 F2 / Vol; non-negative, zero exactly in the Einstein case
/// with totally geodesic boundary.
template <int N>
double inequality_gap(const MetricSpec<N>& metric, const BallGrid<N>& grid, int mesh_size) {
  const double lam = lambda1(assemble<N>(metric, mesh_size)).lambda1;
  const double f2 = f2_invariant<N>(metric, grid);
  return lam * lam - 96.0 * f2 / volume<N>(metric, grid);
}

}  // namespace hemi
