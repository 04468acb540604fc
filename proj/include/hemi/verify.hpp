#pragma once

// Named checks of the integral identities, the Yamabe chain and the rigidity
// probe, each with a target, a tolerance and a convergence table.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hemi/boundary.hpp"
#include "hemi/conformal.hpp"
#include "hemi/core.hpp"
#include "hemi/curvature.hpp"
#include "hemi/grid.hpp"
#include "hemi/metric.hpp"
#include "hemi/models.hpp"
#include "hemi/parallel.hpp"
#include "hemi/spectral.hpp"

namespace hemi {

/// Sign of the tensor Laplacian for which the LCF identity for Lap E holds.
inline constexpr int resolved_laplacian_sign = -1;

enum class Relation { eq, le, ge, gt };

inline const char* relation_name(Relation r) {
  switch (r) {
    case Relation::eq: return "eq";
    case Relation::le: return "le";
    case Relation::ge: return "ge";
    case Relation::gt: return "gt";
  }
  return "?";
}

struct ConvergenceRow {
  double fd_step = 0.0;  // 0 for mesh refinements
  int mesh = 0;          // 0 for fd_step refinements
  double value = 0.0;
  double error = 0.0;    // |value - target|
};

/// Default resolution: radial 64, angular 12 per axis, fd_step 1e-3, mesh 2048.
struct Resolution {
  int radial = 64;
  int angular = 12;
  double fd_step = 1e-3;
  int mesh = 2048;
  int refine = 1;  // levels in the convergence table; 1 = none
};

struct CheckReport {
  std::string id;
  std::string model;
  int dim = 4;
  double computed = std::numeric_limits<double>::quiet_NaN();
  double target = 0.0;
  double abs_tol = 0.0;
  double rel_tol = 0.0;
  Relation relation = Relation::eq;
  bool pass = false;
  std::optional<double> min_order;
  std::optional<double> order_estimate;
  bool order_saturated = false;
  std::vector<ConvergenceRow> convergence;
  Resolution resolution;
  bool radial_only = false;
  double seconds = 0.0;
  std::string detail;

  double tolerance() const { return abs_tol + rel_tol * std::abs(target); }

  bool value_ok() const {
    if (!std::isfinite(computed)) return false;
    switch (relation) {
      case Relation::eq: return std::abs(computed - target) <= tolerance();
      case Relation::le: return computed <= target + tolerance();
      case Relation::ge: return computed >= target - tolerance();
      case Relation::gt: return computed > target;
    }
    return false;
  }

  bool order_ok() const {
    if (!min_order || !order_estimate) return true;  // not run, or saturated at rounding
    return *order_estimate >= *min_order;
  }

  void finalize() { pass = value_ok() && order_ok(); }
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Least-squares slope of log(error) against log(step) over the leading rows
/// whose error is above `floor`; empty when fewer than two remain.
inline std::optional<double> fit_order(const std::vector<ConvergenceRow>& rows, double floor) {
  std::vector<double> lx, ly;
  for (const auto& r : rows) {
    if (!(r.error > floor) || !std::isfinite(r.error)) break;
    lx.push_back(std::log(r.fd_step > 0.0 ? r.fd_step : 1.0 / r.mesh));
    ly.push_back(std::log(r.error));
  }
  if (lx.size() < 2) return std::nullopt;
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) mx += lx[k], my += ly[k];
  mx /= n, my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  return sxy / sxx;
}

}  // namespace detail

/// Runs `eval(fd_step)` at `levels` steps coarse, coarse/2, ... and fills the
/// convergence table and order. Errors at or below `floor` count as the
/// rounding floor; a table that reaches it early reports no order.
template <class Eval>
void fd_convergence(CheckReport& r, Eval&& eval, double coarse, int levels, double floor) {
  if (levels < 2) return;
  coarse = std::min(coarse, 0.032);
  for (int k = 0; k < levels; ++k) {
    ConvergenceRow row;
    row.fd_step = coarse / std::pow(2.0, k);
    row.value = eval(row.fd_step);
    row.error = std::abs(row.value - r.target);
    r.convergence.push_back(row);
  }
  r.order_estimate = detail::fit_order(r.convergence, floor);
  r.order_saturated = !r.order_estimate.has_value();
}

template <class Eval>
void mesh_convergence(CheckReport& r, Eval&& eval, int coarse, int levels, double floor) {
  if (levels < 2) return;
  for (int k = 0; k < levels; ++k) {
    ConvergenceRow row;
    row.mesh = coarse << k;
    row.value = eval(row.mesh);
    row.error = std::abs(row.value - r.target);
    r.convergence.push_back(row);
  }
  r.order_estimate = detail::fit_order(r.convergence, floor);
  r.order_saturated = !r.order_estimate.has_value();
}

/// Grid for a metric: the radial fast path when the metric is rotationally
/// symmetric, the full tensor grid otherwise. Validates the metric on it.
template <int N>
BallGrid<N> grid_for(const MetricSpec<N>& metric, const Resolution& res, double fd_step) {
  auto g = build_grid<N>(res.radial, res.angular, fd_step, metric.rotationally_symmetric);
  validate_metric<N>(metric, g);
  return g;
}

template <int N>
BallGrid<N> grid_for(const MetricSpec<N>& metric, const Resolution& res) {
  return grid_for<N>(metric, res, res.fd_step);
}

template <int N>
CheckReport new_report(const std::string& id, const MetricSpec<N>& metric, const Resolution& res) {
  CheckReport r;
  r.id = id;
  r.model = metric.name;
  r.dim = N;
  r.resolution = res;
  r.radial_only = metric.rotationally_symmetric;
  return r;
}

// ---------------------------------------------------------------------------
// Gauss-Bonnet, n = 4

/// (int |W|^2 + int (R^2/6 - 2|E|^2) + 8 int B) / (32 pi^2).
template <int N>
double cgb4_value(const MetricSpec<N>& metric, const BallGrid<N>& grid) {
  static_assert(N == 4, "cgb4 is the n = 4 identity");
  const auto bulk = bulk_values<N>(metric, grid, [](const CurvaturePackage<N>& p) {
    return p.weyl_norm2 + p.scalar * p.scalar / 6.0 - 2.0 * p.e_norm2;
  });
  const auto bdry = boundary_values<N>(
      metric, grid, [](const BoundaryPackage<N>& b) { return b.gauss_bonnet_integrand; });
  return (integrate_bulk<N>(grid, bulk) + 8.0 * integrate_boundary<N>(grid, bdry)) /
         (32.0 * pi * pi);
}

template <int N>
CheckReport cgb4_check(const MetricSpec<N>& metric, const Resolution& res) {
  detail::Stopwatch clock;
  auto r = new_report<N>("cgb4/" + metric.name, metric, res);
  r.target = 1.0;
  r.abs_tol = metric.name == "flat" ? 1e-8 : 1e-5;
  r.min_order = 3.5;
  r.computed = cgb4_value<N>(metric, grid_for<N>(metric, res));
  fd_convergence(
      r, [&](double h) { return cgb4_value<N>(metric, grid_for<N>(metric, res, h)); },
      16.0 * res.fd_step, res.refine, 1e-11);
  r.finalize();
  r.seconds = clock.seconds();
  return r;
}

/// Flat-ball pins: max |B - 2| over the boundary nodes, and int B ds.
template <int N>
std::vector<CheckReport> flat_boundary_checks(const Resolution& res) {
  static_assert(N == 4, "the flat-ball pin is stated for n = 4");
  detail::Stopwatch clock;
  const auto metric = flat_model<N>();
  // full angular grid, so the pointwise pin samples the whole sphere
  const auto grid = build_grid<N>(res.radial, res.angular, res.fd_step, false);
  validate_metric<N>(metric, grid);
  const auto b = boundary_values<N>(metric, grid, [](const BoundaryPackage<N>& p) {
    return p.gauss_bonnet_integrand;
  });
  const auto density = boundary_values<N>(metric, grid, [](const BoundaryPackage<N>&) { return 1.0; });
  double worst = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) worst = std::max(worst, std::abs(b[k] / density[k] - 2.0));

  auto pointwise = new_report<N>("boundary/flat/pointwise", metric, res);
  pointwise.computed = worst;
  pointwise.relation = Relation::le;
  pointwise.abs_tol = 1e-8;
  pointwise.finalize();

  auto integral = new_report<N>("boundary/flat/integral", metric, res);
  integral.computed = integrate_boundary<N>(grid, b);
  integral.target = 4.0 * pi * pi;
  integral.abs_tol = 1e-8;
  integral.finalize();
  pointwise.radial_only = integral.radial_only = false;
  pointwise.seconds = integral.seconds = clock.seconds();
  return {pointwise, integral};
}

// ---------------------------------------------------------------------------
// F2 and its conformal invariance

template <int N>
CheckReport f2_check(const MetricSpec<N>& metric, const Resolution& res) {
  detail::Stopwatch clock;
  auto r = new_report<N>("f2/" + metric.name, metric, res);
  r.target = 2.0 * pi * pi;  // every model is conformal to the flat ball
  if (metric.name == "flat")
    r.abs_tol = 1e-8;
  else if (metric.name == "hemisphere")
    r.abs_tol = 1e-6;
  else
    r.rel_tol = 1e-4;
  r.computed = f2_invariant<N>(metric, grid_for<N>(metric, res));
  fd_convergence(
      r, [&](double h) { return f2_invariant<N>(metric, grid_for<N>(metric, res, h)); },
      16.0 * res.fd_step, res.refine, 1e-11);
  r.finalize();
  r.seconds = clock.seconds();
  return r;
}

/// Seeded conformal factors for invariance sweeps: even indices radial
/// (exp of a radial profile), odd indices non-radial (exp of a generic profile).
template <int N>
ConformalFactor<N> seeded_factor(std::uint64_t seed, int index, double amplitude) {
  char name[64];
  if (index % 2 == 0) {
    const auto u = RadialProfile::seeded(seed * 1000 + index, amplitude, 0);
    std::snprintf(name, sizeof name, "radial_factor(%d)", index);
    return ConformalFactor<N>::from_exponent(
        [u](const Point<N>& x) { return u(radius_squared<N>(x)); }, true, name);
  }
  const auto p = GenericProfile<N>::seeded(seed * 1000 + index);
  std::snprintf(name, sizeof name, "generic_factor(%d)", index);
  return ConformalFactor<N>::from_exponent(
      [p, amplitude](const Point<N>& x) { return amplitude * p(x); }, false, name);
}

/// Relative spread (max - min) / |mean| of F2 over `count` seeded factors
/// applied to the hemisphere.
template <int N>
CheckReport f2_invariance_check(const Resolution& res, int count = 10, std::uint64_t seed = 1) {
  detail::Stopwatch clock;
  const auto base = hemisphere_model<N>();
  auto r = new_report<N>("f2/invariance_spread", base, res);
  r.relation = Relation::le;
  r.abs_tol = 1e-4;
  std::vector<double> values;
  for (int k = 0; k < count; ++k) {
    const auto m = rescale<N>(base, seeded_factor<N>(seed, k, 0.2));
    values.push_back(f2_invariant<N>(m, grid_for<N>(m, res)));
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= values.size();
  r.computed = (*hi - *lo) / std::abs(mean);
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d factors, min %.17g max %.17g", count, *lo, *hi);
  r.detail = buf;
  r.finalize();
  r.seconds = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// Spectrum, the gap inequality and the Yamabe chain

/// j'_{1,1}, the first positive zero of the derivative of the Bessel function J_1.
inline constexpr double bessel_j1_prime_zero = 1.8411837813406593;

template <int N>
std::vector<CheckReport> spectrum_checks(const MetricSpec<N>& metric, const Resolution& res) {
  detail::Stopwatch clock;
  const auto result = lambda1(assemble<N>(metric, res.mesh));
  auto lam = new_report<N>("spectrum/" + metric.name + "/lambda1", metric, res);
  lam.computed = result.lambda1;
  std::optional<double> exact;
  if (metric.name == "hemisphere") exact = 12.0;
  if (metric.name == "flat") exact = 6.0 * bessel_j1_prime_zero * bessel_j1_prime_zero;
  if (exact) {
    lam.target = *exact;
    lam.abs_tol = 1e-8;
    lam.min_order = 3.5;
    mesh_convergence(
        lam, [&](int m) { return lambda1(assemble<N>(metric, m)).lambda1; }, 32, res.refine,
        1e-11);
  } else {
    lam.relation = Relation::gt;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "iterations %d, rayleigh-lambda %.3g, robin residual %.3g, eigen residual %.3g",
                result.iterations, result.rayleigh_quotient - result.lambda1,
                result.robin_residual, result.eigen_residual);
  lam.detail = buf;
  lam.finalize();

  auto ground = new_report<N>("spectrum/" + metric.name + "/ground_state_min", metric, res);
  ground.computed = result.positivity_margin;
  ground.relation = Relation::gt;
  ground.finalize();

  auto rq = new_report<N>("spectrum/" + metric.name + "/rayleigh_consistency", metric, res);
  rq.computed = std::abs(result.rayleigh_quotient - result.lambda1);
  rq.relation = Relation::le;
  rq.abs_tol = 1e-10;
  rq.finalize();

  std::vector<CheckReport> out{lam, ground, rq};
  if (metric.name == "hemisphere") {
    auto flat_f = new_report<N>("spectrum/hemisphere/eigenfunction_spread", metric, res);
    flat_f.computed = result.f_spread;
    flat_f.relation = Relation::le;
    flat_f.abs_tol = 1e-7;
    flat_f.finalize();
    out.push_back(flat_f);
  }
  for (auto& r : out) r.seconds = clock.seconds();
  return out;
}

/// The 50-metric radial sweep: radial_bump(k, 0.03 (1 + k mod 10)), k = 1..count.
template <int N>
std::vector<MetricSpec<N>> radial_sweep(int count = 50) {
  std::vector<MetricSpec<N>> out;
  for (int k = 1; k <= count; ++k)
    out.push_back(radial_bump_model<N>(k, 0.03 * (1 + k % 10)));
  return out;
}

/// Per-metric quantities of the Yamabe chain.
struct ChainSample {
  std::string model;
  double f2 = 0.0;
  double lambda1 = 0.0;
  double volume = 0.0;
  double ground_min = 0.0;
  double witness() const { return lambda1 * lambda1 * volume; }  // (lambda1 Vol^{1/2})^2
  double gap() const { return lambda1 * lambda1 - 96.0 * f2 / volume; }
};

template <int N>
ChainSample chain_sample(const MetricSpec<N>& metric, const Resolution& res) {
  const auto grid = grid_for<N>(metric, res);
  const auto spec = lambda1(assemble<N>(metric, res.mesh));
  ChainSample s;
  s.model = metric.name;
  s.f2 = f2_invariant<N>(metric, grid);
  s.lambda1 = spec.lambda1;
  s.volume = volume<N>(metric, grid);
  s.ground_min = spec.positivity_margin;
  return s;
}

template <int N>
std::vector<ChainSample> chain_samples(const std::vector<MetricSpec<N>>& metrics,
                                       const Resolution& res) {
  std::vector<ChainSample> out(metrics.size());
  parallel_map(metrics.size(), [&](std::size_t k) {
    out[k] = chain_sample<N>(metrics[k], res);
    return 0.0;
  });
  return out;
}

template <int N>
CheckReport gap_check(const MetricSpec<N>& metric, const Resolution& res) {
  detail::Stopwatch clock;
  auto r = new_report<N>("gap/" + metric.name, metric, res);
  r.computed = chain_sample<N>(metric, res).gap();
  if (metric.name == "hemisphere") {
    r.abs_tol = 1e-5;
  } else {
    r.relation = Relation::ge;
    r.abs_tol = 1e-6;
  }
  r.finalize();
  r.seconds = clock.seconds();
  return r;
}

/// Gap and ground-state statistics over the radial sweep.
template <int N>
std::vector<CheckReport> gap_sweep_checks(const Resolution& res, int count = 50) {
  detail::Stopwatch clock;
  const auto samples = chain_samples<N>(radial_sweep<N>(count), res);
  const auto base = hemisphere_model<N>();
  auto gap = new_report<N>("gap/sweep_min", base, res);
  auto ground = new_report<N>("spectrum/sweep_ground_state_min", base, res);
  gap.model = ground.model = "radial_sweep(" + std::to_string(count) + ")";
  gap.computed = ground.computed = std::numeric_limits<double>::infinity();
  std::string worst;
  for (const auto& s : samples) {
    if (s.gap() < gap.computed) gap.computed = s.gap(), worst = s.model;
    ground.computed = std::min(ground.computed, s.ground_min);
  }
  gap.relation = Relation::ge;
  gap.abs_tol = 1e-6;
  gap.detail = "smallest at " + worst;
  ground.relation = Relation::gt;
  gap.finalize();
  ground.finalize();
  gap.seconds = ground.seconds = clock.seconds();
  return {gap, ground};
}

/// The chain 96 F2 <= (lambda1 Vol^{1/2})^2 and its saturation at 192 pi^2
/// on the hemisphere.
template <int N>
std::vector<CheckReport> chain_checks(const Resolution& res, int count = 50) {
  static_assert(N == 4, "the chain is stated for n = 4");
  detail::Stopwatch clock;
  const double c = 192.0 * pi * pi;
  const auto hemi = hemisphere_model<N>();
  const auto h = chain_sample<N>(hemi, res);

  auto sat = new_report<N>("chain/hemisphere_saturation", hemi, res);
  sat.computed = std::max(std::abs(96.0 * h.f2 - c), std::abs(h.witness() - c)) / c;
  sat.relation = Relation::le;
  sat.abs_tol = 1e-5;
  char buf[160];
  std::snprintf(buf, sizeof buf, "96 F2 = %.17g, (lambda1 Vol^1/2)^2 = %.17g", 96.0 * h.f2,
                h.witness());
  sat.detail = buf;
  sat.finalize();

  auto constant = new_report<N>("chain/yamabe_constant", hemi, res);
  const double y = yamabe_quotient<N>(hemi, grid_for<N>(hemi, res));
  constant.computed = y * y;
  constant.target = c;
  constant.rel_tol = 1e-6;
  constant.finalize();

  const auto samples = chain_samples<N>(radial_sweep<N>(count), res);
  auto margin = new_report<N>("chain/sweep_margin_min", hemi, res);
  auto bound = new_report<N>("chain/f2_bound_max", hemi, res);
  auto spread = new_report<N>("chain/f2_spread", hemi, res);
  margin.model = bound.model = spread.model = "radial_sweep(" + std::to_string(count) + ")";
  margin.computed = std::numeric_limits<double>::infinity();
  bound.computed = -std::numeric_limits<double>::infinity();
  double lo = INFINITY, hi = -INFINITY, mean = 0.0;
  for (const auto& s : samples) {
    margin.computed = std::min(margin.computed, s.witness() - 96.0 * s.f2);
    bound.computed = std::max(bound.computed, 96.0 * s.f2);
    lo = std::min(lo, s.f2), hi = std::max(hi, s.f2), mean += s.f2;
  }
  mean /= samples.size();
  margin.relation = Relation::ge;
  margin.abs_tol = 1e-6;
  bound.relation = Relation::le;
  bound.target = c;
  bound.rel_tol = 1e-8;
  spread.computed = (hi - lo) / std::abs(mean);
  spread.relation = Relation::le;
  spread.abs_tol = 1e-4;

  // hemisphere family: amplitude t -> 0 of a fixed radial bump
  auto family = new_report<N>("chain/family_min_above", hemi, res);
  family.model = "radial_bump(3,t), t -> 0";
  double prev = INFINITY;
  bool monotone = true;
  family.computed = INFINITY;
  for (double t : {0.3, 0.1, 0.03, 0.01, 0.003}) {
    const double w = chain_sample<N>(radial_bump_model<N>(3, t), res).witness();
    monotone = monotone && w <= prev;
    prev = w;
    family.computed = std::min(family.computed, w);
  }
  family.target = c;
  family.relation = Relation::ge;
  family.rel_tol = 1e-8;
  family.detail = std::string("witness decreasing toward the hemisphere value: ") +
                  (monotone ? "yes" : "no");
  for (auto* r : {&margin, &bound, &spread, &family}) r->finalize();
  family.pass = family.pass && monotone;

  std::vector<CheckReport> out{sat, constant, margin, bound, spread, family};
  for (auto& r : out) r.seconds = clock.seconds();
  return out;
}

// ---------------------------------------------------------------------------
// Gauss-Bonnet, n = 6

inline constexpr double geodesic_boundary_tolerance = 1e-4;

/// Throws unless every boundary node has |H_mean| and umbilicity residual
/// within tolerance.
template <int N>
void require_totally_geodesic(const MetricSpec<N>& metric, const BallGrid<N>& grid) {
  double h = 0.0, umb = 0.0;
  for (const auto& x : grid.boundary_nodes) {
    const auto b = boundary_package<N>(metric, grid, x);
    h = std::max(h, std::abs(b.h_mean));
    umb = std::max(umb, b.umbilicity_residual);
  }
  if (umb > geodesic_boundary_tolerance)
    throw PreconditionError("boundary of '" + metric.name + "' is not umbilical: residual " +
                            std::to_string(umb));
  if (h > geodesic_boundary_tolerance)
    throw PreconditionError("boundary of '" + metric.name +
                            "' is not totally geodesic: max |H_mean| = " + std::to_string(h));
}

template <int N>
void require_integrable_dim6(const MetricSpec<N>& metric) {
  if (!metric.conformally_flat())
    throw PreconditionError("'" + metric.name + "' is not given as conformal to flat");
  if (!metric.rotationally_symmetric)
    throw PreconditionError("n = 6 integral checks use the radial fast path; '" + metric.name +
                            "' is not rotationally symmetric");
}

/// (int Tr E^3 - 2/5 int R|E|^2 + 4/225 int R^3) / (256 pi^3).
template <int N>
double cgb6_value(const MetricSpec<N>& metric, const BallGrid<N>& grid) {
  static_assert(N == 6, "cgb6 is the n = 6 identity");
  require_totally_geodesic<N>(metric, grid);
  const auto bulk = bulk_values<N>(metric, grid, [](const CurvaturePackage<N>& p) {
    return p.tr_e3 - 0.4 * p.scalar * p.e_norm2 + 4.0 / 225.0 * p.scalar * p.scalar * p.scalar;
  });
  return integrate_bulk<N>(grid, bulk) / (256.0 * pi * pi * pi);
}

/// Integrals entering the gradient identities of an LCF metric.
struct IntegratedTerms {
  int dim = 0;
  double tr_e3 = 0.0;       // int Tr E^3
  double r3 = 0.0;          // int R^3
  double grad_r2 = 0.0;     // int |grad R|^2
  double grad_e2 = 0.0;     // int |nabla E|^2
  double r_e2 = 0.0;        // int R |E|^2
  double e2 = 0.0;          // int |E|^2
  double half_dn_e2 = 0.0;  // int_boundary (1/2) d|E|^2/dN
  double e_n_grad_r = 0.0;  // int_boundary E(N, grad R)

  /// Right-hand side of the integrated Tr(E^3) identity obtained by
  /// contracting the LCF identity for Lap E with E and integrating by parts:
  ///   1/4 (n-2)^3/(n^2(n-1)) int|grad R|^2 - (n-2)/n int|nabla E|^2
  ///   - (n-2)/(n(n-1)) int R|E|^2
  ///   + (n-2)/n int_boundary ((1/2) d|E|^2/dN - (n-2)/(2(n-1)) E(N, grad R)).
  double tr_e3_rhs() const {
    const double n = dim;
    return 0.25 * std::pow(n - 2.0, 3) / (n * n * (n - 1.0)) * grad_r2 -
           (n - 2.0) / n * grad_e2 - (n - 2.0) / (n * (n - 1.0)) * r_e2 +
           (n - 2.0) / n * (half_dn_e2 - (n - 2.0) / (2.0 * (n - 1.0)) * e_n_grad_r);
  }

  double tr_e3_residual() const { return std::abs(tr_e3 - tr_e3_rhs()) / (1.0 + std::abs(tr_e3)); }

  /// 3/2 of the n = 6 Gauss-Bonnet density with int Tr E^3 eliminated:
  ///   2/75 int R^3 + 2/15 int|grad R|^2 - int|nabla E|^2 - 4/5 int R|E|^2
  ///   + int_boundary ((1/2) d|E|^2/dN - 2/5 E(N, grad R)).
  double cgb6_gradient_form() const {
    return 2.0 / 75.0 * r3 + 2.0 / 15.0 * grad_r2 - grad_e2 - 0.8 * r_e2 + half_dn_e2 -
           0.4 * e_n_grad_r;
  }
};

template <int N>
IntegratedTerms integrated_terms(const MetricSpec<N>& metric, const BallGrid<N>& grid) {
  if (!metric.conformally_flat())
    throw PreconditionError("'" + metric.name + "' is not given as conformal to flat");
  constexpr int K = 6;
  const std::size_t nb = grid.bulk_nodes.size();
  std::vector<std::array<double, K>> bulk(nb);
  parallel_map(nb, [&](std::size_t k) {
    const auto p = curvature_package<N>(metric, grid, grid.bulk_nodes[k]);
    const double w = p.volume_density;
    bulk[k] = {p.tr_e3 * w, p.scalar * p.scalar * p.scalar * w, p.grad_scalar_norm2 * w,
               p.nabla_e_norm2 * w, p.scalar * p.e_norm2 * w, p.e_norm2 * w};
    return 0.0;
  });
  const StepPolicy policy = StepPolicy::from_fd_step(grid.fd_step);
  const std::size_t ns = grid.boundary_nodes.size();
  std::vector<double> f1(ns), f2(ns);
  parallel_map(ns, [&](std::size_t k) {
    auto b = boundary_package<N>(metric, grid, grid.boundary_nodes[k]);
    attach_gradients<N>(b.curvature, metric, policy);
    const auto [half_dn, en] = e_flux_terms<N>(b);
    f1[k] = half_dn * b.area_density;
    f2[k] = en * b.area_density;
    return 0.0;
  });
  std::array<double, K> sums{};
  std::vector<double> column(nb);
  for (int c = 0; c < K; ++c) {
    for (std::size_t k = 0; k < nb; ++k) column[k] = bulk[k][c];
    sums[c] = integrate_bulk<N>(grid, column);
  }
  IntegratedTerms t;
  t.dim = N;
  t.tr_e3 = sums[0];
  t.r3 = sums[1];
  t.grad_r2 = sums[2];
  t.grad_e2 = sums[3];
  t.r_e2 = sums[4];
  t.e2 = sums[5];
  t.half_dn_e2 = integrate_boundary<N>(grid, f1);
  t.e_n_grad_r = integrate_boundary<N>(grid, f2);
  return t;
}

/// Gradient form of the n = 6 identity, divided by 384 pi^3.
template <int N>
double cgb6_gradient_value(const MetricSpec<N>& metric, const BallGrid<N>& grid) {
  static_assert(N == 6, "cgb6 is the n = 6 identity");
  require_totally_geodesic<N>(metric, grid);
  return integrated_terms<N>(metric, grid).cgb6_gradient_form() / (384.0 * pi * pi * pi);
}

template <int N>
CheckReport cgb6_check(const MetricSpec<N>& metric, const Resolution& res) {
  detail::Stopwatch clock;
  require_integrable_dim6<N>(metric);
  auto r = new_report<N>("cgb6/" + metric.name, metric, res);
  r.target = 1.0;
  r.abs_tol = 1e-6;
  r.min_order = 3.5;
  r.computed = cgb6_value<N>(metric, grid_for<N>(metric, res));
  fd_convergence(
      r, [&](double h) { return cgb6_value<N>(metric, grid_for<N>(metric, res, h)); },
      16.0 * res.fd_step, res.refine, 1e-11);
  r.finalize();
  r.seconds = clock.seconds();
  return r;
}

template <int N>
CheckReport cgb6_gradient_check(const MetricSpec<N>& metric, const Resolution& res) {
  detail::Stopwatch clock;
  require_integrable_dim6<N>(metric);
  auto r = new_report<N>("cgb6_gradient/" + metric.name, metric, res);
  r.target = 1.0;
  r.abs_tol = 1e-6;
  r.computed = cgb6_gradient_value<N>(metric, grid_for<N>(metric, res));
  fd_convergence(
      r, [&](double h) { return cgb6_gradient_value<N>(metric, grid_for<N>(metric, res, h)); },
      8.0 * res.fd_step, res.refine, 1e-11);
  r.finalize();
  r.seconds = clock.seconds();
  return r;
}

/// Constant-scalar form (2/75 R^3 Vol - 4R/5 int |E|^2) / (384 pi^3) with R
/// the volume average of the scalar curvature, the boundary flux, and
/// max |<nabla_N Ric, Ric>| on the boundary.
template <int N>
std::vector<CheckReport> constant_scalar_checks(const MetricSpec<N>& metric, const Resolution& res) {
  static_assert(N == 6, "stated for n = 6");
  detail::Stopwatch clock;
  require_integrable_dim6<N>(metric);
  const auto grid = grid_for<N>(metric, res);
  require_totally_geodesic<N>(metric, grid);
  const double vol = volume<N>(metric, grid);
  const double r_mean =
      integrate_bulk<N>(grid, bulk_values<N>(metric, grid, [](const CurvaturePackage<N>& p) {
        return p.scalar;
      })) / vol;
  const double e2 = integrate_bulk<N>(
      grid, bulk_values<N>(metric, grid, [](const CurvaturePackage<N>& p) { return p.e_norm2; }));

  auto display = new_report<N>("constant_scalar/" + metric.name, metric, res);
  display.computed = 2.0 / 75.0 * r_mean * r_mean * r_mean * vol - 0.8 * r_mean * e2;
  display.target = 384.0 * pi * pi * pi;
  display.rel_tol = 1e-6;
  char buf[128];
  std::snprintf(buf, sizeof buf, "mean R %.17g, Vol %.17g", r_mean, vol);
  display.detail = buf;
  display.finalize();

  auto flux = new_report<N>("constant_scalar/" + metric.name + "/boundary_flux", metric, res);
  const auto terms = integrated_terms<N>(metric, grid);
  flux.computed = std::abs(terms.half_dn_e2 - 0.4 * terms.e_n_grad_r);
  flux.relation = Relation::le;
  flux.abs_tol = 1e-6;
  flux.finalize();

  auto normal = new_report<N>("constant_scalar/" + metric.name + "/normal_ricci", metric, res);
  const auto v = parallel_map(grid.boundary_nodes.size(), [&](std::size_t k) {
    return std::abs(normal_ricci_product<N>(metric, grid, grid.boundary_nodes[k]));
  });
  normal.computed = *std::max_element(v.begin(), v.end());
  normal.relation = Relation::le;
  normal.abs_tol = 1e-4;
  normal.finalize();

  std::vector<CheckReport> out{display, flux, normal};
  for (auto& r : out) r.seconds = clock.seconds();
  return out;
}

/// Yamabe quotient of the hemisphere against its closed form: 8 pi sqrt(3)
/// (n = 4) or 30 (8 pi^3 / 15)^{1/3} (n = 6).
template <int N>
CheckReport yamabe_check(const MetricSpec<N>& metric, const Resolution& res) {
  detail::Stopwatch clock;
  auto r = new_report<N>("yamabe/" + metric.name, metric, res);
  r.computed = yamabe_quotient<N>(metric, grid_for<N>(metric, res));
  if (metric.name == "hemisphere") {
    r.target = N == 4 ? 8.0 * pi * std::sqrt(3.0)
                      : 30.0 * std::cbrt(8.0 * pi * pi * pi / 15.0);
    r.abs_tol = 1e-6;
  } else {
    r.relation = Relation::gt;
    r.target = -std::numeric_limits<double>::infinity();
  }
  r.finalize();
  r.seconds = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// Tensor identities

/// Seeded interior nodes with radius in [0.1, 0.7].
template <int N>
std::vector<Point<N>> interior_sample(std::uint64_t seed, int count) {
  SeededStream rng(seed);
  std::vector<Point<N>> out;
  for (int k = 0; k < count; ++k) {
    Point<N> x{};
    double s = 0.0;
    for (double& v : x) v = rng.uniform(-1.0, 1.0), s += v * v;
    const double r = rng.uniform(0.1, 0.7) / std::sqrt(s);
    for (double& v : x) v *= r;
    out.push_back(x);
  }
  return out;
}

/// Seeded points on the unit sphere.
template <int N>
std::vector<Point<N>> boundary_sample(std::uint64_t seed, int count) {
  SeededStream rng(seed ^ 0xB0B0ULL);
  std::vector<Point<N>> out;
  for (int k = 0; k < count; ++k) {
    Point<N> x{};
    double s = 0.0;
    for (double& v : x) v = rng.uniform(-1.0, 1.0), s += v * v;
    for (double& v : x) v /= std::sqrt(s);
    out.push_back(x);
  }
  return out;
}

/// A pointwise identity: residual(metric, grid, node) maximized over nodes.
template <int N>
struct PointwiseIdentity {
  std::string name;
  std::function<double(const MetricSpec<N>&, const BallGrid<N>&, const Point<N>&)> residual;
  bool on_boundary = false;
  double coarse_multiplier = 4.0;  // first fd_step of the convergence ladder, in units of fd_step
  double min_order = 2.5;
};

template <int N>
CheckReport pointwise_identity_check(const PointwiseIdentity<N>& id, const MetricSpec<N>& metric,
                                     const Resolution& res, std::uint64_t seed, int nodes = 3) {
  detail::Stopwatch clock;
  auto r = new_report<N>("identity/" + id.name + "/" + metric.name + "/n" + std::to_string(N),
                         metric, res);
  r.relation = Relation::le;
  r.abs_tol = 1e-4;
  r.min_order = id.min_order;
  r.radial_only = false;
  const auto pts = id.on_boundary ? boundary_sample<N>(seed, nodes) : interior_sample<N>(seed, nodes);
  auto eval = [&](double h) {
    // the grid only carries fd_step here; nodes come from the seeded sample
    const auto grid = build_grid<N>(4, 4, h, true);
    const auto v = parallel_map(pts.size(), [&](std::size_t k) { return id.residual(metric, grid, pts[k]); });
    return *std::max_element(v.begin(), v.end());
  };
  r.computed = eval(res.fd_step);
  fd_convergence(r, eval, id.coarse_multiplier * res.fd_step, res.refine, 1e-11);
  r.finalize();
  r.seconds = clock.seconds();
  return r;
}

template <int N>
std::vector<PointwiseIdentity<N>> pointwise_identities() {
  std::vector<PointwiseIdentity<N>> out;
  out.push_back({"lcf_weyl", lcf_weyl_residual<N>, false, 16.0, 3.5});
  if constexpr (N == 6)
    out.push_back({"weyl_decomposition", weyl_decomposition_residual_dim6<N>, false, 16.0, 3.5});
  out.push_back({"laplace_E",
                 [](const MetricSpec<N>& m, const BallGrid<N>& g, const Point<N>& x) {
                   return lcf_laplace_E_residual<N>(m, g, x, resolved_laplacian_sign);
                 },
                 false, 4.0, 2.5});
  out.push_back({"codazzi",
                 [](const MetricSpec<N>& m, const BallGrid<N>& g, const Point<N>& x) {
                   return codazzi_residual<N>(m, g, x);
                 },
                 true, 16.0, 3.5});
  out.push_back({"contracted_bianchi", contracted_bianchi_residual<N>, false, 4.0, 2.5});
  return out;
}

template <int N>
CheckReport tr_e3_identity_check(const MetricSpec<N>& metric, const Resolution& res) {
  detail::Stopwatch clock;
  if constexpr (N == 6) require_integrable_dim6<N>(metric);
  auto r = new_report<N>("identity/tr_e3/" + metric.name + "/n" + std::to_string(N), metric, res);
  r.relation = Relation::le;
  r.abs_tol = 1e-4;
  r.min_order = 2.5;
  r.computed = integrated_terms<N>(metric, grid_for<N>(metric, res)).tr_e3_residual();
  fd_convergence(
      r, [&](double h) {
        return integrated_terms<N>(metric, grid_for<N>(metric, res, h)).tr_e3_residual();
      },
      8.0 * res.fd_step, res.refine, 1e-11);
  r.finalize();
  r.seconds = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// Rigidity probe

/// u(r) = sum_k c_k (1 - r^2) r^{2k}, k = 0 .. basis - 1; vanishes on |x| = 1.
struct ProbeProfile {
  std::vector<double> c;
  double operator()(double s) const {
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * s + c[k];
    return (1.0 - s) * acc;
  }
  double sup_norm() const {
    double m = 0.0;
    for (int k = 0; k <= 256; ++k) {
      const double r = k / 256.0;
      m = std::max(m, std::abs((*this)(r * r)));
    }
    return m;
  }
};

inline constexpr double probe_min_amplitude = 0.01;

struct ProbeResult {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> best_coefficients;
  std::vector<double> history;  // running best after each iteration
  int rejected = 0;
};

/// e^{2u} g_round in the stereographic chart, as a conformal factor phi e^u.
template <int N>
MetricSpec<N> probe_metric(const ProbeProfile& u) {
  return conformal_metric<N>(
      "probe", [u](const Point<N>& x) { return round_factor<N>(x) * std::exp(u(radius_squared<N>(x))); },
      true);
}

/// Scales u up so that sup |u| >= 0.01.
inline ProbeProfile normalized(ProbeProfile u) {
  const double s = u.sup_norm();
  if (s == 0.0) {
    u.c.assign(u.c.size(), 0.0);
    u.c[0] = probe_min_amplitude;
  } else if (s < probe_min_amplitude) {
    for (double& v : u.c) v *= probe_min_amplitude / s;
  }
  return u;
}

/// min over grid nodes (bulk and boundary) of R - n(n-1).
template <int N>
double probe_objective(const ProbeProfile& u, const BallGrid<N>& grid) {
  const auto m = probe_metric<N>(u);
  std::vector<Point<N>> pts = grid.bulk_nodes;
  pts.insert(pts.end(), grid.boundary_nodes.begin(), grid.boundary_nodes.end());
  const auto v = parallel_map(pts.size(), [&](std::size_t k) {
    return curvature_at<N>(m, grid.fd_step, pts[k]).scalar - N * (N - 1.0);
  });
  double lo = INFINITY;
  for (double x : v) lo = std::isfinite(x) ? std::min(lo, x) : -INFINITY;
  return lo;
}

/// Coordinate ascent on min (R - n(n-1)) over normalized radial profiles,
/// with central-difference slopes. Deterministic given the seed.
template <int N>
ProbeResult rigidity_probe(int basis_size, int iterations, std::uint64_t seed,
                           const Resolution& res = {}) {
  if (basis_size < 1) throw PreconditionError("rigidity_probe: basis_size must be positive");
  if (iterations < 0) throw PreconditionError("rigidity_probe: iterations must be non-negative");
  const auto grid = build_grid<N>(res.radial, res.angular, res.fd_step, true);
  SeededStream rng(seed);
  ProbeProfile u;
  u.c.resize(basis_size);
  for (double& v : u.c) v = rng.uniform(-0.05, 0.05);
  u = normalized(u);
  ProbeResult out;
  auto objective = [&](const ProbeProfile& p) {
    const double j = probe_objective<N>(p, grid);
    return std::isfinite(j) ? j : -INFINITY;
  };
  double current = objective(u);
  out.best = current;
  out.best_coefficients = u.c;
  std::vector<double> step(basis_size, 0.02);
  const double eps = 1e-4;
  for (int it = 0; it < iterations; ++it) {
    const int k = it % basis_size;
    ProbeProfile up = u, dn = u;
    up.c[k] += eps;
    dn.c[k] -= eps;
    const double slope = (objective(normalized(up)) - objective(normalized(dn))) / (2.0 * eps);
    ProbeProfile trial = u;
    trial.c[k] += slope >= 0.0 ? step[k] : -step[k];
    trial = normalized(trial);
    const double j = objective(trial);
    if (j > current) {
      u = trial;
      current = j;
      step[k] *= 1.5;
    } else {
      if (!(j > -INFINITY)) ++out.rejected;
      step[k] *= 0.5;
    }
    if (current > out.best) {
      out.best = current;
      out.best_coefficients = u.c;
    }
    out.history.push_back(out.best);
  }
  return out;
}

template <int N>
CheckReport rigidity_probe_check(int basis_size, int iterations, std::uint64_t seed,
                                 const Resolution& res = {}) {
  static_assert(N == 4, "the probe runs in dimension 4");
  detail::Stopwatch clock;
  const auto result = rigidity_probe<N>(basis_size, iterations, seed, res);
  CheckReport r;
  r.id = "probe/seed" + std::to_string(seed);
  r.model = "e^{2u} hemisphere, basis " + std::to_string(basis_size);
  r.dim = N;
  r.resolution = res;
  r.radial_only = true;
  r.computed = result.best;
  r.relation = Relation::le;
  r.abs_tol = 1e-6;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d iterations, %d rejected steps", iterations, result.rejected);
  r.detail = buf;
  r.finalize();
  r.seconds = clock.seconds();
  return r;
}

}  // namespace hemi
