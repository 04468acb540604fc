#include <gtest/gtest.h>

#include <cmath>

#include "hemi/curvature.hpp"
#include "hemi/models.hpp"
#include "hemi/verify.hpp"

using namespace hemi;

namespace {

template <int N>
BallGrid<N> step_grid(double h) {
  return build_grid<N>(4, 4, h, true);
}

template <int N>
MetricSpec<N> quadratic_factor() {
  return conformal_metric<N>("1+0.2r2", [](const Point<N>& x) { return 1.0 + 0.2 * radius_squared<N>(x); },
                             true);
}

template <int N>
double max_abs(const Mat<N>& m) {
  return m.max_abs();
}

/// Log-log slope of errors over successive halvings.
double slope(const std::vector<double>& errors) {
  return std::log2(errors.front() / errors.back()) / (errors.size() - 1.0);
}

}  // namespace

TEST(Curvature, FlatMetricIsFlat) {
  const auto p = curvature_at<4>(flat_model<4>(), 1e-3, Point<4>{0.2, -0.1, 0.3, 0.05});
  EXPECT_LE(p.riemann.max_abs(), 1e-12);
  EXPECT_LE(std::abs(p.scalar), 1e-12);
  EXPECT_LE(p.weyl.max_abs(), 1e-12);
  EXPECT_LE(max_abs<4>(p.traceless_ricci), 1e-12);
}

TEST(Curvature, HemisphereHasConstantCurvatureOne) {
  for (const auto& x : interior_sample<4>(3, 5)) {
    const auto p = curvature_at<4>(hemisphere_model<4>(), 1e-3, x);
    EXPECT_NEAR(p.scalar, 12.0, 1e-7);
    EXPECT_LE(std::sqrt(p.e_norm2), 1e-7);
    EXPECT_LE(std::sqrt(p.weyl_norm2), 1e-7);
    // sectional curvature +1: g(R(e1, e2) e2, e1) = Riem(e1, e2, e1, e2)
    EXPECT_NEAR(p.riemann(0, 1, 0, 1) / (p.g(0, 0) * p.g(1, 1)), 1.0, 1e-7);
  }
  const auto q = curvature_at<6>(hemisphere_model<6>(), 1e-3, Point<6>{0.1, 0.2, -0.3, 0.1, 0, 0.4});
  EXPECT_NEAR(q.scalar, 30.0, 1e-6);
}

TEST(Curvature, RiemannSymmetries) {
  const auto p = curvature_at<4>(generic_bump_model<4>(5, 0.3), 1e-3, Point<4>{0.3, 0.2, -0.1, 0.4});
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          worst = std::max(worst, std::abs(p.riemann(i, j, k, l) + p.riemann(j, i, k, l)));
          worst = std::max(worst, std::abs(p.riemann(i, j, k, l) - p.riemann(k, l, i, j)));
          worst = std::max(worst, std::abs(p.riemann(i, j, k, l) + p.riemann(j, k, i, l) +
                                           p.riemann(k, i, j, l)));
        }
  EXPECT_LE(worst, 1e-8);
}

TEST(Curvature, ScalarCurvatureOfConformalFactorMatchesClosedForm) {
  // R of phi^2 delta in n = 4 is -6 phi^{-3} Lap_flat phi; phi = 1 + 0.2 r^2 gives
  // Lap phi = 1.6, so R = -9.6 / phi^3.
  const Point<4> x{0.3, 0.1, -0.2, 0.25};
  const double phi = 1.0 + 0.2 * radius_squared<4>(x);
  const auto p = curvature_at<4>(quadratic_factor<4>(), 1e-3, x);
  EXPECT_NEAR(p.scalar, -9.6 / (phi * phi * phi), 1e-7);
}

TEST(Weyl, VanishesOnConformallyFlatMetrics) {
  const auto grid6 = step_grid<6>(1e-3);
  EXPECT_LE(lcf_weyl_residual<6>(hemisphere_model<6>(), grid6, Point<6>{0.3, 0.1, 0, -0.2, 0.1, 0}), 1e-6);
  const auto expo = conformal_metric<4>("exp", [](const Point<4>& x) { return std::exp(0.3 * x[0]); }, false);
  const auto grid4 = step_grid<4>(1e-3);
  for (const auto& x : interior_sample<4>(9, 4)) EXPECT_LE(lcf_weyl_residual<4>(expo, grid4, x), 1e-6);
  for (const char* name : {"hemisphere", "cap(0.6)", "radial_bump(7,0.2)", "geodesic_bump(4,0.2)",
                           "generic_bump(5,0.3)"})
    for (const auto& x : interior_sample<4>(1, 3))
      EXPECT_LE(lcf_weyl_residual<4>(model<4>(name), grid4, x), 1e-6) << name;
}

TEST(Weyl, DetectsNonConformallyFlatMetric) {
  const auto bent = matrix_metric<4>(
      "bent",
      [](const Point<4>& x) {
        Eigen::Matrix4d g = Eigen::Matrix4d::Identity();
        g(1, 1) += 0.1 * x[0] * x[0];
        return g;
      },
      false);
  for (const auto& x : interior_sample<4>(2, 4)) {
    const auto p = curvature_at<4>(bent, 1e-3, x);
    EXPECT_GT(std::sqrt(p.weyl_norm2), 1e-3);
  }
  EXPECT_THROW(lcf_weyl_residual<4>(bent, step_grid<4>(1e-3), Point<4>{}), PreconditionError);
}

TEST(WeylDecomposition, HoldsInDimensionSix) {
  const Point<6> x{0.2, -0.1, 0.3, 0.1, 0.05, -0.2};
  EXPECT_LE(weyl_decomposition_residual_dim6<6>(hemisphere_model<6>(), step_grid<6>(1e-3), x), 1e-6);
  EXPECT_LE(weyl_decomposition_residual_dim6<6>(flat_model<6>(), step_grid<6>(1e-3), x), 1e-12);
  // Any 2-jet of a metric psi * delta has a Riemann tensor of Kulkarni-Nomizu
  // form, so the residual sits at rounding on every step of the ladder.
  const auto expo = conformal_metric<6>(
      "exp", [](const Point<6>& y) { return std::exp(0.3 * y[0] - 0.2 * y[1] * y[2]); }, false);
  for (double h : {0.032, 0.016, 0.008, 1e-3}) {
    EXPECT_LE(weyl_decomposition_residual_dim6<6>(quadratic_factor<6>(), step_grid<6>(h), x), 1e-12);
    EXPECT_LE(weyl_decomposition_residual_dim6<6>(expo, step_grid<6>(h), x), 1e-12);
  }
  EXPECT_THROW(weyl_decomposition_residual_dim6<4>(hemisphere_model<4>(), step_grid<4>(1e-3), Point<4>{}),
               PreconditionError);
}

TEST(LaplaceE, ResolvedSignHoldsAndOppositeSignFails) {
  const Point<4> x{0.3, 0, 0, 0};
  const auto m = quadratic_factor<4>();
  const double right = lcf_laplace_E_residual<4>(m, step_grid<4>(1e-3), x, resolved_laplacian_sign);
  const double wrong = lcf_laplace_E_residual<4>(m, step_grid<4>(1e-3), x, -resolved_laplacian_sign);
  EXPECT_LE(right, 1e-4);
  EXPECT_GE(wrong, 1e-2);
  // refinement drives the resolved residual to zero
  const double coarse = lcf_laplace_E_residual<4>(m, step_grid<4>(4e-3), x, resolved_laplacian_sign);
  EXPECT_LT(right, coarse / 8.0);
}

TEST(LaplaceE, RoundSphereBothSidesVanish) {
  EXPECT_LE(lcf_laplace_E_residual<4>(hemisphere_model<4>(), step_grid<4>(1e-3), Point<4>{0.2, 0.1, 0, 0},
                                      resolved_laplacian_sign),
            1e-6);
}

TEST(LaplaceE, NonRadialModelInBothDimensions) {
  EXPECT_LE(lcf_laplace_E_residual<4>(generic_bump_model<4>(5, 0.3), step_grid<4>(1e-3),
                                      Point<4>{0.2, -0.3, 0.1, 0.2}, resolved_laplacian_sign),
            1e-4);
  EXPECT_LE(lcf_laplace_E_residual<6>(quadratic_factor<6>(), step_grid<6>(1e-3),
                                      Point<6>{0.2, -0.3, 0.1, 0.2, 0, 0.1}, resolved_laplacian_sign),
            1e-4);
}

TEST(LaplaceE, Preconditions) {
  const auto g = step_grid<4>(1e-3);
  EXPECT_THROW(lcf_laplace_E_residual<4>(hemisphere_model<4>(), g, Point<4>{}, 2), PreconditionError);
  EXPECT_THROW(lcf_laplace_E_residual<4>(hemisphere_model<4>(), g, Point<4>{0.999, 0, 0, 0}, -1),
               PreconditionError);
}

TEST(ContractedBianchi, Holds) {
  const Point<4> x{0.3, -0.2, 0.1, 0.2};
  EXPECT_LE(contracted_bianchi_residual<4>(flat_model<4>(), step_grid<4>(1e-3), x), 1e-10);
  EXPECT_LE(contracted_bianchi_residual<4>(hemisphere_model<4>(), step_grid<4>(1e-3), x), 1e-6);
  const auto m = conformal_metric<4>(
      "lin", [](const Point<4>& y) { return 1.0 + 0.1 * y[0] + 0.2 * radius_squared<4>(y); }, false);
  std::vector<double> errs;
  for (double h : {4e-3, 2e-3, 1e-3}) errs.push_back(contracted_bianchi_residual<4>(m, step_grid<4>(h), x));
  EXPECT_LE(errs.back(), 1e-4);
  EXPECT_GE(slope(errs), 2.5);
}

TEST(Models, ClosedFormValuesAndPositivity) {
  EXPECT_DOUBLE_EQ(hemisphere_model<4>().factor(Point<4>{}), 2.0);
  const auto bump = radial_bump_model<4>(7, 0.2);
  const auto grid = build_grid<4>(16, 6, 1e-3, false);
  EXPECT_NO_THROW(validate_metric<4>(bump, grid));
  for (const auto& x : grid.bulk_nodes) EXPECT_GT(bump.factor(x), 0.0);
  EXPECT_THROW(cap_model<4>(1.2), PreconditionError);
}

TEST(Models, RadialModelsAreRotationallySymmetric) {
  const auto m = radial_bump_model<4>(3, 0.2);
  const Point<4> a{0.5, 0, 0, 0}, b{0, 0.3, 0.4, 0};
  EXPECT_DOUBLE_EQ(m.factor(a), m.factor(b));
  EXPECT_THROW(validate_metric<4>(generic_bump_model<4>(5, 0.3), build_grid<4>(8, 4, 1e-3, true)),
               PreconditionError);
}

TEST(Models, ParseModelName) {
  auto p = parse_model_name("radial_bump(7, 0.2)");
  EXPECT_EQ(p.family, "radial_bump");
  ASSERT_EQ(p.params.size(), 2u);
  EXPECT_EQ(p.params[0], 7.0);
  EXPECT_EQ(p.params[1], 0.2);
  EXPECT_EQ(parse_model_name("hemisphere").params.size(), 0u);
  EXPECT_THROW(parse_model_name("cap(0.6"), PreconditionError);
  EXPECT_THROW(parse_model_name("cap(x)"), PreconditionError);
  EXPECT_THROW(model<4>("cap(0.2,0.3)"), PreconditionError);
  EXPECT_THROW(model<4>("torus"), PreconditionError);
  EXPECT_THROW(model<4>("radial_bump(1.5,0.2)"), PreconditionError);
  EXPECT_EQ(model<4>("cap(0.6)").name, "cap(0.6)");
}

TEST(Curvature, DeterministicAcrossCalls) {
  const auto m = generic_bump_model<4>(5, 0.3);
  const Point<4> x{0.1, 0.2, 0.3, -0.4};
  const auto a = curvature_package<4>(m, step_grid<4>(1e-3), x);
  const auto b = curvature_package<4>(m, step_grid<4>(1e-3), x);
  EXPECT_EQ(a.scalar, b.scalar);
  EXPECT_EQ(a.tr_e3, b.tr_e3);
  EXPECT_EQ(a.nabla_e_norm2, b.nabla_e_norm2);
}

TEST(Curvature, StencilOutsideModelDomainThrows) {
  auto m = hemisphere_model<4>();
  m.domain_radius = 1.0;
  EXPECT_THROW(validate_metric<4>(m, build_grid<4>(8, 4, 1e-3, true)), DomainError);
  EXPECT_THROW(curvature_at<4>(m, 1e-3, Point<4>{1.0, 0, 0, 0}), DomainError);
}
