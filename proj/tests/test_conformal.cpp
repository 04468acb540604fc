#include <gtest/gtest.h>

#include <cmath>

#include "hemi/conformal.hpp"
#include "hemi/models.hpp"
#include "hemi/verify.hpp"

using namespace hemi;

namespace {

template <int N>
BallGrid<N> step_grid(double h) {
  return build_grid<N>(4, 4, h, true);
}

template <int N>
ConformalFactor<N> round_factor_f() {
  return {[](const Point<N>& x) { return round_factor<N>(x); }, true, "round"};
}

template <int N>
ConformalFactor<N> damped() {
  return ConformalFactor<N>::from_exponent(
      [](const Point<N>& x) { return 0.1 * (1.0 - radius_squared<N>(x)); }, true, "damped");
}

const Resolution res{};

}  // namespace

TEST(Rescale, UnitFactorIsIdentity) {
  const auto m = generic_bump_model<4>(5, 0.3);
  const auto r = rescale<4>(m, ConformalFactor<4>::constant(1.0));
  for (const auto& x : interior_sample<4>(1, 4)) EXPECT_EQ(r.factor(x), m.factor(x));
  EXPECT_FALSE(r.rotationally_symmetric);
}

TEST(Rescale, FlatTimesRoundFactorIsHemisphere) {
  const auto r = rescale<4>(flat_model<4>(), round_factor_f<4>());
  const auto h = hemisphere_model<4>();
  for (const auto& x : interior_sample<4>(2, 4)) EXPECT_DOUBLE_EQ(r.factor(x), h.factor(x));
  EXPECT_TRUE(r.rotationally_symmetric);
}

TEST(Rescale, MatrixMetricsScalePointwise) {
  const auto m = matrix_metric<4>(
      "flat_matrix", [](const Point<4>&) { return Eigen::Matrix4d::Identity().eval(); }, true);
  const auto r = rescale<4>(m, round_factor_f<4>());
  const Point<4> x{0.3, 0.1, 0, 0.2};
  const auto p = curvature_at<4>(r, 1e-3, x);
  EXPECT_NEAR(p.scalar, 12.0, 1e-7);
}

TEST(Rescale, NonPositiveFactorIsReported) {
  const ConformalFactor<4> bad{[](const Point<4>& x) { return x[0]; }, false, "x1"};
  const auto r = rescale<4>(flat_model<4>(), bad);
  EXPECT_THROW(r.factor(Point<4>{-0.5, 0, 0, 0}), NumericalError);
}

TEST(Rescale, DampedHemisphereHasNonConstantScalar) {
  const auto m = rescale<4>(hemisphere_model<4>(), damped<4>());
  double worst = 0.0;
  for (const auto& x : interior_sample<4>(3, 6)) worst = std::max(worst, std::abs(curvature_at<4>(m, 1e-3, x).scalar - 12.0));
  EXPECT_GT(worst, 0.1);
}

TEST(ScalarTransform, LawHolds) {
  const Point<4> x{0.2, -0.3, 0.1, 0.25};
  EXPECT_LE(scalar_transform_residual<4>(hemisphere_model<4>(), ConformalFactor<4>::constant(1.0),
                                         step_grid<4>(1e-3), x),
            1e-9);
  EXPECT_LE(scalar_transform_residual<4>(flat_model<4>(), round_factor_f<4>(), step_grid<4>(1e-3), x), 1e-6);
  const auto rescaled = rescale<4>(flat_model<4>(), round_factor_f<4>());
  EXPECT_NEAR(curvature_at<4>(rescaled, 1e-3, x).scalar, 12.0, 1e-6);

  const ConformalFactor<4> quad{[](const Point<4>& y) { return 1.0 + 0.2 * radius_squared<4>(y); }, true, "quad"};
  const auto bump = generic_bump_model<4>(5, 0.3);
  std::vector<double> errs;
  for (double h : {0.016, 0.008, 0.004}) errs.push_back(scalar_transform_residual<4>(bump, quad, step_grid<4>(h), x));
  EXPECT_LE(scalar_transform_residual<4>(flat_model<4>(), quad, step_grid<4>(1e-3), x), 1e-5);
  EXPECT_GE(std::log2(errs.front() / errs.back()) / 2.0, 2.5);
  EXPECT_THROW(scalar_transform_residual<6>(flat_model<6>(), ConformalFactor<6>::constant(1.0),
                                            step_grid<6>(1e-3), Point<6>{}),
               PreconditionError);
}

TEST(MeanCurvatureTransform, LawHolds) {
  const auto nodes = boundary_sample<4>(4, 3);
  for (const auto& x : nodes) {
    EXPECT_LE(mean_curvature_transform_residual<4>(cap_model<4>(0.7), ConformalFactor<4>::constant(1.0),
                                                   step_grid<4>(1e-3), x),
              1e-9);
    EXPECT_LE(mean_curvature_transform_residual<4>(flat_model<4>(), round_factor_f<4>(), step_grid<4>(1e-3), x),
              1e-9);
    const auto b = boundary_package<4>(rescale<4>(flat_model<4>(), round_factor_f<4>()), step_grid<4>(1e-3), x);
    EXPECT_NEAR(b.h_mean, 0.0, 1e-9);
    const auto f = seeded_factor<4>(11, 0, 0.2);
    EXPECT_LE(mean_curvature_transform_residual<4>(cap_model<4>(0.7), f, step_grid<4>(1e-3), x), 1e-5);
  }
}

TEST(F2, HemisphereAndFlatBall) {
  const auto g = grid_for<4>(hemisphere_model<4>(), res);
  EXPECT_NEAR(f2_invariant<4>(hemisphere_model<4>(), g), 2.0 * pi * pi, 1e-6);
  EXPECT_NEAR(volume<4>(hemisphere_model<4>(), g), 4.0 * pi * pi / 3.0, 1e-8);
  const auto flat = f2_parts<4>(flat_model<4>(), grid_for<4>(flat_model<4>(), res));
  EXPECT_NEAR(flat.bulk, 0.0, 1e-12);
  EXPECT_NEAR(flat.bulk + flat.boundary, 2.0 * pi * pi, 1e-8);
}

TEST(F2, ConformallyInvariant) {
  const auto m = rescale<4>(hemisphere_model<4>(), damped<4>());
  EXPECT_NEAR(f2_invariant<4>(m, grid_for<4>(m, res)), 2.0 * pi * pi, 1e-4);
  const auto g = rescale<4>(hemisphere_model<4>(), seeded_factor<4>(3, 1, 0.2));
  EXPECT_FALSE(g.rotationally_symmetric);
  const Resolution coarse{24, 10, 1e-3, 2048, 1};
  EXPECT_NEAR(f2_invariant<4>(g, grid_for<4>(g, coarse)), 2.0 * pi * pi, 1e-4 * 2.0 * pi * pi);
}

TEST(Yamabe, HemisphereConstants) {
  const auto g4 = grid_for<4>(hemisphere_model<4>(), res);
  EXPECT_NEAR(yamabe_quotient<4>(hemisphere_model<4>(), g4), 8.0 * pi * std::sqrt(3.0), 1e-6);
  const auto g6 = grid_for<6>(hemisphere_model<6>(), res);
  EXPECT_NEAR(yamabe_quotient<6>(hemisphere_model<6>(), g6), 30.0 * std::cbrt(8.0 * pi * pi * pi / 15.0), 1e-6);
}

TEST(Yamabe, FlatBallRejected) {
  EXPECT_THROW(yamabe_quotient<4>(flat_model<4>(), grid_for<4>(flat_model<4>(), res)), PreconditionError);
  EXPECT_NEAR(max_boundary_mean_curvature<4>(flat_model<4>(), grid_for<4>(flat_model<4>(), res)), 1.0, 1e-9);
}
