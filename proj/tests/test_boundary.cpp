#include <gtest/gtest.h>

#include <cmath>

#include "hemi/boundary.hpp"
#include "hemi/models.hpp"
#include "hemi/verify.hpp"

using namespace hemi;

namespace {

template <int N>
BallGrid<N> step_grid(double h) {
  return build_grid<N>(4, 4, h, true);
}

const auto unit_nodes4 = boundary_sample<4>(7, 4);

}  // namespace

TEST(Boundary, FlatBallIntegrandIsTwo) {
  const auto grid = build_grid<4>(4, 6, 1e-3, false);
  for (const auto& x : grid.boundary_nodes) {
    const auto b = boundary_package<4>(flat_model<4>(), grid, x);
    EXPECT_NEAR(b.gauss_bonnet_integrand, 2.0, 1e-8);
    EXPECT_NEAR(b.h_mean, 1.0, 1e-10);
    EXPECT_LE(b.umbilicity_residual, 1e-10);
  }
}

TEST(Boundary, HemisphereEquatorIsTotallyGeodesic) {
  const auto grid = step_grid<4>(1e-3);
  for (const auto& x : unit_nodes4) {
    const auto b = boundary_package<4>(hemisphere_model<4>(), grid, x);
    EXPECT_LE(std::sqrt(b.s_norm2), 1e-7);
    EXPECT_NEAR(b.gauss_bonnet_integrand, 0.0, 1e-7);
    EXPECT_NEAR(b.area_density, 1.0, 1e-12);
  }
}

TEST(Boundary, CapIsUmbilicWithClosedFormMeanCurvature) {
  const auto grid = step_grid<4>(1e-3);
  const double expected = 1.0 / std::tan(2.0 * std::atan(0.5));
  for (const auto& x : unit_nodes4) {
    const auto b = boundary_package<4>(cap_model<4>(0.5), grid, x);
    EXPECT_LE(b.umbilicity_residual, 1e-7);
    EXPECT_NEAR(b.h_mean, expected, 1e-6);
  }
}

TEST(Boundary, UmbilicityIsConformallyInvariant) {
  const auto grid = step_grid<4>(1e-3);
  for (const char* name : {"generic_bump(5,0.3)", "radial_bump(7,0.2)", "geodesic_bump(4,0.2)"})
    for (const auto& x : unit_nodes4)
      EXPECT_LE(boundary_package<4>(model<4>(name), grid, x).umbilicity_residual, 1e-7) << name;
}

TEST(Boundary, PackageRejectsInteriorNode) {
  EXPECT_THROW(boundary_package<4>(flat_model<4>(), step_grid<4>(1e-3), Point<4>{0.5, 0, 0, 0}),
               PreconditionError);
}

TEST(Codazzi, HoldsOnFlatAndRoundModels) {
  for (const auto& x : unit_nodes4) {
    // the flat residual is order-4 truncation of the radial normal field
    EXPECT_LE(codazzi_residual<4>(flat_model<4>(), step_grid<4>(5e-4), x), 1e-8);
    EXPECT_LE(codazzi_residual<4>(hemisphere_model<4>(), step_grid<4>(1e-3), x), 1e-7);
  }
}

TEST(Codazzi, ConvergesOnRadialBump) {
  const auto m = radial_bump_model<4>(7, 0.1);
  const auto& x = unit_nodes4[0];
  std::vector<double> errs;
  for (double h : {0.016, 0.008, 0.004}) errs.push_back(codazzi_residual<4>(m, step_grid<4>(h), x));
  EXPECT_LE(codazzi_residual<4>(m, step_grid<4>(1e-3), x), 1e-4);
  EXPECT_GE(std::log2(errs.front() / errs.back()) / 2.0, 2.5);
}

TEST(Codazzi, OppositePairingFailsOnNonRadialModel) {
  const auto m = generic_bump_model<4>(5, 0.3);
  for (const auto& x : unit_nodes4) {
    const double right = codazzi_residual<4>(m, step_grid<4>(1e-3), x, 1);
    const double wrong = codazzi_residual<4>(m, step_grid<4>(1e-3), x, -1);
    EXPECT_LE(right, 1e-6);
    EXPECT_GE(wrong, 1e-2);
  }
  EXPECT_THROW(codazzi_residual<4>(m, step_grid<4>(1e-3), unit_nodes4[0], 0), PreconditionError);
}

TEST(NormalRicci, VanishesOnRoundAndFlatModels) {
  const auto nodes = boundary_sample<6>(3, 3);
  for (const auto& x : nodes) {
    EXPECT_EQ(normal_ricci_product<6>(flat_model<6>(), step_grid<6>(1e-3), x), 0.0);
    EXPECT_LE(std::abs(normal_ricci_product<6>(hemisphere_model<6>(), step_grid<6>(1e-3), x)), 1e-4);
  }
  // truncation decays at order 4 above the rounding floor
  const double a = std::abs(normal_ricci_product<6>(hemisphere_model<6>(), step_grid<6>(8e-3), nodes[0]));
  const double b = std::abs(normal_ricci_product<6>(hemisphere_model<6>(), step_grid<6>(4e-3), nodes[0]));
  EXPECT_GE(std::log2(a / b), 3.5);
}

TEST(NormalRicci, RadialBumpIsNonzeroAndStable) {
  const auto m = radial_bump_model<6>(3, 0.1);
  const auto x = boundary_sample<6>(3, 1)[0];
  const double v = normal_ricci_product<6>(m, step_grid<6>(1e-3), x);
  const double half = normal_ricci_product<6>(m, step_grid<6>(5e-4), x);
  EXPECT_GT(std::abs(v), 1.0);
  EXPECT_NEAR(v, half, 1e-4 * std::abs(v));
}

TEST(EFlux, NeedsGradients) {
  const auto b = boundary_package<4>(hemisphere_model<4>(), step_grid<4>(1e-3), unit_nodes4[0]);
  EXPECT_THROW(e_flux<4>(b), PreconditionError);
}

TEST(EFlux, VanishesOnHemisphere) {
  auto b = boundary_package<6>(hemisphere_model<6>(), step_grid<6>(1e-3), boundary_sample<6>(1, 1)[0]);
  attach_gradients<6>(b.curvature, hemisphere_model<6>(), StepPolicy::from_fd_step(1e-3));
  const auto [half_dn, en] = e_flux_terms<6>(b);
  EXPECT_LE(std::abs(half_dn), 1e-6);
  EXPECT_LE(std::abs(en), 1e-6);
}
