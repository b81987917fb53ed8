#include "conelab/cone.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace conelab;

namespace {
Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}
const double kPi = std::numbers::pi;
}  // namespace

TEST(ConeContains, Examples) {
  EXPECT_FALSE(Cone::half_space(Vec::Unit(3, 2)).contains(vec({1, 0, -1})));
  EXPECT_TRUE(Cone::orthant(2, 2).contains(vec({1, 2})));
  const Cone c = Cone::circular(Vec::Unit(3, 2), kPi / 4);
  EXPECT_TRUE(c.contains(vec({0, 0, 1})));
  EXPECT_FALSE(c.contains(vec({1, 0, 0})));
  EXPECT_TRUE(Cone::full_space(3).contains(vec({-5, 1, 2})));
}

TEST(ConeContains, ProductFreeFactor) {
  const Cone c = Cone::product(1, Cone::orthant(2, 2));
  EXPECT_EQ(c.dim(), 3);
  EXPECT_TRUE(c.contains(vec({-7, 1, 2})));
  EXPECT_FALSE(c.contains(vec({0, -1, 2})));
  EXPECT_EQ(c.lineality_dim(), 1);
}

TEST(ConeNormal, Examples) {
  EXPECT_TRUE(Cone::half_space(Vec::Unit(3, 2)).normal_at(vec({1, 0, 0})).isApprox(-Vec::Unit(3, 2)));
  const Cone c = Cone::circular(Vec::Unit(3, 2), kPi / 4);
  const Vec x = vec({1, 0, 1}) / std::sqrt(2.0);
  const Vec nu = c.normal_at(x);
  EXPECT_NEAR(nu.norm(), 1.0, 1e-14);
  EXPECT_NEAR(nu.dot(x), 0.0, 1e-14);
  EXPECT_GT(nu[0], 0.0);
  EXPECT_TRUE(Cone::orthant(2, 2).normal_at(vec({1, 0})).isApprox(vec({0, -1})));
}

TEST(ConeNormal, RejectsNonSmoothPoints) {
  EXPECT_THROW(Cone::half_space(Vec::Unit(3, 2)).normal_at(Vec::Zero(3)), DomainError);
  EXPECT_THROW(Cone::orthant(3, 2).normal_at(vec({0, 0, 1})), DomainError);
  EXPECT_THROW(Cone::full_space(3).normal_at(vec({1, 0, 0})), DomainError);
  EXPECT_THROW(Cone::half_space(Vec::Unit(3, 2)).normal_at(vec({1, 0, 1})), DomainError);
}

TEST(ConeSampling, BoundaryPointsAreSmoothAndDirectionsInside) {
  RandomStream rng(2);
  for (const Cone& c : {Cone::half_space(Vec::Unit(3, 2)), Cone::orthant(3, 2),
                        Cone::circular(Vec::Unit(3, 2), kPi / 4)}) {
    for (int k = 0; k < 100; ++k) {
      const Vec b = c.sample_boundary_point(rng);
      EXPECT_NEAR(c.boundary_distance(b), 0.0, 1e-12);
      EXPECT_NO_THROW(c.normal_at(b));
      EXPECT_TRUE(c.contains(c.sample_direction(rng, 0.05)));
    }
  }
}

TEST(ConeLineality, AdmissibleCentres) {
  EXPECT_TRUE(Cone::full_space(3).admissible_center(vec({1, 2, 3})));
  const Cone h = Cone::half_space(Vec::Unit(3, 2));
  EXPECT_TRUE(h.admissible_center(vec({1, 2, 0})));
  EXPECT_FALSE(h.admissible_center(vec({1, 2, 0.5})));
  EXPECT_TRUE(h.project_to_lineality(vec({1, 2, 0.5})).isApprox(vec({1, 2, 0})));
  EXPECT_EQ(Cone::circular(Vec::Unit(3, 2), kPi / 4).lineality_dim(), 0);
}

TEST(ConeValidation, RejectsBadParameters) {
  EXPECT_THROW(Cone::circular(Vec::Unit(3, 2), 0.0), InvalidSpec);
  EXPECT_THROW(Cone::circular(Vec::Unit(3, 2), 2.0), InvalidSpec);
  EXPECT_THROW(Cone::orthant(2, 3), InvalidSpec);
  EXPECT_THROW(Cone::half_space(Vec::Zero(3)), InvalidSpec);
}

TEST(Weight, MonomialValueGradientAndCompatibility) {
  const Weight w = Weight::monomial(3, {1.0, 2.0});
  EXPECT_DOUBLE_EQ(w.degree(), 3.0);
  EXPECT_NEAR(w.value(vec({2, 3, 5})), 18.0, 1e-14);
  EXPECT_TRUE(w.gradient(vec({2, 3, 5})).isApprox(vec({9, 12, 0})));
  EXPECT_TRUE(w.compatible_with(Cone::orthant(3, 2)));
  EXPECT_FALSE(w.compatible_with(Cone::orthant(3, 1)));
  EXPECT_FALSE(w.compatible_with(Cone::full_space(3)));
  EXPECT_TRUE(Weight::unit(3).is_unit());
}

TEST(SectorMeasure, ClosedForms) {
  const Norm e = Norm::euclidean(3);
  const Weight u = Weight::unit(3);
  EXPECT_NEAR(*sector_measure_exact(Cone::full_space(3), e, u), 4 * kPi / 3, 1e-13);
  EXPECT_NEAR(*sector_measure_exact(Cone::half_space(Vec::Unit(3, 2)), e, u), 2 * kPi / 3, 1e-13);
  EXPECT_NEAR(*sector_measure_exact(Cone::circular(Vec::Unit(3, 2), kPi / 4), e, u),
              2 * kPi / 3 * (1 - std::sqrt(2.0) / 2), 1e-13);
  EXPECT_NEAR(spherical_cap_fraction(3, kPi / 2), 0.5, 1e-14);
  EXPECT_NEAR(unit_ball_volume(4), kPi * kPi / 2, 1e-13);
}

TEST(SectorMeasure, MonteCarloAgreesWithClosedForm) {
  const Norm e = Norm::euclidean(3);
  for (const Cone& c : {Cone::full_space(3), Cone::half_space(Vec::Unit(3, 2)),
                        Cone::circular(Vec::Unit(3, 2), kPi / 4)}) {
    const double exact = *sector_measure_exact(c, e, Weight::unit(3));
    const SectorMeasure mc = sector_measure_mc(c, e, Weight::unit(3));
    EXPECT_FALSE(mc.exact);
    EXPECT_NEAR(mc.value, exact, 4.0 * mc.std_error + 1e-12 * exact) << c.describe();
  }
}

TEST(SectorMeasure, CapSamplingForCircularCones) {
  // Euclidean gauge is constant on the cap, so every draw is the same.
  const SectorMeasure e = sector_measure_mc(Cone::circular(Vec::Unit(6, 5), 0.3), Norm::euclidean(6), Weight::unit(6));
  EXPECT_NEAR(e.value, unit_ball_volume(6) * spherical_cap_fraction(6, 0.3), 1e-12 * e.value);

  // A cap of aperture pi/2 is a half space: compare with the stratified estimator.
  const Norm h = Norm::shifted(vec({0.2, -0.1, 0.3, 0.0}));
  const SectorMeasure cap = sector_measure_mc(Cone::circular(Vec::Unit(4, 3), kPi / 2), h, Weight::unit(4));
  const SectorMeasure half = sector_measure_mc(Cone::half_space(Vec::Unit(4, 3)), h, Weight::unit(4));
  EXPECT_NEAR(cap.value, half.value, 4.0 * std::hypot(cap.std_error, half.std_error));
}

TEST(SectorMeasure, QuadraticNormScalesByDeterminant) {
  Mat a(3, 3);
  a << 2, 0.5, 0, 0.5, 2, 0.5, 0, 0.5, 2;
  // {H0 <= 1} is the ellipsoid {x^T A^{-1} x <= 1} of volume sqrt(det A) |B|.
  const auto m = sector_measure(Cone::full_space(3), Norm::quadratic(a), Weight::unit(3));
  EXPECT_NEAR(m.value, std::sqrt(a.determinant()) * 4 * kPi / 3, 1e-10 * m.value + 4 * m.std_error);
}
