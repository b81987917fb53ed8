#include "conelab/sobolev.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

using namespace conelab;

namespace {
const double kPi = std::numbers::pi;

Bubble euclid(int n, double p, const Cone& k, double lambda = 1.0) {
  return make_bubble(n, p, Norm::euclidean(n), Weight::unit(n), k, lambda);
}

RadialFunction scaled(const RadialFunction& f, double t) {
  return {[f, t](double r) { return t * f.value(r); }, [f, t](double r) { return t * f.derivative(r); }, f.decay};
}
}  // namespace

TEST(Quotient, ScaleInvariance) {
  const Cone full = Cone::full_space(3);
  const SobolevSetting s = make_setting(3, 2.0, Norm::euclidean(3), full, Weight::unit(3));
  const RadialFunction f = radial_function(euclid(3, 2.0, full));
  const double j = quotient(f, s).quotient;
  for (double t : {0.5, 2.0}) EXPECT_NEAR(quotient(scaled(f, t), s).quotient, j, 1e-10 * j);
  for (double lambda : {0.5, 3.0}) {
    EXPECT_NEAR(quotient(euclid(3, 2.0, full, lambda), s).quotient, j, 1e-6 * j);
  }
}

TEST(SharpConstant, ClassicalValueAndIndependentIntegrator) {
  const Cone full = Cone::full_space(3);
  const QuotientResult q = sharp_constant(Norm::euclidean(3), full, Weight::unit(3), 3, 2.0);
  EXPECT_NEAR(q.quotient, 3.0 * std::pow(kPi / 2, 4.0 / 3.0), 1e-8);
  EXPECT_LT(q.quotient_error, 1e-8);

  // Gauss-Kronrod on the same radial integrals.
  const Bubble b = euclid(3, 2.0, full);
  auto gk = [](auto f) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, std::numeric_limits<double>::infinity(),
                                                                         20, 1e-14);
  };
  const double mu = 4 * kPi / 3;
  const double num = 3 * mu * gk([&](double r) { return std::pow(b.profile_d1(r), 2) * r * r; });
  const double den = 3 * mu * gk([&](double r) { return std::pow(b.profile(r), 6) * r * r; });
  EXPECT_NEAR(q.quotient, num / std::pow(den, 1.0 / 3.0), 1e-9);
}

TEST(SharpConstant, HalfSpaceAndConeApertures) {
  for (auto [n, p] : std::vector<std::pair<int, double>>{{3, 2.0}, {4, 3.0}}) {
    const Norm e = Norm::euclidean(n);
    const Weight u = Weight::unit(n);
    const double full = sharp_constant(e, Cone::full_space(n), u, n, p).quotient;
    const double half = sharp_constant(e, Cone::half_space(Vec::Unit(n, n - 1)), u, n, p).quotient;
    // Both integrals halve; the quotient picks up (1/2)^{1 - p/beta} = 2^{-p/n}.
    EXPECT_NEAR(half / full, std::pow(2.0, -p / n), 1e-9);
    const double narrow = sharp_constant(e, Cone::circular(Vec::Unit(n, n - 1), kPi / 4), u, n, p).quotient;
    const double wide = sharp_constant(e, Cone::circular(Vec::Unit(n, n - 1), kPi / 2), u, n, p).quotient;
    const double ratio = spherical_cap_fraction(n, kPi / 4) / spherical_cap_fraction(n, kPi / 2);
    EXPECT_NEAR(narrow / wide, std::pow(ratio, p / n), 1e-9);
  }
}

TEST(SharpConstant, SeparatesQuadratureFromMeasureError) {
  Vec b = Vec::Zero(3);
  b[0] = 0.3;
  const Cone half = Cone::half_space(Vec::Unit(3, 2));
  const QuotientResult q = sharp_constant(Norm::shifted(b), half, Weight::unit(3), 3, 2.5);
  EXPECT_GT(q.measure_error, 0.0);
  EXPECT_LT(q.quadrature_error, 1e-8 * q.quotient);
  EXPECT_DOUBLE_EQ(q.quotient_error, q.quadrature_error + q.measure_error);
}

TEST(SharpConstant, WeightedOrthant) {
  const QuotientResult q = sharp_constant(Norm::euclidean(2), Cone::orthant(2, 1), Weight::monomial(2, {1.0}), 2, 1.5);
  EXPECT_GT(q.quotient, 0.0);
  EXPECT_TRUE(std::isfinite(q.quotient));
}

TEST(Perturbation, BubbleIsCriticalAndLocallyMinimal) {
  const Cone full = Cone::full_space(3);
  const Bubble b = euclid(3, 2.0, full);
  const SobolevSetting s = make_setting(3, 2.0, b.norm(), full, Weight::unit(3));
  const VerificationReport r = perturbation_test(b, full, Weight::unit(3), s);
  EXPECT_TRUE(r.pass());

  const Cone circ = Cone::circular(Vec::Unit(3, 2), kPi / 4);
  const Bubble bc = euclid(3, 2.0, circ);
  const double j0 = translated_quotient(bc, circ, 0.0);
  EXPECT_GT(translated_quotient(bc, circ, 0.2), j0);
  const SobolevSetting sc = make_setting(3, 2.0, bc.norm(), circ, Weight::unit(3));
  EXPECT_TRUE(perturbation_test(bc, circ, Weight::unit(3), sc).pass());
}

TEST(IdentityV, ExamplesAndScaleInvariance) {
  const Cone full = Cone::full_space(3);
  const SobolevSetting s3 = make_setting(3, 2.0, Norm::euclidean(3), full, Weight::unit(3));
  EXPECT_LT(check_identity_v(euclid(3, 2.0, full), s3).max_residual(), 1e-6);
  EXPECT_LT(check_identity_v(euclid(3, 2.0, full, 5.0), s3).max_residual(), 1e-6);
  const Cone half = Cone::half_space(Vec::Unit(4, 3));
  const SobolevSetting s4 = make_setting(4, 2.0, Norm::euclidean(4), half, Weight::unit(4));
  EXPECT_LT(check_identity_v(euclid(4, 2.0, half), s4).max_residual(), 1e-6);
}

TEST(IntegralInequality, BubbleAndNonExtremalProfile) {
  const Cone full = Cone::full_space(3);
  const Bubble b = euclid(3, 2.0, full);
  const SobolevSetting s = make_setting(3, 2.0, b.norm(), full, Weight::unit(3));
  for (double g : {-2.0, -5.0}) EXPECT_TRUE(check_integral_inequality(b, s, g).pass()) << g;
  const IntegralInequality at = integral_inequality(radial_v(b), s, -2.0);
  EXPECT_NEAR(at.value.value, 0.0, 1e-8);
  EXPECT_NEAR(at.newton_slack.value, 0.0, 1e-8);

  // A bump on a quadratic v makes W anisotropic, so Newton's slack turns positive.
  RadialV v;
  v.v = [](double r) { return 1 + r * r + 0.5 * r * r * std::exp(-r * r); };
  v.dv = [](double r) { return 2 * r + r * std::exp(-r * r) * (1 - r * r); };
  v.d2v = [](double r) {
    const double e = std::exp(-r * r);
    return 2 + e * (1 - 5 * r * r + 2 * r * r * r * r);
  };
  v.growth = 2.0;
  const IntegralInequality off = integral_inequality(v, s, -2.0);
  EXPECT_GT(off.newton_slack.value, 1e-4);
  EXPECT_GT(off.value.value, 0.0);
}

TEST(Caccioppoli, SlopeBounds) {
  const Cone full = Cone::full_space(3);
  const Bubble b = euclid(3, 2.0, full);
  const SobolevSetting s = make_setting(3, 2.0, b.norm(), full, Weight::unit(3));
  const std::vector<double> radii = {1, 10, 100, 1e3, 1e4};
  const CaccioppoliResult u0 = caccioppoli_scaling(b, full, s, CaccioppoliKind::u_version, 0.0, radii);
  EXPECT_NEAR(u0.bound, 0.0, 1e-12);
  EXPECT_LE(u0.slope, 0.05);
  const CaccioppoliResult u4 = caccioppoli_scaling(b, full, s, CaccioppoliKind::u_version, -4.0, radii);
  EXPECT_NEAR(u4.bound, 1.0, 1e-12);
  EXPECT_LE(u4.slope, 1.05);
  const CaccioppoliResult v1 = caccioppoli_scaling(b, full, s, CaccioppoliKind::v_version, 1.0, radii);
  EXPECT_NEAR(v1.bound, 5.0, 1e-12);
  EXPECT_LE(v1.slope, 5.05);
  EXPECT_TRUE(check_caccioppoli(b, full, s, CaccioppoliKind::v_version, 1.0, radii).pass());
}
