#include "conelab/transport.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace conelab;

namespace {

struct Case {
  int n;
  double p;
  Cone cone;
};

SobolevSetting setting(const Case& c) {
  return make_setting(c.n, c.p, Norm::euclidean(c.n), c.cone, Weight::unit(c.n));
}

RadialFunction bubble_function(const Case& c, double lambda) {
  return radial_function(
      make_bubble(c.n, c.p, Norm::euclidean(c.n), Weight::unit(c.n), c.cone, lambda));
}

bool all_equalities_tight(const ChainReport& r) {
  for (const auto& row : r.rows)
    if (row.equality && !row.pass) return false;
  return true;
}

}  // namespace

TEST(RadialTransport, IdentityAndDilation) {
  const Case c{3, 2.0, Cone::full_space(3)};
  const SobolevSetting s = setting(c);
  const RadialFunction f = normalized(bubble_function(c, 1.0), s);
  const RadialFunction g = normalized(bubble_function(c, 2.0), s);
  const RadialTransport same(RadialDensity::from_profile(f, s), RadialDensity::from_profile(f, s));
  const RadialTransport dil(RadialDensity::from_profile(f, s), RadialDensity::from_profile(g, s));
  for (double r : {1e-3, 0.1, 1.0, 7.0, 1e3}) {
    EXPECT_NEAR(same.psi(r), r, 1e-9 * r);
    EXPECT_NEAR(same.dpsi(r), 1.0, 1e-7);
    EXPECT_NEAR(dil.psi(r), 2.0 * r, 1e-9 * r);
    EXPECT_NEAR(dil.dpsi(r), 2.0, 1e-7);
  }
  EXPECT_LT(dil.pushforward_residual(), 1e-10);
  const Vec y = Vec::Unit(3, 0) * 0.7;
  EXPECT_TRUE(dil.map(y, Norm::euclidean(3)).isApprox(2.0 * y, 1e-9));
}

TEST(RadialTransport, GaussianTargetAgreesWithCdfOracle) {
  const Case c{3, 2.0, Cone::full_space(3)};
  const SobolevSetting s = setting(c);
  const RadialFunction f = normalized(bubble_function(c, 1.0), s);
  const RadialFunction g = normalized(gaussian_function(), s);
  const RadialTransport t(RadialDensity::from_profile(f, s), RadialDensity::from_profile(g, s));
  EXPECT_LT(t.pushforward_residual(), 1e-10);
  // CDF of u^6 r^2 for u = exp(-r^2): normalized incomplete gamma.
  for (double r : {0.2, 0.8, 2.0}) {
    const double psi = t.psi(r);
    const double target = std::erf(std::sqrt(6.0) * psi) - 2 * std::sqrt(6.0 / std::numbers::pi) * psi *
                                                                std::exp(-6 * psi * psi);
    EXPECT_NEAR(target, t.source().cdf(r), 1e-9);
  }
  for (double r = 0.01; r < 10; r *= 1.3) EXPECT_GT(t.dpsi(r), 0.0);
}

TEST(RadialTransport, MassMismatchIsRejected) {
  const Case c{3, 2.0, Cone::full_space(3)};
  const SobolevSetting s = setting(c);
  const RadialFunction f = normalized(bubble_function(c, 1.0), s);
  RadialFunction twice = f;
  twice.value = [f](double r) { return 2.0 * f.value(r); };
  EXPECT_THROW(RadialTransport(RadialDensity::from_profile(f, s), RadialDensity::from_profile(twice, s)),
               InvalidSpec);
}

TEST(Chain, TightForDilationsAndStrictForGaussian) {
  for (const Case& c : {Case{3, 2.0, Cone::full_space(3)}, Case{3, 2.0, Cone::half_space(Vec::Unit(3, 2))},
                        Case{4, 3.0, Cone::circular(Vec::Unit(4, 3), std::numbers::pi / 4)}}) {
    const SobolevSetting s = setting(c);
    const Norm h = Norm::euclidean(c.n);
    const RadialFunction f = normalized(bubble_function(c, 1.0), s);
    ChainOptions tight;
    tight.expect = ChainExpectation::tight;
    const ChainReport id = check_chain(f, f, s, h, c.cone, tight);
    EXPECT_TRUE(id.pass()) << c.cone.describe();
    const ChainReport dil = check_chain(f, normalized(bubble_function(c, 2.0), s), s, h, c.cone, tight);
    EXPECT_TRUE(dil.pass()) << c.cone.describe();

    ChainOptions strict;
    strict.expect = ChainExpectation::strict;
    const ChainReport gauss = check_chain(f, normalized(gaussian_function(), s), s, h, c.cone, strict);
    EXPECT_TRUE(gauss.pass()) << c.cone.describe();
    EXPECT_TRUE(all_equalities_tight(gauss));
    EXPECT_GT(gauss.rows.back().slack, 0.0);
  }
}

TEST(Chain, WeightedQuarterPlane) {
  const Cone k = Cone::orthant(2, 1);
  const Weight w = Weight::monomial(2, {1.0});
  const SobolevSetting s = make_setting(2, 1.5, Norm::euclidean(2), k, w);
  const RadialFunction f = normalized(radial_function(make_bubble(2, 1.5, Norm::euclidean(2), w, k)), s);
  ChainOptions strict;
  strict.expect = ChainExpectation::strict;
  EXPECT_TRUE(check_chain(f, normalized(gaussian_function(), s), s, Norm::euclidean(2), k, strict).pass());
}

TEST(WeightConcavity, Examples) {
  const Weight w1 = Weight::monomial(2, {1.0});
  Vec x(2), t(2);
  x << 2.0, 1.0;
  t << 3.0, -1.0;
  // a = 1: the inequality reads T_1 / x_1 <= T_1 / x_1.
  const VerificationReport r1 = check_weight_concavity_step(w1, {{x, t}});
  EXPECT_TRUE(r1.pass());
  EXPECT_NEAR(r1.rows.front().residual, 0.0, 1e-14);

  const Weight w2 = Weight::monomial(3, {1.0, 1.0});
  Vec x3(3), t3(3);
  x3 << 2.0, 3.0, 0.0;
  t3 << 4.0, 6.0, 1.0;  // T_1 / x_1 = T_2 / x_2: AM-GM equality
  EXPECT_NEAR(check_weight_concavity_step(w2, {{x3, t3}}).rows.front().residual, 0.0, 1e-13);
  t3 << 1.0, 6.0, 1.0;
  EXPECT_TRUE(check_weight_concavity_step(w2, {{x3, t3}}).pass());

  RandomStream rng(12);
  const Weight w3 = Weight::monomial(4, {0.5, 2.0, 1.3});
  EXPECT_TRUE(check_weight_concavity_step(w3, sample_weight_pairs(w3, 10000, rng)).pass());
}
