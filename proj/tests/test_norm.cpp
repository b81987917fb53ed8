#include "conelab/norm.hpp"
#include "conelab/random.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace conelab;

namespace {

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

std::vector<Norm> families(int n) {
  Mat a = Mat::Identity(n, n) * 2.0;
  a(0, 1) = a(1, 0) = 0.5;
  return {Norm::euclidean(n), Norm::quadratic(a), Norm::blend(n, 4.0, 0.5), Norm::shifted(0.3 * Vec::Unit(n, 0))};
}

}  // namespace

TEST(NormEval, Examples) {
  EXPECT_NEAR(Norm::euclidean(2)(v2(3, 4)), 5.0, 1e-15);
  EXPECT_NEAR(Norm::blend(2, 4.0, 1.0)(v2(1, 1)), std::pow(2.0, 0.25), 1e-14);
  const Norm s = Norm::shifted(v2(0.5, 0));
  EXPECT_NEAR(s(v2(1, 0)), 1.5, 1e-15);
  EXPECT_NEAR(s(v2(-1, 0)), 0.5, 1e-15);
  EXPECT_FALSE(s.symmetric());
}

TEST(NormEval, RejectsBadParameters) {
  EXPECT_THROW(Norm::shifted(v2(1.0, 0.0)), InvalidSpec);
  Mat bad = Mat::Identity(2, 2);
  bad(1, 1) = -1.0;
  EXPECT_THROW(Norm::quadratic(bad), InvalidSpec);
  EXPECT_THROW(Norm::euclidean(2)(Vec::Ones(3)), InvalidSpec);
}

TEST(NormGrad, Examples) {
  EXPECT_TRUE(Norm::euclidean(2).gradient(v2(3, 4)).isApprox(v2(0.6, 0.8), 1e-14));
  Mat a = Mat::Zero(2, 2);
  a.diagonal() << 4, 1;
  EXPECT_TRUE(Norm::quadratic(a).gradient(v2(1, 0)).isApprox(v2(2, 0), 1e-14));
  EXPECT_THROW(Norm::euclidean(2).gradient(Vec::Zero(2)), DomainError);
}

TEST(NormGrad, MatchesFiniteDifferences) {
  RandomStream rng(3);
  for (const Norm& h : families(3)) {
    for (int k = 0; k < 20; ++k) {
      const Vec xi = rng.normal_vector(3);
      const double step = 1e-4;
      Vec fd(3);
      for (int j = 0; j < 3; ++j) {
        const Vec e = Vec::Unit(3, j) * step;
        fd[j] = (h(xi + e) - h(xi - e)) / (2 * step);
      }
      EXPECT_LT((fd - h.gradient(xi)).norm(), 1e-6) << to_string(h.family());
    }
  }
}

TEST(NormHess, EuclideanExampleAndRadialNullity) {
  Mat expected = Mat::Zero(2, 2);
  expected(1, 1) = 1.0;
  EXPECT_TRUE(Norm::euclidean(2).hessian(v2(1, 0)).isApprox(expected, 1e-14));
  RandomStream rng(5);
  for (const Norm& h : families(4)) {
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Vec xi = rng.normal_vector(4);
      worst = std::max(worst, (h.hessian(xi) * xi).norm());
    }
    EXPECT_LT(worst, 1e-10) << to_string(h.family());
  }
}

TEST(NormHess, BlendMatchesFiniteDifferences) {
  const Norm h = Norm::blend(3, 4.0, 0.5);
  RandomStream rng(9);
  for (int k = 0; k < 20; ++k) {
    const Vec xi = rng.normal_vector(3);
    const double step = 1e-4;
    Mat fd(3, 3);
    for (int j = 0; j < 3; ++j) {
      const Vec e = Vec::Unit(3, j) * step;
      fd.col(j) = (h.gradient(xi + e) - h.gradient(xi - e)) / (2 * step);
    }
    EXPECT_LT((fd - h.hessian(xi)).norm(), 1e-6);
  }
}

TEST(NormDual, Examples) {
  EXPECT_NEAR(Norm::euclidean(2).dual(v2(3, 4)), 5.0, 1e-14);
  EXPECT_NEAR(Norm::blend(2, 4.0, 1.0).dual(v2(1, 1)), std::pow(2.0, 0.75), 1e-10);
}

TEST(NormDual, BlendAgreesWithBruteForce) {
  const Norm h = Norm::blend(2, 4.0, 0.5);
  RandomStream rng(11);
  for (int k = 0; k < 5; ++k) {
    const Vec zeta = rng.normal_vector(2);
    double best = -1e300;
    const int m = 1'000'000;
    for (int i = 0; i < m; ++i) {
      const double t = 2.0 * M_PI * i / m;
      const Vec xi = v2(std::cos(t), std::sin(t));
      best = std::max(best, zeta.dot(xi) / h(xi));
    }
    EXPECT_NEAR(h.dual(zeta), best, 1e-9 * std::max(1.0, best));
    EXPECT_NEAR(h.dual_search(zeta).value, best, 1e-8 * std::max(1.0, best));
  }
}

TEST(NormDual, IdentitiesHoldForEveryFamily) {
  RandomStream rng(13);
  for (const Norm& h : families(3)) {
    for (int k = 0; k < 200; ++k) {
      const Vec xi = rng.normal_vector(3) * rng.uniform(0.1, 10.0);
      EXPECT_NEAR(h.dual(h.gradient(xi)), 1.0, 1e-10);
      EXPECT_TRUE(h.legendre_partner(h.value(xi) * h.gradient(xi)).isApprox(xi, 1e-9));
    }
  }
}

TEST(NormAMap, Examples) {
  const Norm h = Norm::euclidean(2);
  EXPECT_TRUE(h.a_map(2.0, v2(1, 2)).isApprox(v2(1, 2), 1e-15));
  EXPECT_TRUE(h.a_map(3.0, v2(3, 4)).isApprox(v2(15, 20), 1e-14));
  EXPECT_EQ(h.a_map(1.5, Vec::Zero(2)).norm(), 0.0);
}

TEST(NormAMap, JacobianMatchesFiniteDifferences) {
  RandomStream rng(17);
  for (const Norm& h : families(3)) {
    for (double p : {1.5, 3.0}) {
      const Vec xi = rng.normal_vector(3);
      Mat fd(3, 3);
      const double step = 1e-5;
      for (int j = 0; j < 3; ++j) {
        const Vec e = Vec::Unit(3, j) * step;
        fd.col(j) = (h.a_map(p, xi + e) - h.a_map(p, xi - e)) / (2 * step);
      }
      EXPECT_LT((fd - h.a_jacobian(p, xi)).norm(), 1e-6);
    }
  }
}

TEST(NormGauge, ReflectionAndGradientOfRadialFunctions) {
  const Norm h = Norm::shifted(0.4 * Vec::Unit(3, 1));
  RandomStream rng(19);
  for (int k = 0; k < 50; ++k) {
    const Vec y = rng.normal_vector(3);
    EXPECT_NEAR(h.reflected()(y), h(-y), 1e-15);
    // u decreasing in rho has grad u = -|u'| grad rho, and H(-grad rho) = 1.
    EXPECT_NEAR(h(-h.gauge_gradient(y)), 1.0, 1e-10);
  }
}

TEST(NormEllipticity, Examples) {
  const auto e = Norm::euclidean(3).check_ellipticity(500);
  EXPECT_NEAR(e.lambda_min, 1.0, 1e-10);
  EXPECT_NEAR(e.lambda_max, 1.0, 1e-10);
  EXPECT_TRUE(e.pass);

  Mat a(2, 2);
  a << 3, 1, 1, 2;
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  const auto q = Norm::quadratic(a).check_ellipticity(2000);
  // D^2(H^2)/2 = A for every xi.
  EXPECT_NEAR(q.lambda_min, es.eigenvalues()[0], 1e-10);
  EXPECT_NEAR(q.lambda_max, es.eigenvalues()[1], 1e-10);
  EXPECT_TRUE(q.pass);

  EXPECT_FALSE(Norm::blend(3, 4.0, 1.0).check_ellipticity(2000).pass);
}
