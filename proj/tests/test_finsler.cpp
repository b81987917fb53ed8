#include "conelab/finsler.hpp"

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

FunctionField paraboloid(int n) {
  return FunctionField(
      n, [](const Vec& x) { return 0.5 * x.squaredNorm(); }, [](const Vec& x) { return Vec(x); },
      [n](const Vec&) { return Mat(Mat::Identity(n, n)); });
}
}  // namespace

TEST(FinslerLaplacian, Examples) {
  const Norm e = Norm::euclidean(3);
  EXPECT_NEAR(finsler_p_laplacian(paraboloid(3), e, 2.0, vec({0.3, -1, 2}), 1e-3), 3.0, 1e-6);
  const FunctionField linear(3, [](const Vec& x) { return x[0]; });
  EXPECT_NEAR(finsler_p_laplacian(linear, e, 3.0, vec({0.3, -1, 2}), 1e-3), 0.0, 1e-9);
}

TEST(FinslerLaplacian, DegenerateGradientIsRejected) {
  EXPECT_THROW(finsler_p_laplacian(paraboloid(3), Norm::euclidean(3), 1.5, Vec::Zero(3), 1e-3), DomainError);
}

TEST(PdeResidual, BubbleSolvesEquation) {
  const Norm e = Norm::euclidean(3);
  const Cone full = Cone::full_space(3);
  const Bubble b = make_bubble(3, 2.0, e, Weight::unit(3), full);
  const double h = 1e-3;
  const Vec x = vec({1, 0, 0});
  const double lap = finsler_p_laplacian(BubbleField(b), e, 2.0, x, h);
  EXPECT_NEAR(lap, -std::pow(b.value(x), 5), 10 * h * h);
  EXPECT_LT(std::abs(pde_residual(b, full, vec({1, 1, 0}), h)), 10 * h * h);
  const double r1 = pde_residual(b, full, vec({1, 1, 0}), h);
  const double r2 = pde_residual(b, full, vec({1, 1, 0}), h / 2);
  EXPECT_GT(r1 / r2, 3.5);
  EXPECT_LT(r1 / r2, 4.5);

  BubbleParams off = b.params();
  off.c *= 1.01;
  EXPECT_GT(std::abs(pde_residual(Bubble(off, e), full, vec({1, 1, 0}), h)), 1e-3);
}

TEST(PdeResidual, QuadraticNorm) {
  Mat a(3, 3);
  a << 2, 0.5, 0, 0.5, 2, 0.5, 0, 0.5, 1;
  const Cone full = Cone::full_space(3);
  const Bubble b = make_bubble(3, 2.0, Norm::quadratic(a), Weight::unit(3), full);
  RandomStream rng(1);
  for (int k = 0; k < 20; ++k) {
    const Vec x = rng.unit_vector(3) * rng.uniform(1.0, 3.0);
    EXPECT_LT(std::abs(pde_residual(b, full, x, 1e-3)), 1e-5);
  }
}

TEST(NeumannResidual, CompliantCentresAndDisplacedControl) {
  const Norm e = Norm::euclidean(3);
  RandomStream rng(2);
  const Cone half = Cone::half_space(Vec::Unit(3, 2));
  const Cone circ = Cone::circular(Vec::Unit(3, 2), kPi / 4);
  const Bubble bh = make_bubble(3, 2.0, e, Weight::unit(3), half, 1.0, vec({0.4, -0.2, 0}));
  const Bubble bc = make_bubble(3, 2.0, e, Weight::unit(3), circ);
  for (int k = 0; k < 20; ++k) {
    EXPECT_LT(std::abs(neumann_residual(bh, half, half.sample_boundary_point(rng))), 1e-10);
    EXPECT_LT(std::abs(neumann_residual(bc, circ, circ.sample_boundary_point(rng))), 1e-10);
  }
  const Bubble displaced = Bubble(bc.params(), e).with_center(0.5 * circ.interior_direction());
  double worst = 0.0;
  for (int k = 0; k < 20; ++k)
    worst = std::max(worst, std::abs(neumann_residual(displaced, circ, circ.sample_boundary_point(rng))));
  EXPECT_GT(worst, 1e-3);
}

TEST(WeightedResidual, ReducesToUnweightedAndDetectsMiscalibration) {
  const Norm e = Norm::euclidean(3);
  const Cone full = Cone::full_space(3);
  const Bubble b = make_bubble(3, 2.0, e, Weight::unit(3), full);
  const Vec x = vec({0.5, 1, -0.3});
  EXPECT_NEAR(weighted_residual(b, Weight::unit(3), x, 1e-3), pde_residual(b, full, x, 1e-3), 1e-12);

  const Weight w = Weight::monomial(3, {1.0});
  const Bubble bw = make_bubble(3, 2.0, e, w, Cone::orthant(3, 1));
  const Vec y = vec({0.7, 0.4, -0.2});
  EXPECT_LT(std::abs(weighted_residual(bw, w, y, 1e-3)), 1e-5);
  BubbleParams off = bw.params();
  off.c *= 1.01;
  EXPECT_GT(std::abs(weighted_residual(Bubble(off, e), w, y, 1e-3)), 1e-4);
}

TEST(S2, Examples) {
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 1, 2, 3;
  EXPECT_NEAR(s2(d), 11.0, 1e-14);
  for (int n = 2; n <= 6; ++n) EXPECT_NEAR(s2(Mat::Identity(n, n)), n * (n - 1) / 2.0, 1e-13);

  RandomStream rng(3);
  for (int k = 0; k < 50; ++k) {
    Mat m(4, 4);
    for (int i = 0; i < 16; ++i) m.data()[i] = rng.normal();
    double brute = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) brute += m(i, i) * m(j, j) - m(i, j) * m(j, i);
    EXPECT_NEAR(s2(m), brute, 1e-12 * (1 + std::abs(brute)));
    // Cofactor is the derivative of s2.
    Mat fd(4, 4);
    for (int i = 0; i < 16; ++i) {
      Mat mp = m, mm = m;
      mp.data()[i] += 1e-6;
      mm.data()[i] -= 1e-6;
      fd.data()[i] = (s2(mp) - s2(mm)) / 2e-6;
    }
    EXPECT_LT((fd - s2_cofactor(m)).norm(), 1e-7);
  }
}

TEST(Newton, ExamplesAndEquality) {
  const VerificationReport id = check_newton(Mat::Identity(3, 3), Mat::Identity(3, 3));
  EXPECT_TRUE(id.pass());
  bool saw_equality = false;
  for (const auto& row : id.rows) saw_equality |= row.check == "newton_equality_identity";
  EXPECT_TRUE(saw_equality);

  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 1, 2, 3;
  const VerificationReport r = check_newton(Mat::Identity(3, 3), d);
  EXPECT_TRUE(r.pass());
  EXPECT_NEAR((3 - 1) / 6.0 * 36.0 - s2(d), 1.0, 1e-13);

  RandomStream rng(4);
  for (int k = 0; k < 1000; ++k) {
    const int n = 2 + k % 5;
    Mat g(n, n), c(n, n);
    for (int i = 0; i < n * n; ++i) {
      g.data()[i] = rng.normal();
      c.data()[i] = rng.normal();
    }
    EXPECT_TRUE(check_newton(g * g.transpose(), c + c.transpose()).pass());
  }
}

TEST(WMatrix, QuadraticVIsMultipleOfIdentity) {
  const FunctionField v(
      3, [](const Vec& x) { return (1 + x.squaredNorm()) / std::sqrt(3.0); },
      [](const Vec& x) { return Vec(2 * x / std::sqrt(3.0)); },
      [](const Vec&) { return Mat(2 / std::sqrt(3.0) * Mat::Identity(3, 3)); });
  const Vec x = vec({0.3, 1.1, -0.4});
  const WMatrix w = w_matrix(v, Norm::euclidean(3), 2.0, x, 1e-3);
  EXPECT_LT((w.w - 2 / std::sqrt(3.0) * Mat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(off_identity_deviation(w_matrix_exact(v, Norm::euclidean(3), 2.0, x)), 1e-15);
}

TEST(WMatrix, BubbleRigidityAndControl) {
  for (const Norm& h : {Norm::euclidean(3), Norm::blend(3, 4.0, 0.5), Norm::shifted(0.3 * Vec::Unit(3, 0))}) {
    const Bubble b = make_bubble(3, 2.5, h, Weight::unit(3), Cone::full_space(3));
    const BubbleVField v(b);
    const Norm hv = h.reflected();
    RandomStream rng(5);
    for (int k = 0; k < 10; ++k) {
      const Vec x = rng.unit_vector(3) * rng.uniform(0.5, 3.0);
      const WMatrix w = w_matrix(v, hv, b.p(), x, 1e-3);
      EXPECT_LE(off_identity_deviation(w.w), 5 * w.fd_error);
      EXPECT_LT(off_identity_deviation(w_matrix_exact(v, hv, b.p(), x)), 1e-10 * w.w.norm());
      const WMatrix wc = w_matrix(cubic_control_field(3), hv, b.p(), x, 1e-3);
      EXPECT_GT(off_identity_deviation(wc.w), 1e3 * wc.fd_error);
    }
  }
}

TEST(WMatrix, TraceIsFinslerLaplacian) {
  const FunctionField f = exp_mix_field(3);
  const Norm h = Norm::blend(3, 4.0, 0.5);
  const Vec x = vec({0.4, -0.7, 0.2});
  for (double p : {2.0, 3.0}) {
    const double tr = w_matrix_exact(f, h, p, x).trace();
    EXPECT_NEAR(finsler_p_laplacian(f, h, p, x, 1e-3, 4), tr, 1e-8 * std::abs(tr));
  }
}

TEST(Lemma31, Examples) {
  const Norm e = Norm::euclidean(3);
  EXPECT_TRUE(check_lemma31_identity(bowl_field(3), e, 2.0, -2.0, vec({1, 0, 0}), 1e-3).pass());
  // gamma = 0 leaves 2 S2(W) = div(S2 cofactor(W) a(grad v)).
  const Lemma31Terms t0 = lemma31_terms(exp_mix_field(3), e, 2.0, 0.0, vec({0.3, 0.5, -0.2}), 1e-3);
  EXPECT_NEAR(t0.lhs, t0.rhs, 1e-3 * t0.scale);

  const Bubble b = make_bubble(4, 3.0, Norm::blend(4, 4.0, 0.5), Weight::unit(4), Cone::full_space(4));
  RandomStream rng(6);
  for (int k = 0; k < 10; ++k) {
    const Vec x = rng.unit_vector(4) * rng.uniform(0.5, 2.0);
    EXPECT_TRUE(check_lemma31_identity(BubbleVField(b), b.norm().reflected(), 3.0, -4.0, x, 1e-3).pass());
  }
}

TEST(Lemma31, FirstOrderDecay) {
  const Norm e = Norm::euclidean(4);
  const Vec x = vec({0.3, -0.5, 0.2, 0.6});
  const Lemma31Terms a = lemma31_terms(exp_mix_field(4), e, 3.0, -2.0, x, 1e-2);
  const Lemma31Terms b = lemma31_terms(exp_mix_field(4), e, 3.0, -2.0, x, 1e-3);
  EXPECT_GE(std::log10(std::abs(a.lhs - a.rhs) / std::abs(b.lhs - b.rhs)), 0.9);
}
