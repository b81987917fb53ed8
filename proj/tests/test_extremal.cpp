#include "conelab/extremal.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace conelab;

namespace {

struct Fixture {
  Cone cone = Cone::full_space(3);
  Bubble bubble = make_bubble(3, 2.0, Norm::euclidean(3), Weight::unit(3), Cone::full_space(3));
  SobolevSetting s = make_setting(3, 2.0, Norm::euclidean(3), Cone::full_space(3), Weight::unit(3));
  DiscreteQuotient q{s, graded_grid({1e-3, 1e4, 1.02})};
  double sharp = quotient(bubble, s).quotient;
  Vec bubble_samples() const {
    return q.sample([this](double r) { return bubble.profile(r); });
  }
};

Vec gaussian(const DiscreteQuotient& q, double width) {
  return q.sample([width](double r) { return std::exp(-r * r / (width * width)); });
}

}  // namespace

TEST(DiscreteQuotient, MatchesContinuumAtBubble) {
  Fixture f;
  EXPECT_NEAR(f.q.value(f.bubble_samples()), f.sharp, 1e-4 * f.sharp);
}

TEST(DiscreteQuotient, Homogeneity) {
  Fixture f;
  const Vec u = gaussian(f.q, 1.3);
  const double j = f.q.value(u);
  for (double t : {0.5, 2.0, 1e3}) EXPECT_NEAR(f.q.value(t * u), j, 1e-12 * j);
  EXPECT_THROW(f.q.value(Vec::Zero(static_cast<Eigen::Index>(f.q.size()))), DomainError);
}

TEST(DiscreteQuotient, PlateauIsWorseThanBubble) {
  Fixture f;
  const Vec plateau = f.q.sample([](double r) { return 1.0 / (1.0 + std::pow(r / 2.0, 8.0)); });
  EXPECT_GT(f.q.value(plateau), f.sharp * 1.01);
}

TEST(DiscreteQuotient, GradientMatchesCentralDifferences) {
  Fixture f;
  const Vec u = f.q.normalize(gaussian(f.q, 2.0));
  const Vec g = f.q.gradient(u);
  RandomStream rng(3);
  const double eps = 1e-6;
  for (int k = 0; k < 5; ++k) {
    // Smooth random direction, decaying with u so the tail model stays valid.
    const double a = rng.normal(), b = rng.normal(), c = rng.uniform(0.5, 3.0);
    const Vec d = f.q.sample([&](double r) { return (a + b * std::cos(r / c)) * std::exp(-r * r / 4.0); });
    const double fd = (f.q.value(u + eps * d) - f.q.value(u - eps * d)) / (2 * eps);
    EXPECT_LE(std::abs(g.dot(d) - fd), 1e-4 * g.norm() * d.norm());
  }
}

TEST(DiscreteQuotient, GradientOrthogonalToScalingDirection) {
  Fixture f;
  const Vec u = f.q.normalize(gaussian(f.q, 1.0));
  const Vec g = f.q.gradient(u);
  EXPECT_LE(std::abs(g.dot(u)), 1e-10 * g.norm() * u.norm());
}

TEST(DiscreteQuotient, GradientSmallAtSampledBubble) {
  Fixture f;
  const Vec ub = f.q.normalize(f.bubble_samples());
  const Vec ug = f.q.normalize(gaussian(f.q, 1.0));
  EXPECT_LT(f.q.gradient(ub).norm(), 1e-3 * f.q.gradient(ug).norm());
}

TEST(Minimize, GaussianStartReachesSharpConstantAndBubbleShape) {
  Fixture f;
  const MinimizeResult m = minimize(f.q, gaussian(f.q, 1.0));
  EXPECT_TRUE(m.converged) << m.status;
  const double j = f.q.value(m.u);
  EXPECT_LE(std::abs(j - f.sharp) / f.sharp, 5e-3);
  for (std::size_t i = 1; i < m.trace.size(); ++i) EXPECT_LE(m.trace[i].j, m.trace[i - 1].j * (1 + 1e-12));
  const BubbleFit fit = fit_bubble(f.q.grid(), m.u, 3.0, 2.0);
  EXPECT_LE(fit.linf_rel_error, 2e-2);
  EXPECT_GT(fit.lambda, 0.0);
}

TEST(Minimize, TraceIgnoresInitialAmplitude) {
  Fixture f;
  const Vec u0 = gaussian(f.q, 1.5);
  const MinimizeResult a = minimize(f.q, u0);
  const MinimizeResult b = minimize(f.q, 37.0 * u0);
  // the rounding-level stall may land one iteration apart
  const std::size_t common = std::min(a.trace.size(), b.trace.size());
  EXPECT_LE(std::max(a.trace.size(), b.trace.size()) - common, 2u);
  for (std::size_t i = 0; i < common; ++i) EXPECT_NEAR(a.trace[i].j, b.trace[i].j, 1e-10 * a.trace[i].j);
  EXPECT_NEAR(a.trace.back().j, b.trace.back().j, 1e-10 * a.trace.back().j);
}

TEST(Minimize, SampledBubbleIsStationary) {
  Fixture f;
  const Vec u0 = f.bubble_samples();
  const double j0 = f.q.value(u0);
  const MinimizeResult m = minimize(f.q, u0);
  EXPECT_LE((j0 - f.q.value(m.u)) / j0, 1e-8);
}

TEST(Minimize, SampledBubbleKeepsItsScale) {
  Fixture f;
  const Vec u0 = f.q.normalize(f.bubble_samples());
  const MinimizeResult m = minimize(f.q, u0);
  EXPECT_NEAR(f.q.log_centre(m.u), f.q.log_centre(u0), 1e-4);
  EXPECT_NEAR(fit_bubble(f.q.grid(), m.u, 3.0, 2.0).lambda, 1.0, 1e-3);
}

TEST(Minimize, NonQuadraticExponents) {
  for (auto [n, p] : {std::pair{4, 3.0}, std::pair{3, 1.5}}) {
    const Cone k = Cone::full_space(n);
    const SobolevSetting s = make_setting(n, p, Norm::euclidean(n), k, Weight::unit(n));
    const DiscreteQuotient q(s, graded_grid({1e-3, 1e4, 1.02}));
    const double sharp = quotient(make_bubble(n, p, Norm::euclidean(n), Weight::unit(n), k), s).quotient;
    const MinimizeResult m = minimize(q, gaussian(q, 1.0));
    EXPECT_TRUE(m.converged) << n << " " << p << " " << m.status;
    EXPECT_LE(std::abs(q.value(m.u) - sharp) / sharp, 5e-3);
    EXPECT_LE(fit_bubble(q.grid(), m.u, n, p).linf_rel_error, 2e-2);
  }
}

TEST(Minimize, TwoHumpStartFindsSingleBubble) {
  Fixture f;
  const Vec u0 = f.q.sample([](double r) { return std::exp(-r * r) + 0.8 * std::exp(-std::pow(r - 5.0, 2)); });
  const MinimizeResult m = minimize(f.q, u0);
  EXPECT_LE(std::abs(f.q.value(m.u) - f.sharp) / f.sharp, 5e-3);
}

TEST(Minimize, GridRefinementConverges) {
  Fixture f;
  double prev = std::numeric_limits<double>::infinity();
  for (double ratio : {1.08, 1.04, 1.02}) {
    const DiscreteQuotient q(f.s, graded_grid({1e-3, 1e4, ratio}));
    const double err = std::abs(q.value(q.sample([&](double r) { return f.bubble.profile(r); })) - f.sharp);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(BubbleFit, RecoversScale) {
  const auto r = graded_grid({1e-3, 1e3, 1.02});
  Vec u(static_cast<Eigen::Index>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) u[static_cast<Eigen::Index>(i)] = 7.0 / (0.5 * 0.5 + r[i] * r[i]);
  const BubbleFit fit = fit_bubble(r, u, 4.0, 2.0);
  EXPECT_NEAR(fit.lambda, 0.5, 1e-6);
  EXPECT_NEAR(fit.amplitude, 7.0, 1e-5);
  EXPECT_LT(fit.linf_rel_error, 1e-8);
}

TEST(TraceCsv, Header) {
  const std::string csv = to_csv(std::vector<TraceRow>{{0, 2.0, 0.0, 1.0}});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "iteration,J,step,grad_norm");
}
