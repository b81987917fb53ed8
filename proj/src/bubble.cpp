#include "conelab/bubble.hpp"

#include "conelab/radial.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace conelab {

double talenti_constant(double big_n, double p) {
  return std::pow(big_n, 1.0 / p) * std::pow((big_n - p) / (p - 1.0), (p - 1.0) / p);
}

void validate_exponents(int n, double p, double a) {
  if (n < 2) throw InvalidSpec("dimension must be at least 2");
  if (!(p > 1.0 && p < n)) throw InvalidSpec("require 1<p<n");
  if (!(a >= 0.0)) throw InvalidSpec("weight degree must be non-negative");
}

Bubble::Bubble(BubbleParams params, Norm norm) : params_(std::move(params)), norm_(std::move(norm)) {
  validate_exponents(params_.n, params_.p, params_.a);
  if (norm_.dim() != params_.n) throw InvalidSpec("norm dimension differs from bubble dimension");
  if (!(params_.lambda > 0.0)) throw InvalidSpec("lambda must be positive");
  if (!(params_.c > 0.0)) throw InvalidSpec("calibration constant must be positive");
  if (params_.x0.size() == 0) params_.x0 = Vec::Zero(params_.n);
  if (params_.x0.size() != params_.n) throw InvalidSpec("centre dimension differs from bubble dimension");
  const double m = (big_n() - params_.p) / params_.p;
  amplitude_ = std::pow(std::pow(params_.lambda, 1.0 / (params_.p - 1.0)) * params_.c, m);
}

double Bubble::beta() const { return params_.p * big_n() / (big_n() - params_.p); }
double Bubble::decay() const { return (big_n() - params_.p) / (params_.p - 1.0); }

double Bubble::profile(double r) const {
  const double pc = p_conj();
  const double m = (big_n() - params_.p) / params_.p;
  return amplitude_ * std::pow(std::pow(params_.lambda, pc) + std::pow(r, pc), -m);
}

double Bubble::profile_d1(double r) const {
  const double pc = p_conj();
  const double m = (big_n() - params_.p) / params_.p;
  const double d = std::pow(params_.lambda, pc) + std::pow(r, pc);
  return -amplitude_ * m * pc * std::pow(r, pc - 1.0) * std::pow(d, -m - 1.0);
}

double Bubble::profile_d2(double r) const {
  const double pc = p_conj();
  const double m = (big_n() - params_.p) / params_.p;
  const double d = std::pow(params_.lambda, pc) + std::pow(r, pc);
  return -amplitude_ * m * pc *
         ((pc - 1.0) * std::pow(r, pc - 2.0) * std::pow(d, -m - 1.0) -
          (m + 1.0) * pc * std::pow(r, 2.0 * pc - 2.0) * std::pow(d, -m - 2.0));
}

Vec Bubble::offset(const Vec& x) const {
  if (x.size() != params_.n) throw InvalidSpec("point dimension differs from bubble dimension");
  return x - params_.x0;
}

double Bubble::radius(const Vec& x) const { return norm_.gauge(offset(x)); }

double Bubble::value(const Vec& x) const { return profile(radius(x)); }

Vec Bubble::gradient(const Vec& x) const {
  const Vec y = offset(x);
  const double r = norm_.gauge(y);
  if (r == 0.0) throw DomainError("bubble gradient undefined at the centre");
  return profile_d1(r) * norm_.gauge_gradient(y);
}

Mat Bubble::hessian(const Vec& x) const {
  const Vec y = offset(x);
  const double r = norm_.gauge(y);
  if (r == 0.0) throw DomainError("bubble hessian undefined at the centre");
  const Vec g = norm_.gauge_gradient(y);
  return profile_d2(r) * g * g.transpose() + profile_d1(r) * norm_.gauge_hessian(y);
}

double Bubble::v_c1() const { return params_.lambda / params_.c; }
double Bubble::v_c2() const {
  return std::pow(params_.lambda, -1.0 / (params_.p - 1.0)) / params_.c;
}

double Bubble::v_value(const Vec& x) const {
  return std::pow(value(x), -params_.p / (big_n() - params_.p));
}

Bubble Bubble::with_lambda(double lambda) const {
  BubbleParams q = params_;
  q.lambda = lambda;
  return Bubble(q, norm_);
}

Bubble Bubble::with_center(const Vec& x0) const {
  BubbleParams q = params_;
  q.x0 = x0;
  return Bubble(q, norm_);
}

double bubble_eval(const BubbleParams& b, const Norm& h, const Vec& x) { return Bubble(b, h).value(x); }
Vec bubble_grad(const BubbleParams& b, const Norm& h, const Vec& x) { return Bubble(b, h).gradient(x); }
double v_transform(const BubbleParams& b, const Norm& h, const Vec& x) { return Bubble(b, h).v_value(x); }

Vec admissible_center(const Cone& cone, const Vec& requested) {
  if (requested.size() == 0) return Vec::Zero(cone.dim());
  if (requested.size() != cone.dim()) throw InvalidSpec("centre dimension differs from cone dimension");
  return cone.project_to_lineality(requested);
}

namespace {

// A(r) and B(r) of the radial residual at c = 1; the residual at c is
// c^{m(p-1)} A + c^{m(beta-1)} B and m(beta - p) = p.
void radial_terms(double big_n, double p, double r, double& a_term, double& b_term) {
  const double pc = p / (p - 1.0);
  const double m = (big_n - p) / p;
  const double beta = p * big_n / (big_n - p);
  auto phi = [&](double s) { return std::pow(1.0 + std::pow(s, pc), -m); };
  auto flux = [&](double s) {
    const double d1 = m * pc * std::pow(s, pc - 1.0) * std::pow(1.0 + std::pow(s, pc), -m - 1.0);
    return std::pow(s, big_n - 1.0) * std::pow(d1, p - 1.0);
  };
  const double h = 1e-3 * r;
  const double dflux =
      (-flux(r + 2 * h) + 8 * flux(r + h) - 8 * flux(r - h) + flux(r - 2 * h)) / (12.0 * h);
  a_term = -dflux / std::pow(r, big_n - 1.0);
  b_term = std::pow(phi(r), beta - 1.0);
}

}  // namespace

double calibration_residual(int n, double p, double a, double c, const CalibrationOptions& options) {
  validate_exponents(n, p, a);
  const double big_n = n + a;
  const double m = (big_n - p) / p;
  const double beta = p * big_n / (big_n - p);
  double worst = 0.0;
  for (int k = 0; k < options.points; ++k) {
    const double r = options.r_lo * std::pow(options.r_hi / options.r_lo, k / (options.points - 1.0));
    double at, bt;
    radial_terms(big_n, p, r, at, bt);
    const double res = std::pow(c, m * (p - 1.0)) * at + std::pow(c, m * (beta - 1.0)) * bt;
    worst = std::max(worst, std::abs(res) / (std::pow(c, m * (beta - 1.0)) * bt));
  }
  return worst;
}

double calibrate_constant(int n, double p, double a, const Norm& h, const Weight& w, const Cone& cone,
                          const CalibrationOptions& options) {
  validate_exponents(n, p, a);
  if (h.dim() != n || w.dim() != n || cone.dim() != n) throw InvalidSpec("dimension mismatch in calibration");
  if (std::abs(w.degree() - a) > 1e-12) throw InvalidSpec("weight degree differs from a");
  if (a > 0.0 && !w.compatible_with(cone))
    throw InvalidSpec("a weighted bubble needs a monomial weight supported on the cone");
  // The profile is lambda-covariant, so the fit is done at lambda = 1. With
  // t = c^p the rows read A/B + t = 0.
  const double big_n = n + a;
  double sum = 0.0;
  std::vector<double> ratios;
  for (int k = 0; k < options.points; ++k) {
    const double r = options.r_lo * std::pow(options.r_hi / options.r_lo, k / (options.points - 1.0));
    double at, bt;
    radial_terms(big_n, p, r, at, bt);
    ratios.push_back(at / bt);
    sum += at / bt;
  }
  const double t = -sum / static_cast<double>(ratios.size());
  if (!(t > 0.0)) throw ConvergenceError("calibration produced a non-positive constant", t);
  double worst = 0.0;
  for (double q : ratios) worst = std::max(worst, std::abs(q + t) / t);
  if (worst > options.tolerance) throw ConvergenceError("calibration residual above tolerance", worst);
  return std::pow(t, 1.0 / p);
}

Bubble make_bubble(int n, double p, const Norm& h, const Weight& w, const Cone& cone, double lambda,
                   const Vec& requested_center) {
  BubbleParams b;
  b.n = n;
  b.p = p;
  b.a = w.degree();
  b.lambda = lambda;
  b.c = calibrate_constant(n, p, b.a, h, w, cone);
  b.x0 = admissible_center(cone, requested_center);
  return Bubble(b, h);
}

VerificationReport check_decay(const Bubble& bubble, const Cone& cone) {
  VerificationReport rep;
  rep.name = "decay";
  const Vec dir = cone.interior_direction();
  const Vec& x0 = bubble.params().x0;
  std::vector<double> rs, us, gs, vs;
  for (int k = 0; k <= 40; ++k) {
    const double r = 1e2 * std::pow(1e2, k / 40.0);
    const Vec x = x0 + r * dir;
    rs.push_back(r);
    us.push_back(bubble.value(x));
    gs.push_back(bubble.gradient(x).norm());
    vs.push_back(bubble.v_value(x));
  }
  const double p = bubble.p();
  const double big_n = bubble.big_n();
  const double su = loglog_slope(rs, us);
  const double sg = loglog_slope(rs, gs);
  const double sv = loglog_slope(rs, vs);
  const std::string where = "r in [1e2,1e4]";
  rep.add("decay_u_slope", where, 0.0, std::abs(su + (big_n - p) / (p - 1.0)), 0.01);
  rep.add("decay_grad_slope", where, 0.0, std::abs(sg + (big_n - 1.0) / (p - 1.0)), 0.01);
  rep.add("growth_v_slope", where, 0.0, std::abs(sv - bubble.p_conj()), 0.01);

  // Two-sided bound C0/(1+r^d) <= U <= C1/(1+r^d), constants read off the formula.
  const double d = bubble.decay();
  const double m = (big_n - p) / p;
  const double ld = std::pow(bubble.params().lambda, d);
  const double c0 = bubble.amplitude() * std::pow(2.0, -m) / std::max(ld, 1.0);
  const double c1 = 2.0 * bubble.amplitude() / std::min(ld, 1.0);
  double worst = 0.0;
  for (int k = 0; k <= 140; ++k) {
    const double r = 1e-3 * std::pow(1e7, k / 140.0);
    const double u = bubble.value(x0 + r * dir) * (1.0 + std::pow(bubble.radius(x0 + r * dir), d));
    worst = std::max({worst, u / c1, c0 / u});
  }
  rep.add("decay_two_sided_bound", "r in [1e-3,1e4]", 0.0, worst, 1.0);
  return rep;
}

}  // namespace conelab
