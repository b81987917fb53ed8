#include "conelab/sobolev.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace conelab {

RadialFunction radial_function(const Bubble& b) {
  RadialFunction f;
  f.value = [b](double r) { return b.profile(r); };
  f.derivative = [b](double r) { return b.profile_d1(r); };
  f.decay = b.decay();
  return f;
}

SobolevSetting make_setting(int n, double p, const Norm& h, const Cone& cone, const Weight& w,
                            const SectorMeasureOptions& mc, const GridSpec& grid) {
  validate_exponents(n, p, w.degree());
  SobolevSetting s;
  s.n = n;
  s.p = p;
  s.a = w.degree();
  s.grid = grid;
  const SectorMeasure m = sector_measure(cone, h, w, mc);
  s.mu = m.value;
  s.mu_error = m.std_error;
  return s;
}

namespace {

struct Moments {
  QuadratureResult grad;  // int |u'|^p r^{N-1}
  QuadratureResult mass;  // int u^beta r^{N-1}
};

Moments moments(const RadialFunction& u, const SobolevSetting& s) {
  const double big_n = s.big_n();
  const double beta = s.beta();
  Moments m;
  m.grad = integrate_radial([&](double r) { return std::pow(std::abs(u.derivative(r)), s.p); }, big_n - 1.0,
                            (u.decay + 1.0) * s.p, s.grid);
  m.mass = integrate_radial([&](double r) { return std::pow(u.value(r), beta); }, big_n - 1.0,
                            beta * u.decay, s.grid);
  return m;
}

QuotientResult assemble(double grad, double grad_err, double mass, double mass_err, const SobolevSetting& s) {
  const double scale = s.big_n() * s.mu;
  const double ratio = s.p / s.beta();
  QuotientResult q;
  q.numerator = scale * grad;
  q.denominator = std::pow(scale * mass, ratio);
  q.quotient = q.numerator / q.denominator;
  const double rel_mu = s.mu > 0.0 ? s.mu_error / s.mu : 0.0;
  q.numerator_error = q.numerator * (grad_err / grad + rel_mu);
  q.denominator_error = q.denominator * ratio * (mass_err / mass + rel_mu);
  q.quadrature_error = q.quotient * (grad_err / grad + ratio * mass_err / mass);
  q.measure_error = q.quotient * std::abs(1.0 - ratio) * rel_mu;
  q.quotient_error = q.quadrature_error + q.measure_error;
  return q;
}

// Gauss-Legendre rule on [lo, hi] from `panels` copies of the 10-point rule.
std::vector<std::pair<double, double>> gauss_rule(int panels, double lo, double hi) {
  using rule = boost::math::quadrature::gauss<double, 10>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  std::vector<std::pair<double, double>> out;
  const double width = (hi - lo) / panels;
  for (int k = 0; k < panels; ++k) {
    const double mid = lo + (k + 0.5) * width;
    const double half = 0.5 * width;
    for (std::size_t i = 0; i < x.size(); ++i) {
      out.emplace_back(mid - half * x[i], half * w[i]);
      out.emplace_back(mid + half * x[i], half * w[i]);
    }
  }
  return out;
}

// (1 - t^2)^4 on [-1, 1] and its derivative.
double bump(double t) {
  const double s = 1.0 - t * t;
  return t * t < 1.0 ? s * s * s * s : 0.0;
}
double bump_d1(double t) {
  const double s = 1.0 - t * t;
  return t * t < 1.0 ? -8.0 * t * s * s * s : 0.0;
}

struct Variation {
  double eps;
  double d_grad;  // change of int H^p(grad u) w
  double d_mass;  // change of int u^beta w
};

// Relative change J(eps)/J(0) - 1 from the moment changes.
double relative_change(double grad0, double mass0, const Variation& v, double ratio) {
  const double l = std::log1p(v.d_grad / grad0) - ratio * std::log1p(v.d_mass / mass0);
  return std::expm1(l);
}

void add_perturbation_rows(VerificationReport& rep, const std::string& tag, const std::vector<Variation>& vars,
                           double grad0, double mass0, double ratio) {
  // Minimality: J(U + eps phi) >= J(U)(1 - 1e-8).
  double worst = 0.0;
  for (const auto& v : vars) worst = std::max(worst, -relative_change(grad0, mass0, v, ratio));
  rep.add(tag + "_minimality", "eps in {+-1e-2,+-1e-3}", 0.0, worst, 1e-8);

  // Criticality: Richardson-extrapolated first derivative against the
  // second-order term at the largest |eps|.
  auto change = [&](double e) {
    for (const auto& v : vars)
      if (v.eps == e) return relative_change(grad0, mass0, v, ratio);
    throw InvalidSpec("perturbation test needs symmetric eps pairs");
  };
  std::vector<double> mags;
  for (const auto& v : vars)
    if (v.eps > 0) mags.push_back(v.eps);
  std::sort(mags.begin(), mags.end());
  if (mags.size() < 2) throw InvalidSpec("perturbation test needs two eps magnitudes");
  const double e1 = mags.front();
  const double e2 = mags.back();
  const double g1 = (change(e1) - change(-e1)) / (2 * e1);
  const double g2 = (change(e2) - change(-e2)) / (2 * e2);
  const double first = (e2 * e2 * g1 - e1 * e1 * g2) / (e2 * e2 - e1 * e1);
  const double second = 0.5 * (change(e2) + change(-e2));
  const double ratio_fs = std::abs(first * e2) / std::max(std::abs(second), std::numeric_limits<double>::min());
  rep.add(tag + "_criticality", "first/second order at max eps", e2, ratio_fs, 1e-3);
}

}  // namespace

QuotientResult quotient(const RadialFunction& u, const SobolevSetting& s) {
  if (!(s.mu > 0.0)) throw InvalidSpec("sector measure must be positive");
  const Moments m = moments(u, s);
  if (!(m.mass.value > 0.0)) throw DomainError("zero profile");
  return assemble(m.grad.value, m.grad.error, m.mass.value, m.mass.error, s);
}

QuotientResult quotient(const Bubble& b, const SobolevSetting& s) { return quotient(radial_function(b), s); }

QuotientResult sharp_constant(const Norm& h, const Cone& cone, const Weight& w, int n, double p,
                              const SectorMeasureOptions& mc, const GridSpec& grid) {
  const SobolevSetting s = make_setting(n, p, h, cone, w, mc, grid);
  return quotient(make_bubble(n, p, h, w, cone), s);
}

VerificationReport perturbation_test(const Bubble& b, const Cone& cone, const Weight& w,
                                     const SobolevSetting& s, const PerturbationOptions& options) {
  VerificationReport rep;
  rep.name = "perturbation";
  const double p = b.p();
  const double beta = b.beta();
  const double ratio = p / beta;
  const double scale = s.big_n() * s.mu;
  const Moments base = moments(radial_function(b), s);
  const double grad0 = scale * base.grad.value;
  const double mass0 = scale * base.mass.value;

  // Radial bump in the gauge variable.
  {
    const double rc = options.bump_center * b.params().lambda;
    const double del = options.bump_radius * b.params().lambda;
    const auto rule = gauss_rule(8, rc - del, rc + del);
    std::vector<Variation> vars;
    for (double e : options.eps) {
      Variation v{e, 0.0, 0.0};
      for (const auto& [r, wt] : rule) {
        const double t = (r - rc) / del;
        const double phi = bump(t);
        const double dphi = bump_d1(t) / del;
        const double u = b.profile(r);
        const double du = b.profile_d1(r);
        const double jac = scale * std::pow(r, s.big_n() - 1.0) * wt;
        v.d_grad += jac * (std::pow(std::abs(du + e * dphi), p) - std::pow(std::abs(du), p));
        v.d_mass += jac * (std::pow(std::abs(u + e * phi), beta) - std::pow(u, beta));
      }
      vars.push_back(v);
    }
    add_perturbation_rows(rep, "radial_bump", vars, grad0, mass0, ratio);
  }

  // Product bump off the centre: not a function of the gauge alone.
  {
    const int n = b.dim();
    const Vec dir = cone.interior_direction();
    Vec z = b.params().x0 + options.bump_center * b.params().lambda * dir;
    // Tilt the centre sideways so the bump is not symmetric about any ray.
    Vec side = Vec::Zero(n);
    side[0] = 1.0;
    side -= side.dot(dir) * dir;
    if (side.norm() > 1e-12) z += 0.3 * b.params().lambda * side.normalized();
    double half = options.bump_radius * b.params().lambda;
    const double room = cone.boundary_distance(z);
    if (std::isfinite(room)) half = std::min(half, 0.9 * room / std::sqrt(static_cast<double>(n)));
    if (!(half > 0.0)) throw InvalidSpec("no room for an interior bump");
    const int panels = n <= 2 ? 6 : n == 3 ? 3 : n == 4 ? 2 : 1;
    const auto rule = gauss_rule(panels, -1.0, 1.0);
    const std::size_t k = rule.size();
    std::vector<Variation> vars;
    for (double e : options.eps) vars.push_back({e, 0.0, 0.0});
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    Vec x(n), dphi(n);
    while (true) {
      double wt = std::pow(half, n);
      double phi = 1.0;
      std::vector<double> f(static_cast<std::size_t>(n)), df(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        const auto [t, wi] = rule[idx[static_cast<std::size_t>(i)]];
        x[i] = z[i] + half * t;
        wt *= wi;
        f[static_cast<std::size_t>(i)] = bump(t);
        df[static_cast<std::size_t>(i)] = bump_d1(t) / half;
        phi *= f[static_cast<std::size_t>(i)];
      }
      for (int i = 0; i < n; ++i) {
        double d = df[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j)
          if (j != i) d *= f[static_cast<std::size_t>(j)];
        dphi[i] = d;
      }
      const double wx = w.value(x) * wt;
      const double u = b.value(x);
      const Vec du = b.gradient(x);
      const double hp0 = std::pow(b.norm().value(du), p);
      const double ub0 = std::pow(u, beta);
      for (auto& v : vars) {
        v.d_grad += wx * (std::pow(b.norm().value(du + v.eps * dphi), p) - hp0);
        v.d_mass += wx * (std::pow(std::abs(u + v.eps * phi), beta) - ub0);
      }
      int i = 0;
      while (i < n && ++idx[static_cast<std::size_t>(i)] == k) idx[static_cast<std::size_t>(i++)] = 0;
      if (i == n) break;
    }
    add_perturbation_rows(rep, "angular_bump", vars, grad0, mass0, ratio);
  }

  // Moving the centre off the vertex of a pointed cone.
  if (cone.kind() == ConeKind::circular && cone.lineality_dim() == 0 &&
      b.norm().family() == NormFamily::euclidean && b.params().a == 0.0) {
    const double j0 = translated_quotient(b, cone, 0.0);
    for (double t : {0.05, 0.2}) {
      const double jt = translated_quotient(b, cone, t * b.params().lambda);
      rep.add("translation_increase", "x0 = " + format_double(t) + " axis", 0.0, (jt - j0) / j0, 1e-8, true);
    }
  }
  return rep;
}

double translated_quotient(const Bubble& b, const Cone& cone, double t) {
  if (cone.kind() != ConeKind::circular || b.norm().family() != NormFamily::euclidean || b.params().a != 0.0)
    throw InvalidSpec("translated_quotient needs a Euclidean unweighted bubble on a circular cone");
  using boost::math::quadrature::gauss_kronrod;
  const int n = b.dim();
  const double p = b.p();
  const double beta = b.beta();
  const double alpha = cone.half_aperture();
  const double inf = std::numeric_limits<double>::infinity();
  auto grad_density = [&](double s) { return std::pow(std::abs(b.profile_d1(s)), p) * std::pow(s, n - 1.0); };
  auto mass_density = [&](double s) { return std::pow(b.profile(s), beta) * std::pow(s, n - 1.0); };
  const double tol = 1e-13;
  const double grad_full = gauss_kronrod<double, 61>::integrate(grad_density, 0.0, inf, 20, tol);
  const double mass_full = gauss_kronrod<double, 61>::integrate(mass_density, 0.0, inf, 20, tol);
  // Polar coordinates about x0 = t axis; rays at angle phi > alpha from the
  // axis leave the cone at s = t sin(alpha) / sin(phi - alpha).
  auto angular = [&](const auto& density, double full) {
    auto inner = [&](double phi) {
      const double w = std::pow(std::sin(phi), n - 2.0);
      if (t == 0.0) return 0.0;
      const double smax = t * std::sin(alpha) / std::sin(phi - alpha);
      return w * (full - gauss_kronrod<double, 61>::integrate(density, smax, inf, 20, tol));
    };
    double inside = 0.0;
    if (n == 2) {
      inside = alpha * full;
    } else {
      inside = full * gauss_kronrod<double, 61>::integrate(
                          [&](double phi) { return std::pow(std::sin(phi), n - 2.0); }, 0.0, alpha, 20, tol);
    }
    const double outside =
        alpha < std::numbers::pi ? gauss_kronrod<double, 61>::integrate(inner, alpha, std::numbers::pi, 20, tol) : 0.0;
    // |S^{n-2}|; for n = 2 the circle S^0 has two points.
    const double sphere = n == 2 ? 2.0 : unit_sphere_area(n - 1);
    return sphere * (inside + outside);
  };
  const double grad = angular(grad_density, grad_full);
  const double mass = angular(mass_density, mass_full);
  return grad / std::pow(mass, p / beta);
}

VerificationReport check_identity_v(const Bubble& b, const SobolevSetting& s) {
  if (b.params().a != 0.0) throw InvalidSpec("the v identity is stated for unweighted bubbles");
  const int n = b.dim();
  const double p = b.p();
  const RadialV v = radial_v(b);
  const double decay = (n + 1.0) * v.growth;
  const auto lhs_i = integrate_radial([&](double r) { return std::pow(v.v(r), -n - 1.0); }, n - 1.0, decay, s.grid);
  const auto rhs_i = integrate_radial(
      [&](double r) { return std::pow(v.v(r), -n - 1.0) * std::pow(v.dv(r), p); }, n - 1.0, decay - p * (v.growth - 1.0),
      s.grid);
  const double scale = n * s.mu;
  const double lhs = std::pow(p / (n - p), p - 1.0) * scale * lhs_i.value;
  const double rhs = (n / p) * scale * rhs_i.value;
  VerificationReport rep;
  rep.name = "identity_v";
  rep.add("identity_v", "lambda=" + format_double(b.params().lambda), 0.0, std::abs(lhs - rhs) / std::abs(rhs), 1e-6);
  return rep;
}

RadialV radial_v(const Bubble& b) {
  const double c1 = b.v_c1();
  const double c2 = b.v_c2();
  const double pc = b.p_conj();
  RadialV v;
  v.v = [=](double r) { return c1 + c2 * std::pow(r, pc); };
  v.dv = [=](double r) { return c2 * pc * std::pow(r, pc - 1.0); };
  v.d2v = [=](double r) { return c2 * pc * (pc - 1.0) * std::pow(r, pc - 2.0); };
  v.growth = pc;
  return v;
}

IntegralInequality integral_inequality(const RadialV& v, const SobolevSetting& s, double gamma) {
  if (s.a != 0.0) throw InvalidSpec("the integral inequality is stated for unweighted problems");
  const int n = s.n;
  const double p = s.p;
  const double threshold = -n * (p - 1.0) / p;
  if (!(gamma < threshold)) throw InvalidSpec("gamma must lie below -n(p-1)/p");
  const double g = v.growth;
  const double decay = -gamma * g - 2.0 * ((g - 1.0) * (p - 1.0) - 1.0);
  struct Terms {
    double total, magnitude, slack;
  };
  auto terms = [&](double r) {
    const double vv = v.v(r);
    const double d1 = v.dv(r);
    const double d2 = v.d2v(r);
    const double gg = std::pow(d1, p - 1.0) / r;
    const double gp = ((p - 1.0) * std::pow(d1, p - 2.0) * d2 * r - std::pow(d1, p - 1.0)) / (r * r);
    const double tr = n * gg + gp * r;
    const double sec = 0.5 * (n - 1.0) * (n - 2.0) * gg * gg + (n - 1.0) * gg * (gg + gp * r);
    const double big_v = std::pow(d1, p) / p;
    const double t0 = 2.0 * std::pow(vv, gamma) * sec;
    const double t1 = gamma * (gamma - 1.0) * p * (p - 1.0) * std::pow(vv, gamma - 2.0) * big_v * big_v;
    const double t2 = gamma * (2.0 * p - 1.0) * std::pow(vv, gamma - 1.0) * big_v * tr;
    const double slack = std::pow(vv, gamma) * ((n - 1.0) / n * tr * tr - 2.0 * sec);
    return Terms{t0 + t1 + t2, std::abs(t0) + std::abs(t1) + std::abs(t2), slack};
  };
  const double scale = n * s.mu;
  IntegralInequality out;
  auto total = integrate_radial([&](double r) { return terms(r).total; }, n - 1.0, decay, s.grid);
  auto mag = integrate_radial([&](double r) { return terms(r).magnitude; }, n - 1.0, decay, s.grid);
  auto slack = integrate_radial([&](double r) { return terms(r).slack; }, n - 1.0, decay, s.grid);
  // Rounding in forming the integrand is relative to the term magnitudes.
  const double round = 64.0 * std::numeric_limits<double>::epsilon() * mag.value;
  out.value = {scale * total.value, scale * (total.error + round)};
  out.newton_slack = {scale * slack.value, scale * (slack.error + round)};
  return out;
}

VerificationReport check_integral_inequality(const Bubble& b, const SobolevSetting& s, double gamma) {
  const IntegralInequality r = integral_inequality(radial_v(b), s, gamma);
  VerificationReport rep;
  rep.name = "integral_inequality";
  const std::string where = "gamma=" + format_double(gamma);
  rep.add("integral_inequality", where, 0.0, -r.value.value, r.value.error);
  if (std::abs(gamma - (1.0 - s.n)) < 1e-12)
    rep.add("integral_equality_case", where, 0.0, std::abs(r.value.value), r.value.error);
  rep.add("newton_slack_nonnegative", where, 0.0, -r.newton_slack.value, r.newton_slack.error);
  return rep;
}

namespace {

// Average of |y|^2 |grad rho(y)|^2 / rho(y)^2 against the sector measure.
double direction_factor(const Bubble& b, const Cone& cone) {
  if (b.norm().family() == NormFamily::euclidean) return 1.0;
  RandomStream rng(0xcacc, 1);
  const int n = b.dim();
  const double big_n = b.big_n();
  double num = 0.0, den = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const Vec d = rng.unit_vector(n);
    if (!cone.contains(d)) continue;
    const double rho = b.norm().gauge(d);
    const double wgt = std::pow(rho, -big_n);
    const double g = b.norm().gauge_gradient(d).squaredNorm();
    num += wgt * g / (rho * rho);
    den += wgt;
  }
  return den > 0.0 ? num / den : 1.0;
}

}  // namespace

CaccioppoliResult caccioppoli_scaling(const Bubble& b, const Cone& cone, const SobolevSetting& s,
                                      CaccioppoliKind kind, double exponent,
                                      const std::vector<double>& r_list) {
  if (r_list.size() < 2) throw InvalidSpec("need at least two radii");
  for (std::size_t i = 0; i < r_list.size(); ++i) {
    if (r_list[i] < 1.0 || r_list[i] > 1e4 || (i && r_list[i] <= r_list[i - 1]))
      throw InvalidSpec("radii must increase within [1, 1e4]");
  }
  const int n = b.dim();
  const double p = b.p();
  const double big_n = b.big_n();
  const double avg = direction_factor(b, cone);
  // a(grad f) = -+ G(rho) y with G = |f'|^{p-1}/rho, so
  // |D a|^2 = n G^2 + 2 G G' rho + G'^2 |y|^2 |grad rho|^2.
  std::function<double(double)> fval, d1, d2;
  if (kind == CaccioppoliKind::u_version) {
    fval = [&](double r) { return b.profile(r); };
    d1 = [&](double r) { return std::abs(b.profile_d1(r)); };
    d2 = [&](double r) { return -b.profile_d2(r); };
  } else {
    const RadialV v = radial_v(b);
    fval = v.v;
    d1 = v.dv;
    d2 = v.d2v;
  }
  auto integrand = [&](double r) {
    const double f1 = d1(r);
    const double g = std::pow(f1, p - 1.0) / r;
    const double gp = ((p - 1.0) * std::pow(f1, p - 2.0) * d2(r) * r - std::pow(f1, p - 1.0)) / (r * r);
    const double frob = n * g * g + 2.0 * g * gp * r + gp * gp * r * r * avg;
    return frob * std::pow(fval(r), exponent);
  };
  CaccioppoliResult out;
  for (double r : r_list) {
    GridSpec grid{1e-4, r, 1.02};
    const auto q = integrate_radial(integrand, big_n - 1.0, std::numeric_limits<double>::infinity(), grid);
    out.r.push_back(r);
    out.integral.push_back(big_n * s.mu * q.value);
  }
  std::vector<double> rs, is;
  const double top = r_list.back();
  for (std::size_t i = 0; i < out.r.size(); ++i) {
    if (out.r[i] >= top / 10.0 * (1 - 1e-12)) {
      rs.push_back(out.r[i]);
      is.push_back(out.integral[i]);
    }
  }
  if (rs.size() < 2) throw InvalidSpec("the upper decade of the radii needs two or more points");
  out.slope = loglog_slope(rs, is);
  const double d = (n - p) / (p - 1.0);
  out.bound = kind == CaccioppoliKind::u_version ? std::max(0.0, -n - exponent * d) : n + exponent * p / (p - 1.0);
  return out;
}

VerificationReport check_caccioppoli(const Bubble& b, const Cone& cone, const SobolevSetting& s,
                                     CaccioppoliKind kind, double exponent,
                                     const std::vector<double>& r_list) {
  const CaccioppoliResult c = caccioppoli_scaling(b, cone, s, kind, exponent, r_list);
  VerificationReport rep;
  rep.name = "caccioppoli";
  const std::string tag = kind == CaccioppoliKind::u_version ? "caccioppoli_u" : "caccioppoli_v";
  rep.add(tag, "exponent=" + format_double(exponent), 0.0, c.slope, c.bound + 0.05);
  return rep;
}

}  // namespace conelab
