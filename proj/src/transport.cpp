#include "conelab/transport.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace conelab {

namespace {

using Gauss = boost::math::quadrature::gauss<double, 10>;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sgn_pow(double x, double e) { return std::pow(std::abs(x), e); }

}  // namespace

RadialFunction normalized(const RadialFunction& f, const SobolevSetting& s) {
  const double beta = s.beta();
  const double big_n = s.big_n();
  const auto m = integrate_radial([&](double r) { return sgn_pow(f.value(r), beta); }, big_n - 1.0,
                                  f.decay * beta, s.grid);
  const double total = big_n * s.mu * m.value;
  if (!(total > 0.0) || !std::isfinite(total)) throw DomainError("profile has zero or infinite mass");
  const double k = std::pow(total, -1.0 / beta);
  RadialFunction out;
  auto value = f.value;
  auto deriv = f.derivative;
  out.value = [value, k](double r) { return k * value(r); };
  out.derivative = [deriv, k](double r) { return k * deriv(r); };
  out.decay = f.decay;
  return out;
}

RadialFunction gaussian_function(double width) {
  if (!(width > 0.0)) throw InvalidSpec("gaussian width must be positive");
  RadialFunction g;
  g.value = [width](double r) { return std::exp(-(r / width) * (r / width)); };
  g.derivative = [width](double r) { return -2.0 * r / (width * width) * std::exp(-(r / width) * (r / width)); };
  g.decay = kInf;
  return g;
}

RadialDensity::RadialDensity(std::function<double(double)> density, double big_n, double scale, double tail_decay,
                             const GridSpec& grid)
    : density_(std::move(density)), big_n_(big_n), scale_(scale), decay_(tail_decay), r_(graded_grid(grid)) {
  if (!(scale > 0.0)) throw InvalidSpec("density scale must be positive");
  if (std::isfinite(decay_) && !(decay_ > big_n_)) throw IntegrabilityError("density tail is not integrable");
  const std::size_t m = r_.size();
  below_.assign(m, 0.0);
  above_.assign(m, 0.0);
  below_[0] = piece(0.0, r_[0]);
  for (std::size_t i = 1; i < m; ++i) below_[i] = below_[i - 1] + piece(r_[i - 1], r_[i]);
  const double rm = r_.back();
  above_[m - 1] = std::isfinite(decay_) ? density_(rm) * std::pow(rm, big_n_) / (decay_ - big_n_) : 0.0;
  for (std::size_t i = m - 1; i-- > 0;) above_[i] = above_[i + 1] + piece(r_[i], r_[i + 1]);
  total_ = below_.back() + above_.back();
  if (!(total_ > 0.0) || !std::isfinite(total_)) throw DomainError("density has zero or infinite mass");
}

RadialDensity RadialDensity::from_profile(const RadialFunction& f, const SobolevSetting& s, const GridSpec& grid) {
  const double beta = s.beta();
  auto value = f.value;
  return RadialDensity([value, beta](double r) { return sgn_pow(value(r), beta); }, s.big_n(), s.big_n() * s.mu,
                       f.decay * beta, grid);
}

double RadialDensity::piece(double a, double b) const {
  if (!(b > a)) return 0.0;
  const double e = big_n_ - 1.0;
  return Gauss::integrate([&](double r) { return density_(r) * std::pow(r, e); }, a, b);
}

double RadialDensity::lower(double r) const {
  if (r <= 0.0) return 0.0;
  if (r <= r_[0]) return piece(0.0, r);
  if (r >= r_.back()) return total_ - upper(r);
  const auto it = std::upper_bound(r_.begin(), r_.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - r_.begin()) - 1;
  return below_[i] + piece(r_[i], r);
}

double RadialDensity::upper(double r) const {
  if (r <= r_[0]) return total_ - lower(r);
  if (r >= r_.back()) {
    if (!std::isfinite(decay_)) return 0.0;
    return density_(r) * std::pow(r, big_n_) / (decay_ - big_n_);
  }
  const auto it = std::upper_bound(r_.begin(), r_.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - r_.begin());
  return above_[i] + piece(r, r_[i]);
}

double RadialDensity::quantile(double fraction, bool from_above) const {
  if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("quantile fraction must lie in (0, 1)");
  const double target = fraction * total_;
  // Mass on the requested side of r, minus the target; decreasing in r for
  // from_above, increasing otherwise.
  auto side = [&](double r) { return from_above ? upper(r) : lower(r); };
  double lo, hi;
  const std::size_t m = r_.size();
  if (!from_above) {
    if (target <= below_[0]) {
      lo = 0.0;
      hi = r_[0];
    } else if (target >= below_[m - 1]) {
      lo = r_[m - 1];
      hi = lo;
      while (lower(hi) < target) hi *= 2.0;
    } else {
      const auto it = std::upper_bound(below_.begin(), below_.end(), target);
      const std::size_t i = static_cast<std::size_t>(it - below_.begin());
      lo = r_[i - 1];
      hi = r_[i];
    }
  } else {
    if (target >= above_[0]) {
      lo = 0.0;
      hi = r_[0];
    } else if (target <= above_[m - 1]) {
      lo = r_[m - 1];
      hi = lo;
      while (upper(hi) > target) {
        hi *= 2.0;
        if (hi > 1e300) throw DomainError("quantile beyond representable radii");
      }
    } else {
      // above_ is decreasing.
      const auto it = std::lower_bound(above_.begin(), above_.end(), target, std::greater<double>());
      const std::size_t i = static_cast<std::size_t>(it - above_.begin());
      lo = r_[i - 1];
      hi = r_[i];
    }
  }
  // Safeguarded Newton on the bracket, density as derivative.
  double r = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double val = side(r) - target;
    const double d = (from_above ? -1.0 : 1.0) * density_(r) * std::pow(r, big_n_ - 1.0);
    if (val == 0.0) return r;
    const bool above_target = from_above ? (val < 0.0) : (val > 0.0);
    if (above_target) hi = r; else lo = r;
    double next = d != 0.0 ? r - val / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - r) <= 4.0 * std::numeric_limits<double>::epsilon() * r) return next;
    r = next;
  }
  return r;
}

RadialTransport::RadialTransport(RadialDensity source, RadialDensity target)
    : f_(std::move(source)), g_(std::move(target)) {
  if (f_.big_n() != g_.big_n()) throw InvalidSpec("densities live in different dimensions");
  const double mf = f_.mass(), mg = g_.mass();
  if (std::abs(mf - mg) > 1e-10 * std::max(mf, mg))
    throw InvalidSpec("mass mismatch between source and target; normalize first");
}

double RadialTransport::psi(double r) const {
  if (!(r > 0.0)) return 0.0;
  const double below = f_.cdf(r);
  if (below <= 0.5) {
    if (!(below > 0.0)) return 0.0;
    return g_.quantile(below, false);
  }
  const double frac = f_.upper(r) / (f_.lower(r) + f_.upper(r));
  if (!(frac > 0.0)) return kInf;
  return g_.quantile(frac, true);
}

double RadialTransport::dpsi(double r) const {
  const double s = psi(r);
  const double e = f_.big_n() - 1.0;
  const double num = f_.density(r) * std::pow(r, e) / f_.mass();
  const double den = g_.density(s) * std::pow(s, e) / g_.mass();
  return num / den;
}

Vec RadialTransport::map(const Vec& y, const Norm& h) const {
  const double r = h.gauge(y);
  if (!(r > 0.0)) return Vec::Zero(y.size());
  return psi(r) / r * y;
}

double RadialTransport::pushforward_residual() const {
  double worst = 0.0;
  for (double r : f_.grid()) {
    const double s = psi(r);
    const double fb = f_.cdf(r);
    // Compare on the better-conditioned side.
    const double res = fb <= 0.5 ? std::abs(g_.cdf(s) - fb)
                                 : std::abs(g_.upper(s) / (g_.lower(s) + g_.upper(s)) -
                                            f_.upper(r) / (f_.lower(r) + f_.upper(r)));
    worst = std::max(worst, res);
  }
  return worst;
}

namespace {

// int u r^{N-1} dr of sampled values. The tail exponent is read off the last
// nodes; the spread against the exponent one decade earlier bounds the error
// of the power-law continuation. Zero tails are dropped.
QuadratureResult integrate_samples(const std::vector<double>& r, std::vector<double> u, double big_n) {
  RadialProfile prof;
  prof.r = r;
  const std::size_t m = r.size();
  const double ds = std::log(r[1] / r[0]);
  const auto back = std::min<std::size_t>(m - 2, static_cast<std::size_t>(std::ceil(std::log(10.0) / ds)));
  auto slope = [&](std::size_t i, std::size_t j) { return -std::log(u[j] / u[i]) / std::log(r[j] / r[i]); };
  double extra = 0.0;
  if (u[m - 1] > 0.0 && u[m - 2] > 0.0 && u[m - 1 - back] > 0.0 && u[m - 2 - back] > 0.0) {
    prof.tail_decay = slope(m - 2, m - 1);
    const double far = slope(m - 2 - back, m - 1 - back);
    if (!(prof.tail_decay > big_n) || !(far > big_n))
      throw IntegrabilityError("chain integrand does not decay fast enough");
    extra = u[m - 1] * std::pow(r[m - 1], big_n) * std::abs(1.0 / (prof.tail_decay - big_n) - 1.0 / (far - big_n));
  } else {
    prof.tail_decay = kInf;
  }
  prof.u = std::move(u);
  QuadratureResult q = radial_quadrature(prof, big_n - 1.0);
  q.error += extra;
  return q;
}

struct Link {
  double value, error;
};

ChainRow make_row(std::string name, Link lhs, Link rhs, double floor, bool equality) {
  ChainRow row;
  row.link = std::move(name);
  row.lhs = lhs.value;
  row.rhs = rhs.value;
  row.slack = rhs.value - lhs.value;
  row.tolerance = lhs.error + rhs.error + floor * (std::abs(lhs.value) + std::abs(rhs.value));
  row.equality = equality;
  row.pass = equality ? std::abs(row.slack) <= row.tolerance : row.slack >= -row.tolerance;
  return row;
}

}  // namespace

ChainReport check_chain(const RadialFunction& f, const RadialFunction& g, const SobolevSetting& s, const Norm& h,
                        const Cone& cone, const ChainOptions& options) {
  const double p = s.p;
  const double pc = p / (p - 1.0);
  const double big_n = s.big_n();
  const double beta = s.beta();
  const double gamma = p * (big_n - 1.0) / (big_n - p);
  const double scale = big_n * s.mu;
  const double fl = options.rel_floor;
  const bool tight = options.expect == ChainExpectation::tight;

  ChainReport rep;
  rep.name = "transport_chain";
  rep.rows.push_back(make_row("gamma_consistency", {gamma - 1.0, 0.0}, {beta / pc, 0.0}, 1e-14, true));

  const RadialDensity fd = RadialDensity::from_profile(f, s, options.grid);
  const RadialDensity gd = RadialDensity::from_profile(g, s, options.grid);
  const RadialTransport tr(fd, gd);
  rep.rows.push_back(make_row("pushforward_cdf", {tr.pushforward_residual(), 0.0}, {0.0, 1e-8}, 0.0, true));

  const std::vector<double> r = graded_grid(options.grid);
  const std::size_t m = r.size();
  std::vector<double> psi(m), dpsi(m);
  for (std::size_t i = 0; i < m; ++i) {
    psi[i] = tr.psi(r[i]);
    dpsi[i] = tr.dpsi(r[i]);
  }
  for (std::size_t i = 0; i < m; ++i)
    if (!std::isfinite(psi[i]) || !std::isfinite(dpsi[i])) throw DomainError("transport map leaves the grid");
  if (!std::is_sorted(psi.begin(), psi.end())) throw DomainError("transport map is not monotone");

  std::vector<double> c0(m), c1(m), c2(m), c3(m), ca(m), cbf(m), cbg(m), cmass_f(m), cmass_g(m);
  double am_gm_worst = kInf;
  Link am_lhs{0, 0}, am_rhs{0, 0};
  for (std::size_t i = 0; i < m; ++i) {
    const double ri = r[i];
    const double fv = f.value(ri), gv = g.value(ri), df = f.derivative(ri);
    const double ratio = psi[i] / ri;
    const double geo = std::pow(dpsi[i] * std::pow(ratio, big_n - 1.0), 1.0 / big_n);
    const double ari = (dpsi[i] + (big_n - 1.0) * ratio) / big_n;
    const double rel = (ari - geo) / ari;
    if (rel < am_gm_worst) {
      am_gm_worst = rel;
      am_lhs = {geo, 0.0};
      am_rhs = {ari, 0.0};
    }
    c0[i] = sgn_pow(gv, gamma);
    c1[i] = sgn_pow(fv, gamma) * geo;
    c2[i] = sgn_pow(fv, gamma) * ari;
    c3[i] = gamma / big_n * sgn_pow(fv, gamma - 1.0) * std::abs(df) * psi[i];
    ca[i] = sgn_pow(df, p);
    cbf[i] = sgn_pow(fv, beta) * std::pow(psi[i], pc);
    cbg[i] = sgn_pow(gv, beta) * std::pow(ri, pc);
    cmass_f[i] = sgn_pow(fv, beta);
    cmass_g[i] = sgn_pow(g.value(psi[i]), beta) * dpsi[i] * std::pow(ratio, big_n - 1.0);
  }
  auto integral = [&](std::vector<double> u) {
    const QuadratureResult q = integrate_samples(r, std::move(u), big_n);
    return Link{scale * q.value, scale * q.error};
  };
  const Link mf = integral(cmass_f), mg = integral(cmass_g);
  rep.rows.push_back(make_row("mass_preservation", mf, mg, fl, true));

  const Link l0 = integral(c0), l1 = integral(c1), l2 = integral(c2), l3 = integral(c3);
  rep.rows.push_back(make_row("transport_change_of_variables", l0, l1, fl, true));
  rep.rows.push_back(make_row("am_gm_pointwise", am_lhs, am_rhs, 1e-10, tight));
  rep.rows.push_back(make_row("am_gm_integrated", l1, l2, fl, tight));
  rep.rows.push_back(make_row("integration_by_parts", l2, l3, fl, true));

  // Dual pairing and boundary flux at sampled points of the cone.
  RandomStream rng(options.seed, 0x7472616e73ULL);
  double pair_worst = -kInf;
  Link pair_lhs{0, 0}, pair_rhs{0, 0};
  for (int k = 0; k < options.samples; ++k) {
    const Vec dir = cone.sample_direction(rng);
    const double t = std::exp(rng.uniform(std::log(0.05), std::log(20.0)));
    const Vec y = t * dir / h.gauge(dir);
    const double rho = h.gauge(y);
    const Vec grad_f = f.derivative(rho) * h.gauge_gradient(y);
    const Vec tv = tr.map(y, h);
    const double lhs = -grad_f.dot(tv);
    const double rhs = h.value(grad_f) * h.gauge(tv);
    const double rel = (lhs - rhs) / std::max(rhs, std::numeric_limits<double>::min());
    if (rel > pair_worst) {
      pair_worst = rel;
      pair_lhs = {lhs, 0.0};
      pair_rhs = {rhs, 0.0};
    }
  }
  rep.rows.push_back(make_row("dual_pairing", pair_lhs, pair_rhs, 1e-8, true));
  if (cone.kind() != ConeKind::full_space) {
    double worst = -kInf;
    for (int k = 0; k < options.samples; ++k) {
      const Vec x = cone.sample_boundary_point(rng);
      Vec nu;
      try {
        nu = cone.normal_at(x);
      } catch (const DomainError&) {
        continue;
      }
      const Vec tv = tr.map(x, h);
      worst = std::max(worst, tv.dot(nu) / std::max(tv.norm(), 1e-300));
    }
    rep.rows.push_back(make_row("boundary_flux_sign", {worst, 0.0}, {0.0, 1e-12}, 0.0, false));
  }

  const Link a = integral(ca), bf = integral(cbf), bg = integral(cbg);
  auto holder = [&](const Link& b) {
    const double v = gamma / big_n * std::pow(a.value, 1.0 / p) * std::pow(b.value, 1.0 / pc);
    return Link{v, v * (a.error / (p * a.value) + b.error / (pc * b.value))};
  };
  const Link l4 = holder(bf);
  rep.rows.push_back(make_row("holder", l3, l4, fl, tight));
  rep.rows.push_back(make_row("transport_moment", bf, bg, fl, true));
  const Link fin = holder(bg);
  ChainRow last = make_row("sobolev_transport_inequality", l0, fin, fl, tight);
  if (options.expect == ChainExpectation::strict) last.pass = last.slack > last.tolerance;
  rep.rows.push_back(last);
  return rep;
}

VerificationReport check_weight_concavity_step(const Weight& w, const std::vector<std::pair<Vec, Vec>>& samples) {
  VerificationReport rep;
  rep.name = "weight_concavity";
  const double a = w.degree();
  if (!(a > 0.0)) throw InvalidSpec("weight concavity step needs a positive degree");
  double worst = -kInf, worst_eq = 0.0;
  long equal_cases = 0;
  for (const auto& [x, t] : samples) {
    const double wx = w.value(x), wt = w.value(t);
    if (!(wx > 0.0) || wt < 0.0) throw DomainError("samples must lie inside the weighted orthant");
    const double lhs = a * std::pow(wt / wx, 1.0 / a);
    const double rhs = w.gradient(x).dot(t) / wx;
    const double rel = (lhs - rhs) / std::max(std::abs(rhs), 1e-300);
    worst = std::max(worst, rel);
    // Equality exactly when T_i / x_i agree across the weighted coordinates.
    const auto& e = w.exponents();
    double lo = kInf, hi = -kInf;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0.0) continue;
      const double q = t[static_cast<Eigen::Index>(i)] / x[static_cast<Eigen::Index>(i)];
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    if (hi - lo <= 1e-12 * std::abs(hi)) {
      ++equal_cases;
      worst_eq = std::max(worst_eq, std::abs(rel));
    }
  }
  rep.add("weight_concavity_violation", std::to_string(samples.size()) + " samples", 0.0, std::max(worst, 0.0), 1e-12);
  if (equal_cases > 0)
    rep.add("weight_concavity_equality", std::to_string(equal_cases) + " proportional samples", 0.0, worst_eq, 1e-12);
  return rep;
}

std::vector<std::pair<Vec, Vec>> sample_weight_pairs(const Weight& w, int count, RandomStream& rng) {
  const int n = w.dim();
  const auto& e = w.exponents();
  std::vector<std::pair<Vec, Vec>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Vec x = rng.normal_vector(n), t = rng.normal_vector(n);
    for (std::size_t i = 0; i < e.size(); ++i) {
      const auto j = static_cast<Eigen::Index>(i);
      if (e[i] == 0.0) continue;
      x[j] = std::exp(x[j]);
      t[j] = std::exp(t[j]);
    }
    out.emplace_back(std::move(x), std::move(t));
  }
  return out;
}

}  // namespace conelab
