#include "conelab/extremal.hpp"

#include "conelab/report.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace conelab {

DiscreteQuotient::DiscreteQuotient(const SobolevSetting& setting, std::vector<double> grid)
    : s_(setting), r_(std::move(grid)) {
  if (r_.size() < 3) throw InvalidSpec("discrete quotient needs at least three nodes");
  for (std::size_t i = 1; i < r_.size(); ++i)
    if (!(r_[i] > r_[i - 1])) throw InvalidSpec("grid must increase");
  if (!(r_[0] > 0.0)) throw InvalidSpec("grid must start above zero");
  if (!(s_.mu > 0.0)) throw InvalidSpec("sector measure must be positive");
  const double big_n = s_.big_n();
  const double p = s_.p;
  const double beta = s_.beta();
  decay_ = (big_n - p) / (p - 1.0);
  const std::size_t m = r_.size();
  stiff_.resize(m - 1);
  lump_.assign(m, 0.0);
  auto pw = [&](double r, double e) { return std::pow(r, e); };
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double a = r_[i], b = r_[i + 1], h = b - a;
    stiff_[i] = (pw(b, big_n) - pw(a, big_n)) / big_n / std::pow(h, p);
    // Exact integrals of the two hat pieces against r^{N-1}.
    const double moment1 = (pw(b, big_n + 1) - pw(a, big_n + 1)) / (big_n + 1);
    const double moment0 = (pw(b, big_n) - pw(a, big_n)) / big_n;
    const double right_of_a = (b * moment0 - moment1) / h;
    const double left_of_b = (moment1 - a * moment0) / h;
    lump_[i] += right_of_a;
    lump_[i + 1] += left_of_b;
  }
  lump_[0] += pw(r_[0], big_n) / big_n;
  const double rm = r_.back();
  lump_[m - 1] += pw(rm, big_n) / (beta * decay_ - big_n);
  tail_grad_ = std::pow(decay_ / rm, p) * pw(rm, big_n) / ((decay_ + 1.0) * p - big_n);

  // Tridiagonal p = 2 stiffness with tail, factored once (LDL^T).
  diag_.assign(m, 0.0);
  off_.assign(m - 1, 0.0);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double h = r_[i + 1] - r_[i];
    const double w = (pw(r_[i + 1], big_n) - pw(r_[i], big_n)) / big_n / (h * h);
    diag_[i] += w;
    diag_[i + 1] += w;
    off_[i] = -w;
  }
  diag_[m - 1] += std::pow(decay_ / rm, 2.0) * pw(rm, big_n) / std::max((decay_ + 1.0) * 2.0 - big_n, 1.0);
  const double floor = 1e-12 * *std::max_element(diag_.begin(), diag_.end());
  for (std::size_t i = 0; i < m; ++i) diag_[i] += floor * lump_[i] / lump_.back();
  for (std::size_t i = 1; i < m; ++i) {
    const double l = off_[i - 1] / diag_[i - 1];
    diag_[i] -= l * off_[i - 1];
    off_[i - 1] = l;  // now holds the multiplier
  }
}

double DiscreteQuotient::gradient_energy(const Vec& u) const {
  const double p = s_.p;
  double g = 0.0;
  for (std::size_t i = 0; i + 1 < r_.size(); ++i) {
    g += stiff_[i] * std::pow(std::abs(u[static_cast<Eigen::Index>(i + 1)] - u[static_cast<Eigen::Index>(i)]), p);
  }
  return g + tail_grad_ * std::pow(std::abs(u[u.size() - 1]), p);
}

double DiscreteQuotient::mass(const Vec& u) const {
  const double beta = s_.beta();
  double m = 0.0;
  for (std::size_t i = 0; i < r_.size(); ++i) m += lump_[i] * std::pow(std::abs(u[static_cast<Eigen::Index>(i)]), beta);
  return m;
}

double DiscreteQuotient::value(const Vec& u) const {
  if (static_cast<std::size_t>(u.size()) != r_.size()) throw InvalidSpec("profile size differs from grid");
  const double m = mass(u);
  if (!(m > 0.0)) throw DomainError("zero profile");
  const double scale = s_.big_n() * s_.mu;
  const double ratio = s_.p / s_.beta();
  return scale * gradient_energy(u) / std::pow(scale * m, ratio);
}

Vec DiscreteQuotient::gradient(const Vec& u) const {
  const double p = s_.p;
  const double beta = s_.beta();
  const double ratio = p / beta;
  const double scale = s_.big_n() * s_.mu;
  const double g = gradient_energy(u);
  const double m = mass(u);
  const auto n = u.size();
  Vec dg = Vec::Zero(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double d = u[i + 1] - u[i];
    const double f = stiff_[static_cast<std::size_t>(i)] * p * std::pow(std::abs(d), p - 1.0) * (d < 0 ? -1.0 : 1.0);
    dg[i + 1] += f;
    dg[i] -= f;
  }
  const double um = u[n - 1];
  dg[n - 1] += tail_grad_ * p * std::pow(std::abs(um), p - 1.0) * (um < 0 ? -1.0 : 1.0);
  Vec dm(n);
  for (Eigen::Index i = 0; i < n; ++i)
    dm[i] = lump_[static_cast<std::size_t>(i)] * beta * std::pow(std::abs(u[i]), beta - 1.0) * (u[i] < 0 ? -1.0 : 1.0);
  const double c = scale / std::pow(scale * m, ratio);
  return c * (dg - ratio * (g / m) * dm);
}

Vec DiscreteQuotient::normalize(const Vec& u) const {
  const double total = s_.big_n() * s_.mu * mass(u);
  if (!(total > 0.0)) throw DomainError("zero profile");
  return u * std::pow(total, -1.0 / s_.beta());
}

Vec DiscreteQuotient::precondition(const Vec& g) const {
  const std::size_t m = r_.size();
  std::vector<double> y(m);
  y[0] = g[0];
  for (std::size_t i = 1; i < m; ++i) y[i] = g[static_cast<Eigen::Index>(i)] - off_[i - 1] * y[i - 1];
  for (std::size_t i = 0; i < m; ++i) y[i] /= diag_[i];
  for (std::size_t i = m - 1; i-- > 0;) y[i] -= off_[i] * y[i + 1];
  return Eigen::Map<const Vec>(y.data(), static_cast<Eigen::Index>(m));
}

Vec DiscreteQuotient::precondition(const Vec& g, const Vec& u) const {
  const double p = s_.p;
  const std::size_t m = r_.size();
  double dmax = std::abs(u[u.size() - 1]) * decay_ / r_.back();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    dmax = std::max(dmax, std::abs(u[k + 1] - u[k]) / (r_[i + 1] - r_[i]));
  }
  if (!(dmax > 0.0)) return precondition(g);
  // p > 2: Hessian weights (slope/dmax)^{p-2} floored at 1e-10; p < 2: slopes floored at 1e-3 dmax.
  const double rel = p > 2.0 ? std::pow(1e-10, 1.0 / (p - 2.0)) : 1e-3;
  const double dfloor = rel * dmax;
  std::vector<double> diag(m, 0.0), off(m - 1, 0.0);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double h = r_[i + 1] - r_[i];
    const double slope = std::max(std::abs(u[k + 1] - u[k]) / h, dfloor);
    // stiff_ carries h^{-p}; the Hessian needs |d|^{p-2} h^{-p} = slope^{p-2} h^{-2}.
    const double w = p * (p - 1.0) * stiff_[i] * std::pow(h, p - 2.0) * std::pow(slope, p - 2.0);
    diag[i] += w;
    diag[i + 1] += w;
    off[i] = -w;
  }
  const double um = std::max(std::abs(u[u.size() - 1]), dfloor * r_.back() / decay_);
  diag[m - 1] += p * (p - 1.0) * tail_grad_ * std::pow(um, p - 2.0);
  const double floor = 1e-12 * *std::max_element(diag.begin(), diag.end());
  for (std::size_t i = 0; i < m; ++i) diag[i] += floor * lump_[i] / lump_.back();
  for (std::size_t i = 1; i < m; ++i) {
    const double l = off[i - 1] / diag[i - 1];
    diag[i] -= l * off[i - 1];
    off[i - 1] = l;
  }
  std::vector<double> y(m);
  y[0] = g[0];
  for (std::size_t i = 1; i < m; ++i) y[i] = g[static_cast<Eigen::Index>(i)] - off[i - 1] * y[i - 1];
  for (std::size_t i = 0; i < m; ++i) y[i] /= diag[i];
  for (std::size_t i = m - 1; i-- > 0;) y[i] -= off[i] * y[i + 1];
  return Eigen::Map<const Vec>(y.data(), static_cast<Eigen::Index>(m));
}

double DiscreteQuotient::log_centre(const Vec& u) const {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < r_.size(); ++i) {
    const double m = lump_[i] * std::pow(std::abs(u[static_cast<Eigen::Index>(i)]), s_.beta());
    num += m * std::log(r_[i]);
    den += m;
  }
  return num / den;
}

Vec DiscreteQuotient::log_centre_gradient(const Vec& u) const {
  const double beta = s_.beta();
  const double c = log_centre(u);
  const double den = mass(u);
  Vec g(u.size());
  for (std::size_t i = 0; i < r_.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    g[k] = lump_[i] * beta * std::pow(std::abs(u[k]), beta - 1.0) * (std::log(r_[i]) - c) / den;
  }
  return g;
}

RadialProfile DiscreteQuotient::profile(const Vec& u) const {
  RadialProfile p;
  p.r = r_;
  p.u.assign(u.data(), u.data() + u.size());
  p.tail_decay = decay_;
  return p;
}

Vec DiscreteQuotient::sample(const std::function<double(double)>& f) const {
  Vec u(static_cast<Eigen::Index>(r_.size()));
  for (std::size_t i = 0; i < r_.size(); ++i) u[static_cast<Eigen::Index>(i)] = f(r_[i]);
  return u;
}

MinimizeResult minimize(const DiscreteQuotient& q, const Vec& init, const MinimizeOptions& options) {
  if (static_cast<std::size_t>(init.size()) != q.size()) throw InvalidSpec("initial profile size differs from grid");
  if ((init.array() < 0.0).any() || !(init.array() > 0.0).any())
    throw InvalidSpec("initial profile must be non-negative and nonzero");
  MinimizeResult out;
  Vec u = q.normalize(init);
  double j = q.value(u);
  Vec g = q.gradient(u);
  out.trace.push_back({0, j, 0.0, g.norm()});
  struct Pair {
    Vec s, y;
    double rho;
  };
  std::deque<Pair> hist;
  // Preconditioner frozen at a reference profile, refreshed with the memory.
  Vec ref = u;
  double ref_scale = q.gradient_energy(u) / j;
  long since_refresh = 0;
  bool fallback = false;  // p = 2 Riesz map for one step
  auto restart = [&](const Vec& at, double j_at) {
    ref = at;
    ref_scale = q.gradient_energy(at) / j_at;
    hist.clear();
    since_refresh = 0;
  };
  auto fresh = [&] { return hist.empty() && since_refresh == 0; };
  auto escalate = [&] {
    if (!fresh()) {
      restart(u, j);
      return true;
    }
    if (!fallback && q.exponent() != 2.0) {
      fallback = true;
      return true;
    }
    return false;
  };
  // Inverse Hessian estimate: preconditioner wrapped in the L-BFGS two-loop recursion.
  auto apply_h = [&](const Vec& x) {
    std::vector<double> alpha(hist.size());
    Vec v = x;
    for (std::size_t k = hist.size(); k-- > 0;) {
      alpha[k] = hist[k].rho * hist[k].s.dot(v);
      v -= alpha[k] * hist[k].y;
    }
    // Newton-like scaling: on the constraint set the Hessian of J is about (J/G) D^2 G.
    v = q.exponent() == 2.0 || fallback ? Vec(0.5 * ref_scale * q.precondition(v)) : Vec(ref_scale * q.precondition(v, ref));
    for (std::size_t k = 0; k < hist.size(); ++k) v += (alpha[k] - hist[k].rho * hist[k].y.dot(v)) * hist[k].s;
    return v;
  };
  auto direction = [&](const Vec& grad) {
    Vec hg = apply_h(grad);
    if (options.pin_dilation) {
      // Keep the log-centre fixed to first order (H-orthogonal projection).
      const Vec c = q.log_centre_gradient(u);
      const Vec hc = apply_h(c);
      const double chc = c.dot(hc);
      if (chc > 0.0) hg -= (c.dot(hg) / chc) * hc;
    }
    return Vec(-hg);
  };
  for (long it = 1; it <= options.max_iterations; ++it) {
    Vec dir = direction(g);
    double slope = g.dot(dir);
    while (!(slope < 0.0) && escalate()) {
      dir = direction(g);
      slope = g.dot(dir);
    }
    if (!(slope < 0.0)) {
      out.status = "no descent direction";
      out.converged = true;
      break;
    }
    double t = options.initial_step;
    Vec trial;
    double jt = 0.0;
    bool accepted = false;
    while (t > 1e-20) {
      trial = (u + t * dir).cwiseMax(0.0);
      const double top = trial.maxCoeff();
      if (top > 0.0 && std::isfinite(top)) trial /= top;  // J is 0-homogeneous; keeps u^beta in range
      if (top > 0.0 && std::isfinite(top) && q.mass(trial) > 0.0) {
        jt = q.value(trial);
        if (std::isfinite(jt) && jt > 0.0 && jt <= j + options.armijo * t * slope) {
          accepted = true;
          break;
        }
      }
      t *= options.shrink;
    }
    if (!accepted && escalate()) {
      --it;
      continue;
    }
    if (!accepted) {
      out.status = "line search stalled at rounding level";
      out.converged = true;
      break;
    }
    const Vec un = q.normalize(trial);
    const Vec gn = q.gradient(un);
    fallback = false;
    if (++since_refresh >= options.refresh) {
      restart(un, jt);
    } else if (options.memory > 0) {
      Pair pr{un - u, gn - g, 0.0};
      const double sy = pr.s.dot(pr.y);
      if (sy > 1e-12 * pr.s.norm() * pr.y.norm()) {
        pr.rho = 1.0 / sy;
        hist.push_back(std::move(pr));
        if (hist.size() > static_cast<std::size_t>(options.memory)) hist.pop_front();
      }
    }
    u = un;
    j = jt;
    g = gn;
    out.trace.push_back({it, j, t, g.norm()});
    const auto w = static_cast<std::size_t>(options.window);
    if (out.trace.size() > w) {
      const double old = out.trace[out.trace.size() - 1 - w].j;
      if ((old - j) / j < options.rel_tol) {
        out.converged = true;
        out.status = "relative decrease below tolerance";
        break;
      }
    }
  }
  if (out.status.empty()) out.status = "iteration cap reached";
  out.u = u;
  return out;
}

BubbleFit fit_bubble(const std::vector<double>& r, const Vec& u, double big_n, double p, double r_lo,
                     double r_hi) {
  const double pc = p / (p - 1.0);
  const double m = (big_n - p) / p;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i] >= r_lo && r[i] <= r_hi) idx.push_back(i);
  if (idx.size() < 3) throw InvalidSpec("fit window holds fewer than three nodes");
  // For fixed lambda the best amplitude in the relative sup norm balances the
  // extreme ratios u / shape.
  auto error_at = [&](double log_lambda, double* amp) {
    const double lp = std::exp(pc * log_lambda);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i : idx) {
      const double shape = std::pow(lp + std::pow(r[i], pc), -m);
      const double ratio = u[static_cast<Eigen::Index>(i)] / shape;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    const double a = 0.5 * (lo + hi);
    if (amp) *amp = a;
    return (hi - lo) / (hi + lo);
  };
  // Coarse scan, then Brent on the best bracket.
  double best = 0.0, best_err = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 80; ++k) {
    const double ll = std::log(1e-2) + k * (std::log(1e2) - std::log(1e-2)) / 80.0;
    const double e = error_at(ll, nullptr);
    if (e < best_err) {
      best_err = e;
      best = ll;
    }
  }
  const double step = (std::log(1e2) - std::log(1e-2)) / 80.0;
  const auto res = boost::math::tools::brent_find_minima([&](double ll) { return error_at(ll, nullptr); },
                                                         best - step, best + step, 40);
  BubbleFit fit;
  fit.lambda = std::exp(res.first);
  fit.linf_rel_error = error_at(res.first, &fit.amplitude);
  return fit;
}

std::string to_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream os;
  os << "iteration,J,step,grad_norm\n";
  for (const auto& t : trace)
    os << t.iteration << ',' << format_double(t.j) << ',' << format_double(t.step) << ',' << format_double(t.grad_norm)
       << '\n';
  return os.str();
}

std::string profile_csv(const std::vector<double>& r, const Vec& u) {
  std::ostringstream os;
  os << "r,u\n";
  for (std::size_t i = 0; i < r.size(); ++i) os << format_double(r[i]) << ',' << format_double(u[static_cast<Eigen::Index>(i)]) << '\n';
  return os.str();
}

}  // namespace conelab
