#include "conelab/radial.hpp"

#include <cmath>
#include <limits>

namespace conelab {

std::vector<double> graded_grid(const GridSpec& spec) {
  if (!(spec.r_min > 0.0 && spec.r_max > spec.r_min && spec.ratio > 1.0))
    throw InvalidSpec("graded grid needs 0 < r_min < r_max and ratio > 1");
  const double span = std::log(spec.r_max / spec.r_min);
  long intervals = static_cast<long>(std::ceil(span / std::log(spec.ratio) - 1e-9));
  intervals = ((intervals + 3) / 4) * 4;
  const double ds = span / static_cast<double>(intervals);
  std::vector<double> r(static_cast<std::size_t>(intervals + 1));
  const double s0 = std::log(spec.r_min);
  for (long i = 0; i <= intervals; ++i) r[static_cast<std::size_t>(i)] = std::exp(s0 + ds * static_cast<double>(i));
  r.back() = spec.r_max;
  return r;
}

namespace {

double simpson(const std::vector<double>& f, std::size_t stride, double ds) {
  // f sampled at equal spacing ds (before striding); number of panels even.
  const std::size_t last = f.size() - 1;
  double acc = f[0] + f[last];
  bool odd = true;
  for (std::size_t i = stride; i < last; i += stride, odd = !odd) acc += (odd ? 4.0 : 2.0) * f[i];
  return acc * ds * static_cast<double>(stride) / 3.0;
}

}  // namespace

QuadratureResult radial_quadrature(const RadialProfile& g, double exponent) {
  const std::size_t m = g.r.size();
  if (m != g.u.size()) throw InvalidSpec("profile grid and values differ in length");
  if (m < 5 || (m - 1) % 4 != 0) throw InvalidSpec("quadrature needs 4k+1 nodes");
  if (!(exponent > -1.0)) throw IntegrabilityError("integrand is not integrable at the origin");
  const double ds = std::log(g.r[1] / g.r[0]);
  for (std::size_t i = 1; i < m; ++i) {
    if (std::abs(std::log(g.r[i] / g.r[i - 1]) - ds) > 1e-9 * ds)
      throw InvalidSpec("quadrature grid must be geometric");
  }
  const double e1 = exponent + 1.0;
  // Substitution r = e^s: int u r^e dr = int u r^{e+1} ds.
  std::vector<double> f(m);
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    f[i] = g.u[i] * std::pow(g.r[i], e1);
    abs_sum += std::abs(f[i]);
  }
  const double fine = simpson(f, 1, ds);
  const double coarse = simpson(f, 2, ds);

  QuadratureResult out;
  out.value = fine;
  out.error = std::abs(fine - coarse) / 15.0 + 64.0 * std::numeric_limits<double>::epsilon() * abs_sum * ds;

  const double head = f[0] / e1;
  out.value += head;
  out.error += std::abs(g.u[1] - g.u[0]) * std::pow(g.r[0], e1) / e1;

  const double un = g.u[m - 1];
  const double rn = g.r[m - 1];
  if (std::isfinite(g.tail_decay)) {
    if (g.tail_decay <= e1) throw IntegrabilityError("tail decay too weak for this moment");
    const double tail = un * std::pow(rn, e1) / (g.tail_decay - e1);
    out.value += tail;
    const double up = g.u[m - 2];
    if (un != 0.0 && up != 0.0 && (un > 0) == (up > 0)) {
      const double local = -std::log(un / up) / std::log(rn / g.r[m - 2]);
      // The mismatch is a first-order estimate of the neglected correction; doubled.
      out.error += local > e1 ? 2.0 * std::abs(un * std::pow(rn, e1) / (local - e1) - tail) : std::abs(tail);
    } else {
      out.error += std::abs(tail);
    }
  } else {
    out.error += std::abs(un) * std::pow(rn, e1) * ds;
  }
  return out;
}

QuadratureResult integrate_radial(const std::function<double(double)>& g, double exponent,
                                  double tail_decay, const GridSpec& grid) {
  RadialProfile prof;
  prof.r = graded_grid(grid);
  prof.u.reserve(prof.r.size());
  for (double r : prof.r) prof.u.push_back(g(r));
  prof.tail_decay = tail_decay;
  return radial_quadrature(prof, exponent);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidSpec("slope fit needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("log-log fit needs positive data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

}  // namespace conelab
