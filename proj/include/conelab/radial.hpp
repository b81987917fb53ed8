#pragma once

#include "conelab/types.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace conelab {

struct GridSpec {
  double r_min = 1e-4;
  double r_max = 1e6;
  double ratio = 1.02;
};

// Geometric grid r_i = r_min * q^i from r_min to r_max (both included). The
// node count is 1 mod 4 so Simpson's rule applies at spacings h and 2h; q is
// adjusted downward from `ratio` to land exactly on r_max.
std::vector<double> graded_grid(const GridSpec& spec);

// Samples of a radial function on a geometric grid. tail_decay is the asserted
// power-law decay exponent d of u beyond the last node (u ~ r^{-d}); infinity
// means the tail is negligible.
struct RadialProfile {
  std::vector<double> r;
  std::vector<double> u;
  double tail_decay = std::numeric_limits<double>::infinity();
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

// int_0^inf u(r) r^exponent dr: composite Simpson in log r, u constant on the
// head [0, r_0], analytic power-law tail. The error estimate is the Simpson
// h/2h difference plus head, tail and rounding contributions.
QuadratureResult radial_quadrature(const RadialProfile& g, double exponent);

// Convenience wrapper: sample g on the grid and integrate.
QuadratureResult integrate_radial(const std::function<double(double)>& g, double exponent,
                                  double tail_decay, const GridSpec& grid = {});

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace conelab
