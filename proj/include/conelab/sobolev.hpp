#pragma once

#include "conelab/bubble.hpp"
#include "conelab/cone.hpp"
#include "conelab/norm.hpp"
#include "conelab/radial.hpp"
#include "conelab/report.hpp"

#include <functional>
#include <vector>

namespace conelab {

// A decreasing profile u(r) of r = rho(x - x0) with its derivative and its
// power-law decay exponent (u ~ r^{-decay}).
struct RadialFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  double decay = 0.0;
};

RadialFunction radial_function(const Bubble& b);

// Problem data shared by the functional: n, p, the weight, and the sector
// measure of the cone (closed form or Monte Carlo).
struct SobolevSetting {
  int n = 3;
  double p = 2.0;
  double a = 0.0;
  double mu = 0.0;
  double mu_error = 0.0;
  GridSpec grid;

  double big_n() const { return n + a; }
  double beta() const { return p * big_n() / (big_n() - p); }
};

SobolevSetting make_setting(int n, double p, const Norm& h, const Cone& cone, const Weight& w,
                            const SectorMeasureOptions& mc = {}, const GridSpec& grid = {});

struct QuotientResult {
  double numerator = 0.0;    // int H^p(grad u) w
  double denominator = 0.0;  // (int u^beta w)^{p/beta}
  double quotient = 0.0;
  double numerator_error = 0.0;
  double denominator_error = 0.0;
  double quotient_error = 0.0;  // relative errors propagated to J, absolute
  double quadrature_error = 0.0;  // radial quadrature share of quotient_error
  double measure_error = 0.0;     // sector-measure share
};

QuotientResult quotient(const RadialFunction& u, const SobolevSetting& s);
QuotientResult quotient(const Bubble& b, const SobolevSetting& s);

// J at the calibrated bubble (lambda = 1).
QuotientResult sharp_constant(const Norm& h, const Cone& cone, const Weight& w, int n, double p,
                              const SectorMeasureOptions& mc = {}, const GridSpec& grid = {});

// Criticality and local minimality of J at a bubble under compactly supported
// perturbations: a radial bump, a product bump off the centre (non-radial),
// and, for pointed circular cones with Euclidean H, translation of x0 along
// the axis.
struct PerturbationOptions {
  std::vector<double> eps = {1e-2, -1e-2, 1e-3, -1e-3};
  double bump_center = 1.0;
  double bump_radius = 0.5;
  int gauss_nodes = 24;
};

VerificationReport perturbation_test(const Bubble& b, const Cone& cone, const Weight& w,
                                     const SobolevSetting& s, const PerturbationOptions& options = {});

// J for the Euclidean bubble of a circular cone translated to x0 = t * axis.
double translated_quotient(const Bubble& b, const Cone& cone, double t);

// (p/(n-p))^{p-1} int v^{-n-1} = (n/p) int v^{-n-1} H^p(grad v).
VerificationReport check_identity_v(const Bubble& b, const SobolevSetting& s);

// A radial v-profile with two derivatives; v increasing.
struct RadialV {
  std::function<double(double)> v, dv, d2v;
  double growth = 0.0;  // v ~ r^{growth}
};

RadialV radial_v(const Bubble& b);

// Integral of 2 v^g S2(W) + g(g-1)p(p-1) v^{g-2} V^2 + g(2p-1) v^{g-1} V Delta_p v
// and its companion Newton-slack integral int v^g ((n-1)/n tr(W)^2 - 2 S2(W)).
struct IntegralInequality {
  QuadratureResult value;
  QuadratureResult newton_slack;
};

IntegralInequality integral_inequality(const RadialV& v, const SobolevSetting& s, double gamma);
VerificationReport check_integral_inequality(const Bubble& b, const SobolevSetting& s, double gamma);

// I(r) = int_{K_r cap Sigma} |D a(grad u)|^2 u^gamma (u-version) or
// int |D a(grad v)|^2 v^sigma (v-version) over gauge balls about x0.
enum class CaccioppoliKind { u_version, v_version };

struct CaccioppoliResult {
  std::vector<double> r;
  std::vector<double> integral;
  double slope = 0.0;
  double bound = 0.0;
};

CaccioppoliResult caccioppoli_scaling(const Bubble& b, const Cone& cone, const SobolevSetting& s,
                                      CaccioppoliKind kind, double exponent,
                                      const std::vector<double>& r_list);
VerificationReport check_caccioppoli(const Bubble& b, const Cone& cone, const SobolevSetting& s,
                                     CaccioppoliKind kind, double exponent,
                                     const std::vector<double>& r_list);

}  // namespace conelab
