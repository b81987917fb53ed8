#pragma once

#include "conelab/cone.hpp"
#include "conelab/norm.hpp"
#include "conelab/report.hpp"
#include "conelab/types.hpp"

namespace conelab {

struct BubbleParams {
  int n = 3;
  double p = 2.0;
  double a = 0.0;  // weight degree
  double lambda = 1.0;
  Vec x0;          // empty means the origin
  double c = 0.0;  // calibration constant
};

// N^{1/p} ((N - p)/(p - 1))^{(p-1)/p}, N = n + a.
double talenti_constant(double big_n, double p);

// Validates 1 < p < n, a >= 0, lambda > 0.
void validate_exponents(int n, double p, double a);

// U(x) = K (lambda^{p'} + rho(x - x0)^{p'})^{-(N-p)/p} with K = (lambda^{1/(p-1)} c)^{(N-p)/p},
// rho = H.gauge. Also exposes its v-transform v = U^{-p/(N-p)} = c1 + c2 rho^{p'}.
class Bubble {
 public:
  Bubble(BubbleParams params, Norm norm);

  const BubbleParams& params() const { return params_; }
  const Norm& norm() const { return norm_; }
  int dim() const { return params_.n; }
  double big_n() const { return params_.n + params_.a; }
  double p() const { return params_.p; }
  double p_conj() const { return params_.p / (params_.p - 1.0); }
  // Critical exponent p(n+a)/(n+a-p).
  double beta() const;
  double amplitude() const { return amplitude_; }
  // Power-law decay exponent (N-p)/(p-1) of the profile.
  double decay() const;

  // Radial profile phi(r) and its first two derivatives.
  double profile(double r) const;
  double profile_d1(double r) const;
  double profile_d2(double r) const;

  double radius(const Vec& x) const;
  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;  // DomainError at x0
  Mat hessian(const Vec& x) const;

  double v_c1() const;
  double v_c2() const;
  double v_value(const Vec& x) const;

  // Same bubble with another scale or centre.
  Bubble with_lambda(double lambda) const;
  Bubble with_center(const Vec& x0) const;

 private:
  Vec offset(const Vec& x) const;
  BubbleParams params_;
  Norm norm_;
  double amplitude_;
};

double bubble_eval(const BubbleParams& b, const Norm& h, const Vec& x);
Vec bubble_grad(const BubbleParams& b, const Norm& h, const Vec& x);
double v_transform(const BubbleParams& b, const Norm& h, const Vec& x);

// Vertex placement: the projection of `requested` onto the lineality space of
// the cone (any point for R^n, R^k x {O} for products, O for pointed cones).
Vec admissible_center(const Cone& cone, const Vec& requested);

struct CalibrationOptions {
  int points = 101;
  double r_lo = 0.1;   // in units of lambda
  double r_hi = 10.0;
  double tolerance = 1e-7;  // relative least-squares residual
};

// Least-squares fit of c so that the radial profile annihilates
// div(w a(grad U)) + w U^{beta-1}. Throws ConvergenceError when the fitted
// residual stays above tolerance.
double calibrate_constant(int n, double p, double a, const Norm& h, const Weight& w, const Cone& cone,
                          const CalibrationOptions& options = {});
// Relative residual of the radial equation for a given c.
double calibration_residual(int n, double p, double a, double c, const CalibrationOptions& options = {});

// Bubble with calibrated constant, lambda and admissible centre.
Bubble make_bubble(int n, double p, const Norm& h, const Weight& w, const Cone& cone, double lambda = 1.0,
                   const Vec& requested_center = Vec());

VerificationReport check_decay(const Bubble& bubble, const Cone& cone);

}  // namespace conelab
