#pragma once

#include "conelab/bubble.hpp"
#include "conelab/cone.hpp"
#include "conelab/norm.hpp"
#include "conelab/report.hpp"
#include "conelab/types.hpp"

#include <functional>
#include <memory>

namespace conelab {

// A smooth scalar field. Derivatives default to 4th-order central differences
// with step 1e-3 max(1, |x|); analytic fields override them.
class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual int dim() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const;
  virtual Mat hessian(const Vec& x) const;
};

class FunctionField : public ScalarField {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  using HessFn = std::function<Mat(const Vec&)>;

  FunctionField(int n, ValueFn value, GradFn grad = {}, HessFn hess = {})
      : n_(n), value_(std::move(value)), grad_(std::move(grad)), hess_(std::move(hess)) {}

  int dim() const override { return n_; }
  double value(const Vec& x) const override { return value_(x); }
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;

 private:
  int n_;
  ValueFn value_;
  GradFn grad_;
  HessFn hess_;
};

// u = U and v = U^{-p/(N-p)} of a bubble, with closed-form derivatives.
class BubbleField : public ScalarField {
 public:
  explicit BubbleField(Bubble b) : b_(std::move(b)) {}
  int dim() const override { return b_.dim(); }
  double value(const Vec& x) const override { return b_.value(x); }
  Vec gradient(const Vec& x) const override { return b_.gradient(x); }
  Mat hessian(const Vec& x) const override { return b_.hessian(x); }

 private:
  Bubble b_;
};

class BubbleVField : public ScalarField {
 public:
  explicit BubbleVField(Bubble b) : b_(std::move(b)) {}
  int dim() const override { return b_.dim(); }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;

 private:
  Bubble b_;
};

// Analytic test fields: 1 + |x|^2, 1 + |x|^2 + x_1^3, and
// exp(0.3 x_1 + 0.1 x_2) + |x|^2 / 2 + 1.
FunctionField bowl_field(int n);
FunctionField cubic_control_field(int n);
FunctionField exp_mix_field(int n);

// Below this |grad| pointwise checks refuse to run when p < 2.
inline constexpr double kDegenerateGradient = 1e-6;

// div a(grad u) by central differences of the analytic gradient (order 2 or 4).
double finsler_p_laplacian(const ScalarField& u, const Norm& h, double p, const Vec& x, double step,
                           int order = 2);

// Delta_p^H U + U^{p*-1} at an interior point.
double pde_residual(const Bubble& b, const Cone& cone, const Vec& x, double step);
// a(grad U) . nu at a smooth boundary point.
double neumann_residual(const Bubble& b, const Cone& cone, const Vec& x);
// div(w a(grad U)) + w U^{beta-1}.
double weighted_residual(const Bubble& b, const Weight& w, const Vec& x, double step);

double s2(const Mat& m);
Mat s2_cofactor(const Mat& m);

// S2(BC) <= (n-1)/(2n) tr(BC)^2 and the equality clause.
VerificationReport check_newton(const Mat& b_psd, const Mat& c_sym);

struct WMatrix {
  Mat w;
  double fd_error = 0.0;  // elementwise error bound of the difference quotient
};

// Jacobian of x -> a(grad v(x)) by 4th-order central differences.
WMatrix w_matrix(const ScalarField& v, const Norm& h, double p, const Vec& x, double step);
// Da(grad v) D^2 v from the analytic Hessian.
Mat w_matrix_exact(const ScalarField& v, const Norm& h, double p, const Vec& x);
// max |W - (tr W / n) Id|.
double off_identity_deviation(const Mat& w);

struct Lemma31Terms {
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 0.0;  // 1 + sum of term magnitudes
};

Lemma31Terms lemma31_terms(const ScalarField& v, const Norm& h, double p, double gamma, const Vec& x,
                           double step);
// PASS iff |lhs - rhs| <= constant * step * scale.
VerificationReport check_lemma31_identity(const ScalarField& v, const Norm& h, double p, double gamma,
                                          const Vec& x, double step, double constant = 1.0);

}  // namespace conelab
