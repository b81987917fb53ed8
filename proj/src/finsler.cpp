#include "conelab/finsler.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <limits>

namespace conelab {

namespace {

double default_step(const Vec& x) { return 1e-3 * std::max(1.0, x.norm()); }

template <class F>
std::invoke_result_t<F, const Vec&> central4(const F& f, const Vec& x, int j, double h) {
  Vec e = Vec::Zero(x.size());
  e[j] = h;
  return ((f(x - 2 * e) - f(x + 2 * e)) + 8.0 * (f(x + e) - f(x - e))) / (12.0 * h);
}

template <class F>
std::invoke_result_t<F, const Vec&> central2(const F& f, const Vec& x, int j, double h) {
  Vec e = Vec::Zero(x.size());
  e[j] = h;
  return (f(x + e) - f(x - e)) / (2.0 * h);
}

void guard_gradient(const Vec& g, double p) {
  if (p < 2.0 && g.norm() < kDegenerateGradient)
    throw DomainError("degenerate point: gradient vanishes and p < 2");
}

}  // namespace

Vec ScalarField::gradient(const Vec& x) const {
  const double h = default_step(x);
  Vec g(x.size());
  auto f = [this](const Vec& y) { return value(y); };
  for (int j = 0; j < x.size(); ++j) g[j] = central4(f, x, j, h);
  return g;
}

Mat ScalarField::hessian(const Vec& x) const {
  const double h = default_step(x);
  const auto n = x.size();
  Mat m(n, n);
  auto g = [this](const Vec& y) -> Vec { return gradient(y); };
  for (int j = 0; j < n; ++j) m.col(j) = central4(g, x, j, h);
  return 0.5 * (m + m.transpose());
}

Vec FunctionField::gradient(const Vec& x) const {
  return grad_ ? grad_(x) : ScalarField::gradient(x);
}

Mat FunctionField::hessian(const Vec& x) const {
  return hess_ ? hess_(x) : ScalarField::hessian(x);
}

double BubbleVField::value(const Vec& x) const {
  return b_.v_c1() + b_.v_c2() * std::pow(b_.radius(x), b_.p_conj());
}

Vec BubbleVField::gradient(const Vec& x) const {
  const Vec y = x - b_.params().x0;
  const double r = b_.norm().gauge(y);
  if (r == 0.0) return Vec::Zero(x.size());
  const double pc = b_.p_conj();
  return b_.v_c2() * pc * std::pow(r, pc - 1.0) * b_.norm().gauge_gradient(y);
}

Mat BubbleVField::hessian(const Vec& x) const {
  const Vec y = x - b_.params().x0;
  const double r = b_.norm().gauge(y);
  if (r == 0.0) throw DomainError("v hessian undefined at the centre");
  const double pc = b_.p_conj();
  const Vec g = b_.norm().gauge_gradient(y);
  return b_.v_c2() * pc *
         ((pc - 1.0) * std::pow(r, pc - 2.0) * g * g.transpose() +
          std::pow(r, pc - 1.0) * b_.norm().gauge_hessian(y));
}

FunctionField bowl_field(int n) {
  return FunctionField(
      n, [](const Vec& x) { return 1.0 + x.squaredNorm(); }, [](const Vec& x) -> Vec { return 2.0 * x; },
      [n](const Vec&) -> Mat { return 2.0 * Mat::Identity(n, n); });
}

FunctionField cubic_control_field(int n) {
  return FunctionField(
      n, [](const Vec& x) { return 1.0 + x.squaredNorm() + x[0] * x[0] * x[0]; },
      [](const Vec& x) -> Vec {
        Vec g = 2.0 * x;
        g[0] += 3.0 * x[0] * x[0];
        return g;
      },
      [n](const Vec& x) -> Mat {
        Mat h = 2.0 * Mat::Identity(n, n);
        h(0, 0) += 6.0 * x[0];
        return h;
      });
}

FunctionField exp_mix_field(int n) {
  Vec c = Vec::Zero(n);
  c[0] = 0.3;
  c[1] = 0.1;
  return FunctionField(
      n, [c](const Vec& x) { return std::exp(c.dot(x)) + 0.5 * x.squaredNorm() + 1.0; },
      [c](const Vec& x) -> Vec { return std::exp(c.dot(x)) * c + x; },
      [c, n](const Vec& x) -> Mat {
        return std::exp(c.dot(x)) * c * c.transpose() + Mat::Identity(n, n);
      });
}

double finsler_p_laplacian(const ScalarField& u, const Norm& h, double p, const Vec& x, double step,
                           int order) {
  if (!(step > 0.0)) throw InvalidSpec("finite-difference step must be positive");
  if (order != 2 && order != 4) throw InvalidSpec("stencil order must be 2 or 4");
  guard_gradient(u.gradient(x), p);
  double div = 0.0;
  for (int j = 0; j < x.size(); ++j) {
    auto aj = [&](const Vec& y) { return h.a_map(p, u.gradient(y))[j]; };
    div += order == 2 ? central2(aj, x, j, step) : central4(aj, x, j, step);
  }
  return div;
}

double pde_residual(const Bubble& b, const Cone& cone, const Vec& x, double step) {
  if (b.params().a != 0.0) throw InvalidSpec("pde_residual is for unweighted bubbles; use weighted_residual");
  if (!cone.contains(x) || cone.boundary_distance(x) <= 0.0)
    throw InvalidSpec("pde_residual needs an interior point");
  const BubbleField u(b);
  return finsler_p_laplacian(u, b.norm(), b.p(), x, step) + std::pow(b.value(x), b.beta() - 1.0);
}

double neumann_residual(const Bubble& b, const Cone& cone, const Vec& x) {
  const Vec nu = cone.normal_at(x);
  return b.norm().a_map(b.p(), b.gradient(x)).dot(nu);
}

double weighted_residual(const Bubble& b, const Weight& w, const Vec& x, double step) {
  if (!(step > 0.0)) throw InvalidSpec("finite-difference step must be positive");
  for (std::size_t i = 0; i < w.exponents().size(); ++i) {
    if (w.exponents()[i] > 0.0 && x[static_cast<Eigen::Index>(i)] <= step)
      throw InvalidSpec("weighted_residual needs the stencil inside the weight support");
  }
  guard_gradient(b.gradient(x), b.p());
  double div = 0.0;
  for (int j = 0; j < x.size(); ++j) {
    auto flux = [&](const Vec& y) { return w.value(y) * b.norm().a_map(b.p(), b.gradient(y))[j]; };
    div += central2(flux, x, j, step);
  }
  return div + w.value(x) * std::pow(b.value(x), b.beta() - 1.0);
}

double s2(const Mat& m) {
  const double tr = m.trace();
  return 0.5 * (tr * tr - (m * m).trace());
}

Mat s2_cofactor(const Mat& m) {
  return -m.transpose() + m.trace() * Mat::Identity(m.rows(), m.cols());
}

VerificationReport check_newton(const Mat& b_psd, const Mat& c_sym) {
  const auto n = b_psd.rows();
  if (b_psd.cols() != n || c_sym.rows() != n || c_sym.cols() != n || n < 2)
    throw InvalidSpec("Newton check needs square matrices of equal size n >= 2");
  const double sb = std::max(1.0, b_psd.cwiseAbs().maxCoeff());
  const double sc = std::max(1.0, c_sym.cwiseAbs().maxCoeff());
  if ((b_psd - b_psd.transpose()).cwiseAbs().maxCoeff() > 1e-12 * sb) throw InvalidSpec("B is not symmetric");
  if ((c_sym - c_sym.transpose()).cwiseAbs().maxCoeff() > 1e-12 * sc) throw InvalidSpec("C is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(b_psd);
  if (es.eigenvalues().minCoeff() < -1e-12 * sb) throw InvalidSpec("B is not positive semi-definite");

  const Mat m = b_psd * c_sym;
  const double tr = m.trace();
  const double lhs = s2(m);
  const double rhs = (n - 1.0) / (2.0 * n) * tr * tr;
  const double scale = std::max(1.0, std::abs(rhs));
  VerificationReport rep;
  rep.name = "newton";
  rep.add("newton_inequality", "", 0.0, lhs - rhs, 1e-12 * scale);
  if (tr != 0.0 && std::abs(rhs - lhs) <= 1e-9 * scale) {
    const double dev = off_identity_deviation(m);
    const double diag_dev = (m.diagonal().array() - tr / n).abs().maxCoeff();
    rep.add("newton_equality_identity", "", 0.0, std::max(dev, diag_dev), 1e-8 * std::abs(tr));
  }
  return rep;
}

WMatrix w_matrix(const ScalarField& v, const Norm& h, double p, const Vec& x, double step) {
  if (!(step > 0.0)) throw InvalidSpec("finite-difference step must be positive");
  guard_gradient(v.gradient(x), p);
  const auto n = x.size();
  auto a = [&](const Vec& y) -> Vec { return h.a_map(p, v.gradient(y)); };
  WMatrix out;
  out.w.resize(n, n);
  Mat coarse(n, n);
  for (int j = 0; j < n; ++j) {
    out.w.col(j) = central4(a, x, j, step);
    coarse.col(j) = central4(a, x, j, 2.0 * step);
  }
  const double amax = std::max(1.0, a(x).cwiseAbs().maxCoeff());
  out.fd_error = (out.w - coarse).cwiseAbs().maxCoeff() / 15.0 +
                 16.0 * std::numeric_limits<double>::epsilon() * amax / step;
  return out;
}

Mat w_matrix_exact(const ScalarField& v, const Norm& h, double p, const Vec& x) {
  const Vec g = v.gradient(x);
  guard_gradient(g, p);
  return h.a_jacobian(p, g) * v.hessian(x);
}

double off_identity_deviation(const Mat& w) {
  const auto n = w.rows();
  return (w - (w.trace() / static_cast<double>(n)) * Mat::Identity(n, n)).cwiseAbs().maxCoeff();
}

Lemma31Terms lemma31_terms(const ScalarField& v, const Norm& h, double p, double gamma, const Vec& x,
                           double step) {
  if (!(step > 0.0)) throw InvalidSpec("finite-difference step must be positive");
  const double v0 = v.value(x);
  if (!(v0 > 0.0)) throw DomainError("the identity needs v > 0");
  const Vec g0 = v.gradient(x);
  guard_gradient(g0, p);

  struct Local {
    double v, big_v, tr;
    Mat w;
    Vec a;
  };
  auto local = [&](const Vec& y) {
    Local l;
    l.v = v.value(y);
    const Vec g = v.gradient(y);
    l.big_v = std::pow(h.value(g), p) / p;
    l.a = h.a_map(p, g);
    l.w = h.a_jacobian(p, g) * v.hessian(y);
    l.tr = l.w.trace();
    return l;
  };
  auto flux = [&](const Vec& y) -> Vec {
    const Local l = local(y);
    return std::pow(l.v, gamma) * (s2_cofactor(l.w).transpose() * l.a) +
           gamma * (p - 1.0) * std::pow(l.v, gamma - 1.0) * l.big_v * l.a;
  };
  double div = 0.0;
  for (int j = 0; j < x.size(); ++j) {
    auto fj = [&](const Vec& y) { return flux(y)[j]; };
    div += central2(fj, x, j, step);
  }
  const Local l = local(x);
  const double t1 = gamma * (gamma - 1.0) * p * (p - 1.0) * std::pow(l.v, gamma - 2.0) * l.big_v * l.big_v;
  const double t2 = gamma * (2.0 * p - 1.0) * std::pow(l.v, gamma - 1.0) * l.big_v * l.tr;
  Lemma31Terms out;
  out.lhs = 2.0 * std::pow(l.v, gamma) * s2(l.w);
  out.rhs = div - t1 - t2;
  out.scale = 1.0 + std::abs(out.lhs) + std::abs(div) + std::abs(t1) + std::abs(t2);
  return out;
}

VerificationReport check_lemma31_identity(const ScalarField& v, const Norm& h, double p, double gamma,
                                          const Vec& x, double step, double constant) {
  const Lemma31Terms t = lemma31_terms(v, h, p, gamma, x, step);
  VerificationReport rep;
  rep.name = "lemma31";
  rep.add("differential_identity", format_point(x), step, std::abs(t.lhs - t.rhs), constant * step * t.scale);
  return rep;
}

}  // namespace conelab
