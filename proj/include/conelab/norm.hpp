#pragma once

#include "conelab/types.hpp"

#include <cstdint>
#include <string>
#include <variant>

namespace conelab {

enum class NormFamily { euclidean, quadratic, blend, shifted };

std::string to_string(NormFamily family);

namespace family {

struct Euclidean {};

// H(xi) = sqrt(xi^T A xi), A symmetric positive definite.
struct Quadratic {
  Mat A;
  Mat A_inv;
};

// H(xi) = ((1 - eps)|xi|^2 + eps |xi|_q^2)^{1/2}; eps = 1 is the pure l^q norm.
struct Blend {
  double q;
  double eps;
};

// H(xi) = |xi| + b.xi with |b| < 1. Not symmetric.
struct Shifted {
  Vec b;
};

}  // namespace family

struct DualSearchOptions {
  int starts = 32;
  int max_iterations = 200;
  double tolerance = 1e-10;
  std::uint64_t seed = 0x5eed;
};

struct DualSearchResult {
  double value = 0.0;
  // Maximiser of zeta.xi on the unit sphere {H = 1}; equals grad H0(zeta).
  Vec argmax;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct EllipticityEstimate {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double floor = 0.0;
  bool pass = false;
};

// An anisotropic norm on R^n in the sense used here: convex, positively
// 1-homogeneous, positive on the unit sphere, not necessarily even.
// Values are immutable; every member is a pure function.
class Norm {
 public:
  static Norm euclidean(int n);
  static Norm quadratic(const Mat& A);
  static Norm blend(int n, double q, double eps);
  static Norm shifted(const Vec& b);

  int dim() const { return n_; }
  NormFamily family() const;
  bool symmetric() const { return family() != NormFamily::shifted; }
  const family::Quadratic* as_quadratic() const { return std::get_if<family::Quadratic>(&impl_); }
  const family::Blend* as_blend() const { return std::get_if<family::Blend>(&impl_); }
  const family::Shifted* as_shifted() const { return std::get_if<family::Shifted>(&impl_); }

  double value(const Vec& xi) const;
  double operator()(const Vec& xi) const { return value(xi); }
  // grad H and D^2 H; both throw DomainError at xi = 0.
  Vec gradient(const Vec& xi) const;
  Mat hessian(const Vec& xi) const;
  // H D^2H + grad H (x) grad H = D^2(H^2)/2, the matrix bounded in the
  // uniform ellipticity hypothesis.
  Mat ellipticity_matrix(const Vec& xi) const;

  // H0(zeta) = sup_{H(xi) = 1} zeta.xi. Closed form where one exists,
  // otherwise Newton ascent on the concave Legendre problem
  // sup_xi zeta.xi - H(xi)^2 / 2 seeded from a multi-start sphere search.
  double dual(const Vec& zeta) const;
  Vec dual_gradient(const Vec& zeta) const;
  Mat dual_hessian(const Vec& zeta) const;
  // The point xi with H(xi) grad H(xi) = zeta; H(xi) = H0(zeta).
  Vec legendre_partner(const Vec& zeta) const;
  // Family-agnostic numerical dual: projected ascent from a spread of starts.
  DualSearchResult dual_search(const Vec& zeta, const DualSearchOptions& options = {}) const;

  // Radial variable of extremals: rho(y) = H0(-y). Functions decreasing in
  // rho(x - x0) have H(grad u) = |u'(rho)| for every family, including the
  // asymmetric one; for even norms rho = H0.
  double gauge(const Vec& y) const { return dual(-y); }
  Vec gauge_gradient(const Vec& y) const { return -dual_gradient(-y); }
  Mat gauge_hessian(const Vec& y) const { return dual_hessian(-y); }

  // a(xi) = H^{p-1}(xi) grad H(xi); a(0) = 0.
  Vec a_map(double p, const Vec& xi) const;
  // Da(xi) = H^{p-1} D^2H + (p-1) H^{p-2} grad H (x) grad H.
  Mat a_jacobian(double p, const Vec& xi) const;

  // xi -> H(-xi).
  Norm reflected() const;

  EllipticityEstimate check_ellipticity(int samples, double floor = 1e-3,
                                        std::uint64_t seed = 1) const;

 private:
  using Impl = std::variant<family::Euclidean, family::Quadratic, family::Blend, family::Shifted>;
  Norm(int n, Impl impl) : n_(n), impl_(std::move(impl)) {}

  DualSearchResult legendre_newton(const Vec& zeta, Vec start, int max_iterations,
                                   double tolerance) const;
  void check_dim(const Vec& v) const;

  int n_;
  Impl impl_;
};

}  // namespace conelab
