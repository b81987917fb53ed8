#include "conelab/norm.hpp"

#include "conelab/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace conelab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double lq_norm(const Vec& v, double q) {
  const double m = v.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v[i]) / m, q);
  return m * std::pow(s, 1.0 / q);
}

// grad of |.|_q at v != 0.
Vec lq_gradient(const Vec& v, double q, double norm) {
  Vec g(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double t = std::abs(v[i]) / norm;
    g[i] = (v[i] < 0 ? -1.0 : 1.0) * std::pow(t, q - 1.0);
    if (v[i] == 0.0) g[i] = 0.0;
  }
  return g;
}

double shifted_dual(const Vec& b, const Vec& zeta) {
  const double s = 1.0 - b.squaredNorm();
  const double bz = b.dot(zeta);
  return (std::sqrt(s * zeta.squaredNorm() + bz * bz) - bz) / s;
}

Vec shifted_dual_gradient(const Vec& b, const Vec& zeta) {
  const double s = 1.0 - b.squaredNorm();
  const double bz = b.dot(zeta);
  const double root = std::sqrt(s * zeta.squaredNorm() + bz * bz);
  return ((s * zeta + bz * b) / root - b) / s;
}

}  // namespace

std::string to_string(NormFamily f) {
  switch (f) {
    case NormFamily::euclidean: return "euclidean";
    case NormFamily::quadratic: return "quadratic";
    case NormFamily::blend: return "blend";
    case NormFamily::shifted: return "shifted";
  }
  return "unknown";
}

Norm Norm::euclidean(int n) {
  if (n < 1) throw InvalidSpec("norm dimension must be positive");
  return Norm(n, family::Euclidean{});
}

Norm Norm::quadratic(const Mat& A) {
  if (A.rows() != A.cols() || A.rows() < 1) throw InvalidSpec("quadratic norm needs a square matrix");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()))
    throw InvalidSpec("quadratic norm matrix must be symmetric");
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) throw InvalidSpec("quadratic norm matrix must be positive definite");
  Mat inv = llt.solve(Mat::Identity(A.rows(), A.cols()));
  return Norm(static_cast<int>(A.rows()), family::Quadratic{A, inv});
}

Norm Norm::blend(int n, double q, double eps) {
  if (n < 1) throw InvalidSpec("norm dimension must be positive");
  if (!(q > 2.0)) throw InvalidSpec("blend norm requires q > 2");
  if (!(eps > 0.0 && eps <= 1.0)) throw InvalidSpec("blend norm requires eps in (0, 1]");
  return Norm(n, family::Blend{q, eps});
}

Norm Norm::shifted(const Vec& b) {
  if (b.size() < 1) throw InvalidSpec("norm dimension must be positive");
  if (!(b.norm() < 1.0)) throw InvalidSpec("shifted norm requires |b| < 1");
  return Norm(static_cast<int>(b.size()), family::Shifted{b});
}

NormFamily Norm::family() const {
  return std::visit(Overloaded{
                        [](const family::Euclidean&) { return NormFamily::euclidean; },
                        [](const family::Quadratic&) { return NormFamily::quadratic; },
                        [](const family::Blend&) { return NormFamily::blend; },
                        [](const family::Shifted&) { return NormFamily::shifted; },
                    },
                    impl_);
}

void Norm::check_dim(const Vec& v) const {
  if (v.size() != n_) throw InvalidSpec("vector dimension does not match norm dimension");
}

double Norm::value(const Vec& xi) const {
  check_dim(xi);
  return std::visit(Overloaded{
                        [&](const family::Euclidean&) { return xi.norm(); },
                        [&](const family::Quadratic& f) { return std::sqrt(std::max(0.0, xi.dot(f.A * xi))); },
                        [&](const family::Blend& f) {
                          const double nq = lq_norm(xi, f.q);
                          return std::sqrt((1.0 - f.eps) * xi.squaredNorm() + f.eps * nq * nq);
                        },
                        [&](const family::Shifted& f) { return xi.norm() + f.b.dot(xi); },
                    },
                    impl_);
}

Vec Norm::gradient(const Vec& xi) const {
  check_dim(xi);
  if (xi.squaredNorm() == 0.0) throw DomainError("grad H is undefined at the origin");
  return std::visit(Overloaded{
                        [&](const family::Euclidean&) -> Vec { return xi / xi.norm(); },
                        [&](const family::Quadratic& f) -> Vec { return f.A * xi / value(xi); },
                        [&](const family::Blend& f) -> Vec {
                          const double nq = lq_norm(xi, f.q);
                          const Vec g = lq_gradient(xi, f.q, nq);
                          return ((1.0 - f.eps) * xi + f.eps * nq * g) / value(xi);
                        },
                        [&](const family::Shifted& f) -> Vec { return xi / xi.norm() + f.b; },
                    },
                    impl_);
}

Mat Norm::ellipticity_matrix(const Vec& xi) const {
  check_dim(xi);
  if (xi.squaredNorm() == 0.0) throw DomainError("D^2 H is undefined at the origin");
  const Mat I = Mat::Identity(n_, n_);
  return std::visit(Overloaded{
                        [&](const family::Euclidean&) -> Mat { return I; },
                        [&](const family::Quadratic& f) -> Mat { return f.A; },
                        [&](const family::Blend& f) -> Mat {
                          const double nq = lq_norm(xi, f.q);
                          const Vec g = lq_gradient(xi, f.q, nq);
                          Vec d(n_);
                          for (int i = 0; i < n_; ++i) d[i] = std::pow(std::abs(xi[i]) / nq, f.q - 2.0);
                          Mat q = (1.0 - f.eps) * I;
                          q.diagonal() += f.eps * (f.q - 1.0) * d;
                          q -= f.eps * (f.q - 2.0) * g * g.transpose();
                          return q;
                        },
                        [&](const family::Shifted& f) -> Mat {
                          const double r = xi.norm();
                          const Vec u = xi / r;
                          const Vec g = u + f.b;
                          const double h = r + f.b.dot(xi);
                          return h * (I - u * u.transpose()) / r + g * g.transpose();
                        },
                    },
                    impl_);
}

Mat Norm::hessian(const Vec& xi) const {
  const Mat q = ellipticity_matrix(xi);
  const Vec g = gradient(xi);
  return (q - g * g.transpose()) / value(xi);
}

DualSearchResult Norm::legendre_newton(const Vec& zeta, Vec xi, int max_iterations,
                                       double tolerance) const {
  // Maximise phi(xi) = zeta.xi - H(xi)^2/2; its gradient is zeta - H grad H and
  // its Hessian is minus the ellipticity matrix.
  DualSearchResult out;
  const double zn = zeta.norm();
  auto objective = [&](const Vec& x) {
    const double h = value(x);
    return zeta.dot(x) - 0.5 * h * h;
  };
  double phi = objective(xi);
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    const Vec g = zeta - value(xi) * gradient(xi);
    out.residual = g.norm() / zn;
    if (out.residual <= tolerance) {
      out.converged = true;
      break;
    }
    Mat q = ellipticity_matrix(xi);
    q.diagonal().array() += 1e-14 * q.trace();
    Vec step = q.ldlt().solve(g);
    if (!step.allFinite() || step.dot(g) <= 0.0) step = g;
    double t = 1.0;
    Vec trial = xi + step;
    double phi_trial = objective(trial);
    // Near the optimum phi changes below rounding; accept on the gradient norm then.
    auto accepted = [&] {
      if (phi_trial >= phi + 1e-4 * t * g.dot(step)) return true;
      const Vec gt = zeta - value(trial) * gradient(trial);
      return gt.norm() < (1.0 - 1e-4 * t) * g.norm();
    };
    while (!accepted() && t > 1e-12) {
      t *= 0.5;
      trial = xi + t * step;
      phi_trial = objective(trial);
    }
    if (trial.squaredNorm() == 0.0) break;
    xi = trial;
    phi = phi_trial;
  }
  if (!out.converged) {
    const Vec g = zeta - value(xi) * gradient(xi);
    out.residual = g.norm() / zn;
    out.converged = out.residual <= tolerance;
  }
  const Vec unit = xi / value(xi);
  out.argmax = unit;
  out.value = zeta.dot(unit);
  return out;
}

DualSearchResult Norm::dual_search(const Vec& zeta, const DualSearchOptions& options) const {
  check_dim(zeta);
  DualSearchResult best;
  if (zeta.squaredNorm() == 0.0) {
    best.value = 0.0;
    best.argmax = Vec::Zero(n_);
    best.converged = true;
    return best;
  }
  // Starting directions: signed axes, zeta itself, then a fixed random spread.
  std::vector<Vec> starts;
  starts.push_back(zeta / zeta.norm());
  for (int i = 0; i < n_ && static_cast<int>(starts.size()) < options.starts; ++i) {
    starts.push_back(Vec::Unit(n_, i));
    starts.push_back(-Vec::Unit(n_, i));
  }
  RandomStream rng(options.seed, 0);
  while (static_cast<int>(starts.size()) < options.starts) starts.push_back(rng.unit_vector(n_));
  starts.resize(static_cast<std::size_t>(options.starts));

  best.value = -std::numeric_limits<double>::infinity();
  for (const Vec& d : starts) {
    const double h = value(d);
    const double zd = zeta.dot(d);
    // Best point along the ray for the Legendre objective; directions with
    // zeta.d <= 0 are started at a small multiple of d.
    const double scale = zd > 0.0 ? zd / (h * h) : 1e-3 * zeta.norm() / h;
    DualSearchResult r = legendre_newton(zeta, scale * d, options.max_iterations, options.tolerance);
    if (r.value > best.value) best = r;
  }
  return best;
}

double Norm::dual(const Vec& zeta) const {
  check_dim(zeta);
  return std::visit(Overloaded{
                        [&](const family::Euclidean&) { return zeta.norm(); },
                        [&](const family::Quadratic& f) { return std::sqrt(std::max(0.0, zeta.dot(f.A_inv * zeta))); },
                        [&](const family::Blend& f) {
                          if (f.eps == 1.0) return lq_norm(zeta, f.q / (f.q - 1.0));
                          if (zeta.squaredNorm() == 0.0) return 0.0;
                          return value(legendre_partner(zeta));
                        },
                        [&](const family::Shifted& f) { return shifted_dual(f.b, zeta); },
                    },
                    impl_);
}

Vec Norm::legendre_partner(const Vec& zeta) const {
  check_dim(zeta);
  if (zeta.squaredNorm() == 0.0) return Vec::Zero(n_);
  return std::visit(Overloaded{
                        [&](const family::Euclidean&) -> Vec { return zeta; },
                        [&](const family::Quadratic& f) -> Vec { return f.A_inv * zeta; },
                        [&](const family::Blend& f) -> Vec {
                          if (f.eps == 1.0) {
                            const double qc = f.q / (f.q - 1.0);
                            const double h0 = lq_norm(zeta, qc);
                            return h0 * lq_gradient(zeta, qc, h0);
                          }
                          DualSearchOptions opt;
                          DualSearchResult r;
                          // Seed along the best of the spread directions, then Newton.
                          Vec seed = zeta / zeta.norm();
                          double best = zeta.dot(seed) / value(seed);
                          for (int i = 0; i < n_; ++i) {
                            for (double s : {1.0, -1.0}) {
                              const Vec d = s * Vec::Unit(n_, i);
                              const double ratio = zeta.dot(d) / value(d);
                              if (ratio > best) {
                                best = ratio;
                                seed = d;
                              }
                            }
                          }
                          const double h = value(seed);
                          r = legendre_newton(zeta, (zeta.dot(seed) / (h * h)) * seed, opt.max_iterations,
                                              1e-13);
                          if (!r.converged && r.residual > 1e-10) r = dual_search(zeta, opt);
                          if (!r.converged && r.residual > 1e-10)
                            throw ConvergenceError("dual norm ascent did not converge", r.residual);
                          return r.value * r.argmax;
                        },
                        [&](const family::Shifted& f) -> Vec {
                          return shifted_dual(f.b, zeta) * shifted_dual_gradient(f.b, zeta);
                        },
                    },
                    impl_);
}

Vec Norm::dual_gradient(const Vec& zeta) const {
  check_dim(zeta);
  if (zeta.squaredNorm() == 0.0) throw DomainError("grad H0 is undefined at the origin");
  if (const auto* s = as_shifted()) return shifted_dual_gradient(s->b, zeta);
  const Vec xi = legendre_partner(zeta);
  return xi / value(xi);
}

Mat Norm::dual_hessian(const Vec& zeta) const {
  check_dim(zeta);
  if (zeta.squaredNorm() == 0.0) throw DomainError("D^2 H0 is undefined at the origin");
  // D^2(H0^2/2)(zeta) is the inverse of D^2(H^2/2) at the Legendre partner.
  const Vec xi = legendre_partner(zeta);
  const double h0 = value(xi);
  const Vec g0 = xi / h0;
  const Mat q = ellipticity_matrix(xi);
  Eigen::LDLT<Mat> ldlt(q);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-14 * q.trace()))
    throw DomainError("D^2 H0 undefined: norm is not uniformly convex at the Legendre partner");
  const Mat inv = ldlt.solve(Mat::Identity(n_, n_));
  return (inv - g0 * g0.transpose()) / h0;
}

Vec Norm::a_map(double p, const Vec& xi) const {
  check_dim(xi);
  if (xi.squaredNorm() == 0.0) return Vec::Zero(n_);
  return std::pow(value(xi), p - 1.0) * gradient(xi);
}

Mat Norm::a_jacobian(double p, const Vec& xi) const {
  check_dim(xi);
  if (xi.squaredNorm() == 0.0) {
    if (p > 2.0) return Mat::Zero(n_, n_);
    throw DomainError("Da is undefined at the origin for p <= 2");
  }
  const double h = value(xi);
  const Vec g = gradient(xi);
  return std::pow(h, p - 1.0) * hessian(xi) + (p - 1.0) * std::pow(h, p - 2.0) * g * g.transpose();
}

Norm Norm::reflected() const {
  if (const auto* s = as_shifted()) return Norm::shifted(-s->b);
  return *this;
}

EllipticityEstimate Norm::check_ellipticity(int samples, double floor, std::uint64_t seed) const {
  if (samples < 1) throw InvalidSpec("check_ellipticity needs at least one sample");
  EllipticityEstimate est;
  est.floor = floor;
  est.lambda_min = std::numeric_limits<double>::infinity();
  est.lambda_max = -std::numeric_limits<double>::infinity();
  auto visit = [&](const Vec& xi) {
    Eigen::SelfAdjointEigenSolver<Mat> es(ellipticity_matrix(xi), Eigen::EigenvaluesOnly);
    est.lambda_min = std::min(est.lambda_min, es.eigenvalues().minCoeff());
    est.lambda_max = std::max(est.lambda_max, es.eigenvalues().maxCoeff());
  };
  RandomStream rng(seed, 0);
  // Coordinate axes and their neighbourhoods are where l^q-type norms degenerate.
  for (int i = 0; i < n_; ++i) {
    for (double s : {1.0, -1.0}) {
      visit(s * Vec::Unit(n_, i));
      Vec near = s * Vec::Unit(n_, i) + 1e-3 * rng.normal_vector(n_);
      visit(near / near.norm());
    }
  }
  for (int k = 0; k < samples; ++k) visit(rng.unit_vector(n_));
  est.pass = est.lambda_min >= floor;
  return est;
}

}  // namespace conelab
