#include "conelab/cone.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace conelab {

std::string to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::full_space: return "full_space";
    case ConeKind::half_space: return "half_space";
    case ConeKind::orthant: return "orthant";
    case ConeKind::circular: return "circular";
    case ConeKind::product: return "product";
  }
  return "unknown";
}

Cone Cone::full_space(int n) {
  if (n < 1) throw InvalidSpec("cone dimension must be positive");
  return Cone(n, ConeKind::full_space);
}

Cone Cone::half_space(const Vec& inward_normal) {
  if (inward_normal.size() < 1 || inward_normal.norm() == 0.0)
    throw InvalidSpec("half-space needs a nonzero normal");
  Cone c(static_cast<int>(inward_normal.size()), ConeKind::half_space);
  c.dir_ = inward_normal.normalized();
  return c;
}

Cone Cone::orthant(int n, int m) {
  if (n < 1 || m < 1 || m > n) throw InvalidSpec("orthant requires 1 <= m <= n");
  Cone c(n, ConeKind::orthant);
  c.m_ = m;
  return c;
}

Cone Cone::circular(const Vec& axis, double half_aperture) {
  if (axis.size() < 2 || axis.norm() == 0.0) throw InvalidSpec("circular cone needs a nonzero axis, n >= 2");
  if (!(half_aperture > 0.0 && half_aperture <= std::numbers::pi / 2 + 1e-15))
    throw InvalidSpec("circular cone half aperture must lie in (0, pi/2]");
  Cone c(static_cast<int>(axis.size()), ConeKind::circular);
  c.dir_ = axis.normalized();
  c.aperture_ = std::min(half_aperture, std::numbers::pi / 2);
  return c;
}

Cone Cone::product(int k, const Cone& tail) {
  if (k < 1) throw InvalidSpec("product cone needs k >= 1 free dimensions");
  Cone c(k + tail.dim(), ConeKind::product);
  c.k_ = k;
  c.tail_ = std::make_shared<const Cone>(tail);
  return c;
}

bool Cone::contains(const Vec& x, double tol) const {
  if (x.size() != n_) throw InvalidSpec("point dimension does not match cone dimension");
  return boundary_distance(x) >= -tol;
}

double Cone::boundary_distance(const Vec& x) const {
  switch (kind_) {
    case ConeKind::full_space:
      return std::numeric_limits<double>::infinity();
    case ConeKind::half_space:
      return x.dot(dir_);
    case ConeKind::orthant:
      return x.head(m_).minCoeff();
    case ConeKind::circular: {
      const double r = x.norm();
      if (r == 0.0) return 0.0;
      const double angle = std::acos(std::clamp(x.dot(dir_) / r, -1.0, 1.0));
      const double gap = aperture_ - angle;
      if (gap >= std::numbers::pi / 2) return r;
      return r * std::sin(gap);
    }
    case ConeKind::product:
      return tail_->boundary_distance(x.tail(n_ - k_));
  }
  return 0.0;
}

Vec Cone::normal_at(const Vec& x, double tol) const {
  const double r = x.norm();
  if (r <= tol) throw DomainError("non-smooth boundary point: cone vertex");
  if (std::abs(boundary_distance(x)) > tol * std::max(1.0, r))
    throw DomainError("point is not on the cone boundary");
  switch (kind_) {
    case ConeKind::full_space:
      throw DomainError("the full space has no boundary");
    case ConeKind::half_space:
      return -dir_;
    case ConeKind::orthant: {
      int face = -1;
      for (int i = 0; i < m_; ++i) {
        if (std::abs(x[i]) <= tol * std::max(1.0, r)) {
          if (face >= 0) throw DomainError("non-smooth boundary point: orthant edge");
          face = i;
        }
      }
      if (face < 0) throw DomainError("point is not on the cone boundary");
      return -Vec::Unit(n_, face);
    }
    case ConeKind::circular: {
      const Vec perp = x - x.dot(dir_) * dir_;
      const double pn = perp.norm();
      if (pn == 0.0) throw DomainError("point is not on the cone boundary");
      const Vec u = perp / pn;
      return std::cos(aperture_) * u - std::sin(aperture_) * dir_;
    }
    case ConeKind::product: {
      Vec nu = Vec::Zero(n_);
      nu.tail(n_ - k_) = tail_->normal_at(x.tail(n_ - k_), tol);
      return nu;
    }
  }
  return Vec::Zero(n_);
}

Mat Cone::shape_operator(const Vec& x) const {
  const Vec nu = normal_at(x);
  const Mat proj = Mat::Identity(n_, n_) - nu * nu.transpose();
  switch (kind_) {
    case ConeKind::circular: {
      const Vec perp = x - x.dot(dir_) * dir_;
      const double pn = perp.norm();
      const Vec u = perp / pn;
      const Mat du = (Mat::Identity(n_, n_) - dir_ * dir_.transpose() - u * u.transpose()) / pn;
      return proj * (std::cos(aperture_) * du) * proj;
    }
    case ConeKind::product: {
      Mat s = Mat::Zero(n_, n_);
      s.bottomRightCorner(n_ - k_, n_ - k_) = tail_->shape_operator(x.tail(n_ - k_));
      return s;
    }
    default:
      return Mat::Zero(n_, n_);
  }
}

Mat Cone::lineality_basis() const {
  switch (kind_) {
    case ConeKind::full_space:
      return Mat::Identity(n_, n_);
    case ConeKind::half_space: {
      // Complete the normal to an orthonormal basis; drop the normal column.
      Mat seed = Mat::Identity(n_, n_);
      seed.col(0) = dir_;
      Eigen::HouseholderQR<Mat> qr(seed);
      Mat q = qr.householderQ();
      return q.rightCols(n_ - 1);
    }
    case ConeKind::orthant: {
      Mat b = Mat::Zero(n_, n_ - m_);
      for (int j = 0; j < n_ - m_; ++j) b(m_ + j, j) = 1.0;
      return b;
    }
    case ConeKind::circular: {
      if (aperture_ < std::numbers::pi / 2) return Mat::Zero(n_, 0);
      Mat seed = Mat::Identity(n_, n_);
      seed.col(0) = dir_;
      Eigen::HouseholderQR<Mat> qr(seed);
      Mat q = qr.householderQ();
      return q.rightCols(n_ - 1);
    }
    case ConeKind::product: {
      const Mat tb = tail_->lineality_basis();
      Mat b = Mat::Zero(n_, k_ + tb.cols());
      b.topLeftCorner(k_, k_) = Mat::Identity(k_, k_);
      b.bottomRightCorner(n_ - k_, tb.cols()) = tb;
      return b;
    }
  }
  return Mat::Zero(n_, 0);
}

Vec Cone::project_to_lineality(const Vec& x) const {
  const Mat b = lineality_basis();
  if (b.cols() == 0) return Vec::Zero(n_);
  return b * (b.transpose() * x);
}

bool Cone::admissible_center(const Vec& x0, double tol) const {
  return (x0 - project_to_lineality(x0)).norm() <= tol * std::max(1.0, x0.norm());
}

Vec Cone::sample_direction(RandomStream& rng, double margin) const {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vec d = rng.unit_vector(n_);
    if (kind_ == ConeKind::orthant) d.head(m_) = d.head(m_).cwiseAbs();
    if (kind_ == ConeKind::half_space && d.dot(dir_) < 0) d -= 2.0 * d.dot(dir_) * dir_;
    if (boundary_distance(d) >= margin) return d;
  }
  throw ConvergenceError("could not sample a direction inside the cone", margin);
}

Vec Cone::interior_direction() const {
  switch (kind_) {
    case ConeKind::full_space:
      return Vec::Unit(n_, n_ - 1);
    case ConeKind::half_space:
    case ConeKind::circular:
      return dir_;
    case ConeKind::orthant: {
      Vec d = Vec::Zero(n_);
      d.head(m_).setOnes();
      return d.normalized();
    }
    case ConeKind::product: {
      Vec d = Vec::Zero(n_);
      d.tail(n_ - k_) = tail_->interior_direction();
      return d;
    }
  }
  return Vec::Unit(n_, 0);
}

Vec Cone::sample_boundary_point(RandomStream& rng) const {
  switch (kind_) {
    case ConeKind::full_space:
      throw DomainError("the full space has no boundary");
    case ConeKind::half_space: {
      Vec x = rng.normal_vector(n_);
      x -= x.dot(dir_) * dir_;
      return x;
    }
    case ConeKind::orthant: {
      Vec x = rng.normal_vector(n_);
      x.head(m_) = x.head(m_).cwiseAbs().array() + 0.05;
      const int face = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(m_));
      x[face] = 0.0;
      return x;
    }
    case ConeKind::circular: {
      Vec perp = rng.normal_vector(n_);
      perp -= perp.dot(dir_) * dir_;
      perp.normalize();
      const double t = rng.uniform(0.2, 3.0);
      return t * (std::cos(aperture_) * dir_ + std::sin(aperture_) * perp);
    }
    case ConeKind::product: {
      Vec x(n_);
      x.head(k_) = rng.normal_vector(k_);
      x.tail(n_ - k_) = tail_->sample_boundary_point(rng);
      return x;
    }
  }
  return Vec::Zero(n_);
}

std::optional<double> Cone::solid_angle_fraction() const {
  switch (kind_) {
    case ConeKind::full_space: return 1.0;
    case ConeKind::half_space: return 0.5;
    case ConeKind::orthant: return std::ldexp(1.0, -m_);
    case ConeKind::circular: return spherical_cap_fraction(n_, aperture_);
    case ConeKind::product: return tail_->solid_angle_fraction();
  }
  return std::nullopt;
}

std::string Cone::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case ConeKind::full_space: os << "full_space(n=" << n_ << ")"; break;
    case ConeKind::half_space: os << "half_space(n=" << n_ << ")"; break;
    case ConeKind::orthant: os << "orthant(n=" << n_ << ",m=" << m_ << ")"; break;
    case ConeKind::circular: os << "circular(n=" << n_ << ",aperture=" << aperture_ << ")"; break;
    case ConeKind::product: os << "product(k=" << k_ << "," << tail_->describe() << ")"; break;
  }
  return os.str();
}

Weight::Weight(int n, std::vector<double> exponents) : n_(n), exponents_(std::move(exponents)) {
  for (double a : exponents_) degree_ += a;
}

Weight Weight::unit(int n) { return Weight(n, {}); }

Weight Weight::monomial(int n, std::vector<double> exponents) {
  if (static_cast<int>(exponents.size()) > n) throw InvalidSpec("more weight exponents than coordinates");
  for (double a : exponents)
    if (!(a >= 0.0)) throw InvalidSpec("weight exponents must be non-negative");
  return Weight(n, std::move(exponents));
}

double Weight::value(const Vec& x) const {
  double w = 1.0;
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    if (exponents_[i] == 0.0) continue;
    const double xi = x[static_cast<Eigen::Index>(i)];
    if (xi <= 0.0) return 0.0;
    w *= std::pow(xi, exponents_[i]);
  }
  return w;
}

Vec Weight::gradient(const Vec& x) const {
  Vec g = Vec::Zero(n_);
  const double w = value(x);
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    if (exponents_[i] == 0.0) continue;
    const auto k = static_cast<Eigen::Index>(i);
    if (x[k] <= 0.0) throw DomainError("weight gradient requires interior points");
    g[k] = exponents_[i] * w / x[k];
  }
  return g;
}

bool Weight::compatible_with(const Cone& cone) const {
  if (cone.dim() != n_) return false;
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    if (exponents_[i] == 0.0) continue;
    const int k = static_cast<int>(i);
    const bool ok =
        (cone.kind() == ConeKind::orthant && k < cone.orthant_rank()) ||
        (cone.kind() == ConeKind::half_space && (cone.direction() - Vec::Unit(n_, k)).norm() < 1e-14);
    if (!ok) return false;
  }
  return true;
}

std::string Weight::describe() const {
  if (is_unit()) return "unit";
  std::ostringstream os;
  os << "monomial(";
  for (std::size_t i = 0; i < exponents_.size(); ++i) os << (i ? "," : "") << exponents_[i];
  os << ")";
  return os.str();
}

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double unit_sphere_area(int n) { return n * unit_ball_volume(n); }

double spherical_cap_fraction(int n, double theta) {
  if (theta <= 0.0) return 0.0;
  if (theta >= std::numbers::pi) return 1.0;
  if (n == 1) return theta >= std::numbers::pi / 2 ? 1.0 : 0.5;
  const double s = std::sin(theta);
  const double half = 0.5 * boost::math::ibeta(0.5 * (n - 1), 0.5, s * s);
  return theta <= std::numbers::pi / 2 ? half : 1.0 - half;
}

std::optional<double> sector_measure_exact(const Cone& cone, const Norm& norm, const Weight& weight) {
  const int n = cone.dim();
  if (norm.dim() != n || weight.dim() != n) throw InvalidSpec("cone, norm and weight dimensions differ");
  if (weight.is_unit()) {
    const auto fraction = cone.solid_angle_fraction();
    switch (norm.family()) {
      case NormFamily::euclidean:
        if (fraction) return unit_ball_volume(n) * *fraction;
        return std::nullopt;
      case NormFamily::quadratic:
        // {x^T A^{-1} x <= 1} = A^{1/2} B, even under x -> -x.
        if (cone.kind() == ConeKind::full_space)
          return unit_ball_volume(n) * std::sqrt(norm.as_quadratic()->A.determinant());
        return std::nullopt;
      case NormFamily::blend:
        if (cone.kind() == ConeKind::full_space && norm.as_blend()->eps == 1.0) {
          const double qc = norm.as_blend()->q / (norm.as_blend()->q - 1.0);
          return std::pow(2.0 * std::tgamma(1.0 + 1.0 / qc), n) / std::tgamma(1.0 + n / qc);
        }
        return std::nullopt;
      case NormFamily::shifted:
        return std::nullopt;
    }
    return std::nullopt;
  }
  // Monomial weights with the Euclidean norm: compare integral of w e^{-|x|^2}
  // over the cone, computed coordinate-wise, with its radial reduction
  // (n + a) mu Gamma((n + a)/2) / 2.
  if (norm.family() != NormFamily::euclidean || !weight.compatible_with(cone)) return std::nullopt;
  if (cone.kind() != ConeKind::orthant && cone.kind() != ConeKind::half_space) return std::nullopt;
  const double big_n = n + weight.degree();
  double gauss = 1.0;
  for (int i = 0; i < n; ++i) {
    const double a = i < static_cast<int>(weight.exponents().size()) ? weight.exponents()[static_cast<std::size_t>(i)] : 0.0;
    bool constrained = false;
    if (cone.kind() == ConeKind::orthant) constrained = i < cone.orthant_rank();
    if (cone.kind() == ConeKind::half_space) constrained = std::abs(cone.direction()[i] - 1.0) < 1e-14;
    gauss *= constrained ? 0.5 * std::tgamma(0.5 * (a + 1.0)) : std::sqrt(std::numbers::pi);
  }
  return 2.0 * gauss / (big_n * std::tgamma(0.5 * big_n));
}

namespace {

struct StratumStats {
  double sum = 0.0;
  double sum_sq = 0.0;
  long count = 0;
};

}  // namespace

SectorMeasure sector_measure_mc(const Cone& cone, const Norm& norm, const Weight& weight,
                                const SectorMeasureOptions& options) {
  const int n = cone.dim();
  if (norm.dim() != n || weight.dim() != n) throw InvalidSpec("cone, norm and weight dimensions differ");
  const double big_n = n + weight.degree();
  // Each direction theta contributes its exact ray integral
  // int_0^{1/rho(theta)} w(t theta) t^{n-1} dt = w(theta) rho(theta)^{-N} / N,
  // so only the angular variable is sampled. Strata: sign patterns of the
  // leading coordinates, each of probability 2^{-s}.
  const int s = std::min(n, 6);
  const int strata = 1 << s;
  std::vector<StratumStats> stats(static_cast<std::size_t>(strata));
  std::vector<RandomStream> streams;
  const RandomStream root(options.seed, 0x5ec7);
  for (int j = 0; j < strata; ++j) streams.push_back(root.split(static_cast<std::uint64_t>(j)));

  // Circular cones: sample the cap itself, sin^2 of the polar angle being
  // Beta((n-1)/2, 1/2) truncated at sin^2(aperture). Strata act as replicates.
  const bool cap = cone.kind() == ConeKind::circular && n >= 2;
  const double cap_top =
      cap ? boost::math::ibeta(0.5 * (n - 1), 0.5, std::pow(std::sin(cone.half_aperture()), 2)) : 0.0;
  auto cap_direction = [&](RandomStream& rng) {
    const Vec& axis = cone.direction();
    const double s2 = boost::math::ibeta_inv(0.5 * (n - 1), 0.5, rng.uniform() * cap_top);
    Vec w = rng.normal_vector(n);
    w -= w.dot(axis) * axis;
    return Vec(std::sqrt(1.0 - s2) * axis + std::sqrt(s2) * w.normalized());
  };

  auto draw = [&](int j, long count) {
    auto& st = stats[static_cast<std::size_t>(j)];
    auto& rng = streams[static_cast<std::size_t>(j)];
    for (long i = 0; i < count; ++i) {
      Vec d;
      if (cap) {
        d = cap_direction(rng);
      } else {
        d = rng.normal_vector(n);
        for (int c = 0; c < s; ++c) d[c] = ((j >> c) & 1) ? -std::abs(d[c]) : std::abs(d[c]);
        d.normalize();
      }
      double f = 0.0;
      if (cap || cone.contains(d)) f = weight.value(d) * std::pow(norm.gauge(d), -big_n) / big_n;
      st.sum += f;
      st.sum_sq += f * f;
      ++st.count;
    }
  };

  const double area = unit_sphere_area(n) * (cap ? spherical_cap_fraction(n, cone.half_aperture()) : 1.0);
  SectorMeasure out;
  auto summarize = [&] {
    double mean = 0.0;
    double var = 0.0;
    long total = 0;
    for (const auto& st : stats) {
      const double m = st.sum / static_cast<double>(st.count);
      const double v = std::max(0.0, st.sum_sq / static_cast<double>(st.count) - m * m);
      mean += m / strata;
      var += v / (static_cast<double>(st.count) - 1.0) / (static_cast<double>(strata) * strata);
      total += st.count;
    }
    out.value = area * mean;
    out.std_error = area * std::sqrt(var);
    out.samples = total;
  };

  const long per_round = std::max<long>(64, options.max_samples / (16L * strata));
  const int threads = std::max(1, options.threads);
  while (true) {
    if (threads == 1) {
      for (int j = 0; j < strata; ++j) draw(j, per_round);
    } else {
      std::vector<std::jthread> pool;
      for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
          for (int j = t; j < strata; j += threads) draw(j, per_round);
        });
    }
    summarize();
    if (out.value > 0.0 && out.std_error <= options.target_rel_error * out.value) break;
    if (out.samples + per_round * strata > options.max_samples) {
      throw SectorMeasureError("sector measure: target relative standard error not reached", out);
    }
  }
  return out;
}

SectorMeasure sector_measure(const Cone& cone, const Norm& norm, const Weight& weight,
                             const SectorMeasureOptions& options) {
  if (auto exact = sector_measure_exact(cone, norm, weight)) {
    SectorMeasure out;
    out.value = *exact;
    out.exact = true;
    return out;
  }
  return sector_measure_mc(cone, norm, weight, options);
}

}  // namespace conelab
