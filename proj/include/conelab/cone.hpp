#pragma once

#include "conelab/norm.hpp"
#include "conelab/random.hpp"
#include "conelab/types.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace conelab {

enum class ConeKind { full_space, half_space, orthant, circular, product };

std::string to_string(ConeKind kind);

// A closed convex cone with vertex at the origin, Sigma = R^k x C with C
// containing no line. Immutable.
class Cone {
 public:
  static Cone full_space(int n);
  // {x : x.inward_normal >= 0}.
  static Cone half_space(const Vec& inward_normal);
  // {x : x_i >= 0 for i < m}; the remaining n - m coordinates are free.
  static Cone orthant(int n, int m);
  // {x : angle(x, axis) <= half_aperture}, half_aperture in (0, pi/2].
  static Cone circular(const Vec& axis, double half_aperture);
  // R^k x tail, the free factor occupying the first k coordinates.
  static Cone product(int k, const Cone& tail);

  int dim() const { return n_; }
  ConeKind kind() const { return kind_; }
  const Vec& direction() const { return dir_; }
  int orthant_rank() const { return m_; }
  double half_aperture() const { return aperture_; }
  int free_dims() const { return k_; }
  const Cone* tail() const { return tail_.get(); }

  bool contains(const Vec& x, double tol = 0.0) const;
  // Euclidean distance from x to the boundary, negative outside; +inf for R^n.
  double boundary_distance(const Vec& x) const;
  // Outward unit normal at a smooth boundary point. Throws DomainError at the
  // vertex, on edges, or when x is not on the boundary.
  Vec normal_at(const Vec& x, double tol = 1e-9) const;
  // Second fundamental form at a smooth boundary point (tangential derivative
  // of the normal field), restricted to the tangent space.
  Mat shape_operator(const Vec& x) const;

  // Orthonormal basis (n x k) of the largest linear subspace inside the cone.
  Mat lineality_basis() const;
  int lineality_dim() const { return static_cast<int>(lineality_basis().cols()); }
  // Orthogonal projection onto the lineality space: the admissible vertex set
  // for extremals (all of R^n, R^k x {O}, or {O}).
  Vec project_to_lineality(const Vec& x) const;
  bool admissible_center(const Vec& x0, double tol = 1e-12) const;

  Vec sample_direction(RandomStream& rng, double margin = 0.0) const;
  // A fixed unit direction well inside the cone (axis, normal, diagonal).
  Vec interior_direction() const;
  Vec sample_boundary_point(RandomStream& rng) const;

  // Fraction of the unit sphere inside the cone, when known in closed form.
  std::optional<double> solid_angle_fraction() const;

  std::string describe() const;

 private:
  Cone(int n, ConeKind kind) : n_(n), kind_(kind) {}

  int n_;
  ConeKind kind_;
  Vec dir_;              // half-space inward normal or circular axis
  int m_ = 0;            // orthant rank
  double aperture_ = 0;  // circular half aperture
  int k_ = 0;            // product free dims
  std::shared_ptr<const Cone> tail_;
};

// Homogeneous weight: unit, or a monomial prod_i x_i^{a_i} on the first
// coordinates (which must be constrained to be non-negative by the cone).
class Weight {
 public:
  static Weight unit(int n);
  static Weight monomial(int n, std::vector<double> exponents);

  int dim() const { return n_; }
  bool is_unit() const { return degree_ == 0.0; }
  double degree() const { return degree_; }
  const std::vector<double>& exponents() const { return exponents_; }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  bool compatible_with(const Cone& cone) const;
  std::string describe() const;

 private:
  Weight(int n, std::vector<double> exponents);
  int n_;
  std::vector<double> exponents_;
  double degree_ = 0.0;
};

struct SectorMeasure {
  double value = 0.0;
  double std_error = 0.0;
  long samples = 0;
  bool exact = false;
};

struct SectorMeasureOptions {
  long max_samples = 1'000'000;
  double target_rel_error = 5e-3;
  std::uint64_t seed = 7;
  int threads = 1;
};

class SectorMeasureError : public ConvergenceError {
 public:
  SectorMeasureError(const std::string& what, SectorMeasure partial)
      : ConvergenceError(what, partial.std_error), partial_(partial) {}
  const SectorMeasure& partial() const { return partial_; }

 private:
  SectorMeasure partial_;
};

double unit_ball_volume(int n);
double unit_sphere_area(int n);
// Fraction of S^{n-1} within angle theta of a fixed axis.
double spherical_cap_fraction(int n, double theta);

// mu = integral of w over {x in Sigma : rho(x) <= 1}, rho = H.gauge. Any
// H0-radial integral reduces to (n + a) mu int_0^inf g(r) r^{n+a-1} dr.
std::optional<double> sector_measure_exact(const Cone& cone, const Norm& norm, const Weight& weight);
SectorMeasure sector_measure_mc(const Cone& cone, const Norm& norm, const Weight& weight,
                                const SectorMeasureOptions& options = {});
// Closed form when available, Monte Carlo otherwise.
SectorMeasure sector_measure(const Cone& cone, const Norm& norm, const Weight& weight,
                             const SectorMeasureOptions& options = {});

}  // namespace conelab
