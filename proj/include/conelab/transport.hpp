#pragma once

#include "conelab/cone.hpp"
#include "conelab/norm.hpp"
#include "conelab/radial.hpp"
#include "conelab/random.hpp"
#include "conelab/report.hpp"
#include "conelab/sobolev.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace conelab {

// Rescale f so that int f^beta w = 1 over the cone.
RadialFunction normalized(const RadialFunction& f, const SobolevSetting& s);
// exp(-(r/width)^2), no power-law tail.
RadialFunction gaussian_function(double width = 1.0);

// The H0-radial measure F(r) r^{N-1} dr, F = f^beta. Cumulative masses from
// below and from above are tabulated on a graded grid (Gauss-Legendre per
// interval, power-law tail) so both ends of the distribution stay accurate.
class RadialDensity {
 public:
  RadialDensity(std::function<double(double)> density, double big_n, double scale, double tail_decay,
                const GridSpec& grid = {});
  static RadialDensity from_profile(const RadialFunction& f, const SobolevSetting& s, const GridSpec& grid = {});

  double density(double r) const { return density_(r); }
  double big_n() const { return big_n_; }
  // Total mass scale * int F r^{N-1} dr; scale is (n + a) mu.
  double mass() const { return scale_ * total_; }
  // Unscaled int_0^r and int_r^inf.
  double lower(double r) const;
  double upper(double r) const;
  // Mass fraction below r.
  double cdf(double r) const { return lower(r) / total_; }
  // Radius holding the given mass fraction below (or, for `from_above`, above) it.
  double quantile(double fraction, bool from_above) const;
  const std::vector<double>& grid() const { return r_; }

 private:
  double piece(double a, double b) const;
  std::function<double(double)> density_;
  double big_n_, scale_, decay_;
  std::vector<double> r_, below_, above_;
  double total_ = 0.0;
};

// Monotone rearrangement psi with mass_F[0, r] = mass_G[0, psi(r)] after both
// masses are normalized; T(x0 + y) = x0 + psi(rho(y)) y / rho(y).
class RadialTransport {
 public:
  RadialTransport(RadialDensity source, RadialDensity target);

  double psi(double r) const;
  double dpsi(double r) const;
  Vec map(const Vec& y, const Norm& h) const;  // y is the offset from the vertex
  // max |CDF_G(psi(r)) - CDF_F(r)| on the source grid.
  double pushforward_residual() const;
  const RadialDensity& source() const { return f_; }
  const RadialDensity& target() const { return g_; }

 private:
  RadialDensity f_, g_;
};

enum class ChainExpectation {
  tight,   // every link is an equality
  strict,  // the end-to-end inequality must have positive slack
  any,
};

struct ChainOptions {
  GridSpec grid{1e-4, 1e8, 1.02};
  int samples = 200;  // pointwise pairing and boundary checks
  std::uint64_t seed = 11;
  double rel_floor = 1e-12;  // relative rounding allowance per link
  ChainExpectation expect = ChainExpectation::any;
};

// Every link from the transport condition to the final Sobolev-type
// inequality int g^gamma w <= gamma/N (int H^p(grad f) w)^{1/p} (int rho^{p'} g^beta w)^{1/p'},
// for f, g normalized and decreasing, vertex at the origin.
ChainReport check_chain(const RadialFunction& f, const RadialFunction& g, const SobolevSetting& s, const Norm& h,
                        const Cone& cone, const ChainOptions& options = {});

// a (w(T)/w(x))^{1/a} <= grad w(x).T / w(x) at each (x, T) pair.
VerificationReport check_weight_concavity_step(const Weight& w, const std::vector<std::pair<Vec, Vec>>& samples);
// Random (x, T) pairs with positive weighted coordinates.
std::vector<std::pair<Vec, Vec>> sample_weight_pairs(const Weight& w, int count, RandomStream& rng);

}  // namespace conelab
