#pragma once

#include "conelab/radial.hpp"
#include "conelab/sobolev.hpp"

#include <functional>
#include <string>
#include <vector>

namespace conelab {

// Piecewise-linear Sobolev quotient on a graded radial grid. The gradient
// term uses exact r^{N-1} interval weights, the u^beta term lumped nodal
// weights; u is constant on [0, r_0] and continued beyond r_M by the power law
// r^{-(N-p)/(p-1)}, whose tail integrals are added in closed form.
class DiscreteQuotient {
 public:
  DiscreteQuotient(const SobolevSetting& setting, std::vector<double> grid);

  const std::vector<double>& grid() const { return r_; }
  std::size_t size() const { return r_.size(); }
  double tail_decay() const { return decay_; }

  double gradient_energy(const Vec& u) const;  // int |u'|^p r^{N-1} dr
  double mass(const Vec& u) const;             // int |u|^beta r^{N-1} dr
  double value(const Vec& u) const;            // J, DomainError for u = 0
  Vec gradient(const Vec& u) const;
  // Rescale so that int u^beta w = 1.
  Vec normalize(const Vec& u) const;

  // Riesz map of the discrete H^1 seminorm (plus tail), used as preconditioner.
  Vec precondition(const Vec& g) const;
  // Inverse of the Hessian of the gradient energy at u, with |u'| floored at
  // 1e-3 max|u'|. Reduces to the fixed map above, scaled by 2, when p = 2.
  Vec precondition(const Vec& g, const Vec& u) const;
  double exponent() const { return s_.p; }
  // Mass-weighted mean of log r and its gradient; dilation by s shifts it by log s.
  double log_centre(const Vec& u) const;
  Vec log_centre_gradient(const Vec& u) const;

  RadialProfile profile(const Vec& u) const;
  Vec sample(const std::function<double(double)>& f) const;

 private:
  SobolevSetting s_;
  std::vector<double> r_;
  double decay_;
  std::vector<double> stiff_;  // int_{r_i}^{r_{i+1}} r^{N-1} dr / h_i^p
  std::vector<double> lump_;   // nodal mass weights, head and tail included
  double tail_grad_;           // coefficient of |u_M|^p
  // Tridiagonal factor of the preconditioner.
  std::vector<double> diag_, off_;
};

struct TraceRow {
  long iteration = 0;
  double j = 0.0;
  double step = 0.0;
  double grad_norm = 0.0;
};

struct MinimizeOptions {
  long max_iterations = 100000;
  int window = 50;
  double rel_tol = 1e-10;
  int memory = 8;  // L-BFGS pairs; 0 gives plain preconditioned descent
  long refresh = 20;  // iterations between preconditioner rebuilds (memory is dropped)
  bool pin_dilation = true;
  double armijo = 1e-4;
  double shrink = 0.5;
  double initial_step = 1.0;
};

struct MinimizeResult {
  Vec u;
  std::vector<TraceRow> trace;
  bool converged = false;
  std::string status;
};

// Preconditioned projected L-BFGS with Armijo backtracking on the
// set int u^beta w = 1.
MinimizeResult minimize(const DiscreteQuotient& q, const Vec& init, const MinimizeOptions& options = {});

struct BubbleFit {
  double lambda = 0.0;
  double amplitude = 0.0;
  double linf_rel_error = 0.0;
};

// Best bubble shape A (lambda^{p'} + r^{p'})^{-(N-p)/p} for the profile in the
// relative sup norm on [r_lo, r_hi], lambda free.
BubbleFit fit_bubble(const std::vector<double>& r, const Vec& u, double big_n, double p, double r_lo = 0.1,
                     double r_hi = 10.0);

std::string to_csv(const std::vector<TraceRow>& trace);
std::string profile_csv(const std::vector<double>& r, const Vec& u);

}  // namespace conelab
