#pragma once

#include "conelab/bubble.hpp"
#include "conelab/config.hpp"
#include "conelab/extremal.hpp"
#include "conelab/finsler.hpp"
#include "conelab/random.hpp"
#include "conelab/report.hpp"
#include "conelab/sobolev.hpp"
#include "conelab/transport.hpp"

#include <string>
#include <utility>
#include <vector>

namespace conelab {

// Fully built problem data for the verification suites.
struct Problem {
  int n = 3;
  double p = 2.0;
  Norm norm = Norm::euclidean(3);
  Cone cone = Cone::full_space(3);
  Weight weight = Weight::unit(3);
  double lambda = 1.0;
  Vec x0;  // requested centre, projected to an admissible one
  GridSpec grid;
  GridSpec extremal_grid{1e-3, 1e4, 1.02};
  Tolerances tol;
  std::uint64_t seed = 1;
  int threads = 1;

  static Problem from_config(const RunConfig& c);
  Bubble bubble() const;
  SobolevSetting setting() const;
  SectorMeasureOptions measure_options() const;
};

struct SuiteResult {
  std::string name;
  std::vector<VerificationReport> reports;
  std::vector<ChainReport> chains;
  std::vector<std::pair<std::string, std::string>> tables;    // reports/<stem>.csv
  std::vector<std::pair<std::string, std::string>> profiles;  // profiles/<stem>.csv
  std::vector<std::pair<std::string, double>> metrics;
  bool pass() const;
  std::size_t failures() const;
};

// Interior points x0 + y with rho(y) in [lambda, 4 lambda], kept `margin`
// (relative) away from the boundary.
std::vector<Vec> shell_points(const Bubble& b, const Cone& cone, int count, RandomStream& rng, double margin = 0.05);

// Max PDE residual at steps h and h/2 and the ratio of the two maxima.
VerificationReport pde_check(const Bubble& b, const Cone& cone, const Weight& w, const std::vector<Vec>& points,
                             double step, const Tolerances& tol);
// Flux at sampled boundary points for the given bubble, plus a control with
// the centre pushed off the lineality space (lower-bound row).
VerificationReport neumann_check(const Bubble& b, const Cone& cone, int count, const Tolerances& tol, RandomStream& rng);
// |H0(grad H) - 1| and |H0(a) - H^{p-1}| over random xi.
VerificationReport dual_identity_check(const Norm& h, const std::string& label, double p, int count, double tolerance,
                                       RandomStream& rng);
VerificationReport ellipticity_check(const Norm& h, const std::string& label, double floor, std::uint64_t seed);
// Random B >= 0, C symmetric in n = 2..6, plus constructed equality cases.
VerificationReport newton_check(int count, RandomStream& rng);
// Differential identity at `count` points for each (p, gamma) on the two
// analytic fields, at h = 1e-2 and 1e-3, with observed decay order.
VerificationReport lemma31_check(const Norm& h, int n, int count, const std::vector<double>& ps,
                                 std::vector<double> gammas, const Tolerances& tol, RandomStream& rng);
// W = kappa Id for the bubble v-transform, and a control field that is not.
VerificationReport rigidity_check(const Bubble& b, const std::vector<Vec>& points, const Tolerances& tol);
// Identity for v and the integral inequality at gamma = 1 - n and -5.
VerificationReport endgame_check(const Bubble& b, const SobolevSetting& s, const Tolerances& tol);
// Decay slopes and the two Caccioppoli scalings.
VerificationReport decay_check(const Bubble& b, const Cone& cone, const SobolevSetting& s, const Tolerances& tol);

struct MinimizeOutcome {
  VerificationReport report;
  MinimizeResult run;
  BubbleFit fit;
  double sharp = 0.0;
  std::vector<double> grid;
  double seconds = 0.0;
};
MinimizeOutcome minimize_check(const Problem& pr);

// Chains at (bubble, bubble), (bubble, 2-dilate), (bubble, gaussian) and the
// weight concavity step when the weight is non-trivial.
SuiteResult transport_suite(const Problem& pr);

SuiteResult verify_norm(const Problem& pr);
SuiteResult verify_bubble(const Problem& pr);
SuiteResult verify_identities(const Problem& pr);
SuiteResult verify_sobolev(const Problem& pr);
SuiteResult run_minimize(const Problem& pr);

}  // namespace conelab
