#pragma once

#include "conelab/cone.hpp"
#include "conelab/norm.hpp"
#include "conelab/radial.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace conelab {

// Config or flag values that fail validation; maps to exit status 2.
class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct NormSpec {
  std::string family = "euclidean";  // euclidean | quadratic | blend | shifted
  std::vector<std::vector<double>> matrix;
  double q = 4.0;
  double eps = 0.5;
  std::vector<double> shift;
};

struct ConeSpec {
  std::string kind = "full";  // full | half | orthant | circular | product
  std::vector<double> normal;  // half; default e_n
  int rank = 1;                // orthant
  std::vector<double> axis;    // circular; default e_n
  double half_aperture = 0.7853981633974483;
  int free = 1;                // product
  std::vector<ConeSpec> tail;  // product, exactly one element
};

struct WeightSpec {
  std::string kind = "unit";  // unit | monomial
  std::vector<double> exponents;
};

// Named tolerances; every entry must be positive.
struct Tolerances {
  double pde_factor = 10.0;      // max residual <= factor * h^2
  double richardson_lo = 3.5;
  double richardson_hi = 4.5;
  double neumann = 1e-10;
  double neumann_control = 1e-3;
  double dual = 1e-8;
  double identity_v = 1e-6;
  double decay_slope = 0.01;
  double caccioppoli_slack = 0.05;
  double lemma31_constant = 1.0;
  double rigidity_factor = 5.0;
  double control_factor = 1e3;
  double minimize_rel = 5e-3;
  double fit_linf = 2e-2;
  double stationarity = 1e-8;
  double ellipticity_floor = 1e-3;
};

struct RunConfig {
  int n = 3;
  double p = 2.0;
  std::optional<double> a;  // must match the weight degree when given
  NormSpec norm;
  ConeSpec cone;
  WeightSpec weight;
  double lambda = 1.0;
  GridSpec grid;
  GridSpec extremal_grid{1e-3, 1e4, 1.02};
  Tolerances tolerances;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = "conelab_out";
};

// Parse JSON text; unknown keys and wrong types are schema errors.
RunConfig parse_config(const std::string& json_text);
std::string config_to_json(const RunConfig& c);
// Checks invariants (1 < p < n, a >= 0, tolerances > 0, dimensions) and
// throws SchemaError with a diagnostic.
void validate(const RunConfig& c);

Norm build_norm(const NormSpec& spec, int n);
Cone build_cone(const ConeSpec& spec, int n);
Weight build_weight(const WeightSpec& spec, int n);

}  // namespace conelab
