#pragma once

#include "conelab/types.hpp"

#include <cstdint>
#include <limits>

namespace conelab {

// Counter-based random stream: the k-th draw of stream (seed, id) is a pure
// function of (seed, id, k), so streams can be split across workers and the
// results stay reproducible regardless of scheduling.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller; platform independent unlike <random>.
  double normal();
  Vec normal_vector(int n);
  // Uniform on the Euclidean unit sphere.
  Vec unit_vector(int n);

  RandomStream split(std::uint64_t child) const;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace conelab
