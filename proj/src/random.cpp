#include "conelab/random.hpp"

#include <cmath>
#include <numbers>

namespace conelab {
namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : key_(mix64(seed * kGolden + mix64(stream_id + 0x632be59bd9b4e019ULL))) {}

std::uint64_t RandomStream::next_u64() {
  return mix64(key_ + kGolden * ++counter_);
}

double RandomStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Vec RandomStream::normal_vector(int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Vec RandomStream::unit_vector(int n) {
  Vec v = normal_vector(n);
  double len = v.norm();
  while (len < 1e-12) {
    v = normal_vector(n);
    len = v.norm();
  }
  return v / len;
}

RandomStream RandomStream::split(std::uint64_t child) const {
  RandomStream out(0, 0);
  out.key_ = mix64(key_ ^ mix64(child * kGolden + 1));
  return out;
}

}  // namespace conelab
