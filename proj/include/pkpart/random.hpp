#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace pkpart {

// Deterministic random stream. A stream is identified by a 64-bit key; split()
// derives children from the key alone, so a child's draws do not depend on how
// much of the parent has been consumed.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed = 0);

  RandomSource split(std::uint64_t index) const;
  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on the open interval (0, 1).
  double uniform();
  std::size_t uniform_index(std::size_t n);
  double exponential();
  double normal();
  // Gamma(shape, rate 1), Marsaglia-Tsang squeeze with the U^(1/a) boost for
  // shape < 1.
  double gamma(double shape);
  double beta(double a, double b);

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace pkpart
