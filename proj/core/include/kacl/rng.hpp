#pragma once

#include <cstdint>

namespace kl {

// Counter-based splittable generator. A stream is identified by
// (master seed, stream id); draws are a pure function of (key, counter),
// so parallel tasks with distinct stream ids are replayable regardless of
// scheduling.
class Rng {
 public:
  Rng() = default;
  static Rng keyed(std::uint64_t seed, std::uint64_t stream);

  // Derive an independent child stream without disturbing this one.
  Rng split(std::uint64_t substream) const;

  std::uint64_t next_u64();
  // Uniform in [0,1).
  double uniform();
  double uniform(double lo, double hi);
  // Standard normal (Box-Muller on the counter stream).
  double normal();
  // Exact Poisson(mean) sample: sequential inversion for small means,
  // transformed rejection (PTRS) otherwise.
  std::uint64_t poisson(double mean);

 private:
  std::uint64_t key_ = 0;
  std::uint64_t ctr_ = 0;
  std::uint64_t poisson_small(double mean);
  std::uint64_t poisson_ptrs(double mean);
};

}  // namespace kl
