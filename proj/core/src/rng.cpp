#include "kacl/rng.hpp"

#include <cmath>

namespace kl {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace

Rng Rng::keyed(std::uint64_t seed, std::uint64_t stream) {
  Rng r;
  r.key_ = mix64(mix64(seed + kGolden) ^ mix64(stream * kGolden + 1));
  r.ctr_ = 0;
  return r;
}

Rng Rng::split(std::uint64_t substream) const {
  Rng r;
  r.key_ = mix64(key_ ^ mix64(substream * kGolden + 0x632BE59BD9B4E019ull));
  r.ctr_ = 0;
  return r;
}

std::uint64_t Rng::next_u64() { return mix64(key_ + (++ctr_) * kGolden); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  // Box-Muller; u1 bounded away from 0.
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  if (mean < 30.0) return poisson_small(mean);
  return poisson_ptrs(mean);
}

std::uint64_t Rng::poisson_small(double mean) {
  // Inversion by sequential search.
  const double L = std::exp(-mean);
  std::uint64_t k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform();
  } while (p > L);
  return k - 1;
}

std::uint64_t Rng::poisson_ptrs(double mean) {
  // Hormann's transformed rejection with squeeze (PTRS), exact for mean >= 10.
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    double u = uniform() - 0.5;
    double v = uniform();
    double us = 0.5 - std::fabs(u);
    double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * std::log(mean) - mean - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace kl
