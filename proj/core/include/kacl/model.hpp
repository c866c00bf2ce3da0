#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "kacl/rng.hpp"

namespace kl {

// Axis-aligned open box in R^d.
struct Box {
  std::vector<double> lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double side(int i) const { return hi[i] - lo[i]; }
  double volume() const;
  bool contains(std::span<const double> x) const;

  // (-half, half)^d
  static Box centered(int d, double half);
  Box scaled(double factor) const;   // homothety about the origin
  Box inflated(double pad) const;    // open pad-neighborhood
};

struct ModelParams {
  int d = 2;            // dimension, >= 2
  double nu = 1.0;      // Poisson intensity, > 0
  double a = 0.3;       // obstacle radius, > 0
  std::uint64_t seed = 0;

  void validate() const;  // throws invalid_parameter
};

// Derived constants of the model.
struct Constants {
  double omega_d;   // volume of the unit ball
  double lambda_d;  // principal Dirichlet eigenvalue of -1/2 Delta in B(0,1)
  double R0;        // (d / (nu omega_d))^{1/d}
  double c0;        // lambda_d R0^{-2}
  double c1;        // (4 pi)^{-d/4} e, sup-norm constant
};

// First positive zero of the Bessel function J_order; bracketing scan plus
// bisection on a series evaluation, tolerance 1e-12.
double bessel_j_first_zero(double order);

Constants constants(int d, double nu);

// A finite realization of the Poisson cloud restricted to 'region'.
struct Cloud {
  int d = 0;
  std::vector<double> pts;  // flattened, size() * d
  Box region;

  std::size_t size() const { return d == 0 ? 0 : pts.size() / d; }
  std::span<const double> point(std::size_t i) const {
    return {pts.data() + i * d, static_cast<std::size_t>(d)};
  }
};

// Poisson(nu |region|) points, i.i.d. uniform; deterministic in the rng state.
Cloud sample_cloud(const Box& region, const ModelParams& params, Rng& rng);
Cloud sample_cloud(const Box& region, const ModelParams& params);  // stream 0 of params.seed

// x lies outside every closed ball B(y, a), y in cloud.
bool is_vacant(std::span<const double> x, const Cloud& cloud, double a);

// CSV with header x1,...,xd plus a sidecar JSON of {d, nu, a, seed, region}.
void write_cloud_csv(std::ostream& os, const Cloud& cloud);
void write_cloud_sidecar_json(std::ostream& os, const Cloud& cloud,
                              const ModelParams& params);
Cloud read_cloud_csv(std::istream& is, const Box& region);

}  // namespace kl
