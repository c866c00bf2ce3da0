#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "kacl/dos.hpp"
#include "kacl/eigensolver.hpp"
#include "kacl/model.hpp"

namespace kl {

// Continuum Dirichlet eigenvalues of -1/2 Laplacian in (-ell, ell)^d:
// (pi^2 / (8 ell^2)) sum k_i^2, k_i >= 1, sorted, first k of them.
std::vector<double> free_box_eigenvalues(int d, double ell, int k);

// Modified single-particle levels: the computed spectrum when the vacant set
// is nonempty, otherwise the free-box levels shifted by +1.
std::vector<double> modified_spectrum(const Spectrum& spec, double ell, int k);

// Critical density integral( (e^{beta lambda} - 1)^{-1} dM ) over a tabulated
// DOS, increments placed at the right grid endpoints. Throws divergence_error
// when a positive increment sits at a non-positive or vanishing level.
double critical_density(const DosEstimate& dos, double beta);

// Mean occupation of one level at chemical potential mu < lambda.
double bose_occupation(double lambda, double beta, double mu);

// Chemical potential solving (1/volume) sum_j occupation_j = rho by bisection
// below the ground level; absolute density tolerance 1e-12. Throws
// saturation_error (with the achieved density) when the truncated spectrum
// cannot absorb rho.
double solve_mu(std::span<const double> levels, double beta, double rho,
                double volume);

// Per-level occupations; requires mu < levels[0].
std::vector<double> occupations(std::span<const double> levels, double beta,
                                double mu);

struct BecSample {
  double N = 0.0;
  double ell = 0.0;
  std::uint64_t seed = 0;
  double mu = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double frac1 = 0.0;  // ground-state occupation fraction
  double frac2 = 0.0;
};

struct BecOptions {
  ModelParams params;
  double beta = 1.0;
  double rho = 1.0;               // mean particle density
  std::vector<double> N_list;     // particle numbers, increasing
  int seeds_per_N = 8;
  int k_exact = 8;                // exactly solved low modes
  double grid_step = 0.25;        // counting grid step for the thermal tail
  double tail_tolerance = 1e-6;   // relative truncation target
  double h = 0.1;
  std::uint64_t seed = 0;
};

struct BecResult {
  std::vector<BecSample> samples;
  double rho_c = 0.0;  // 0 when no DOS table was supplied
};

// Finite-size condensation sweep: boxes of volume N/rho, exact low modes plus
// an inertia-counted thermal tail, saturation chemistry per realization.
BecResult condensation_experiment(const BecOptions& opt,
                                  const DosEstimate* dos = nullptr);

// CSV: N,ell_N,seed,mu,lambda1,lambda2,frac1,frac2
void write_bec_csv(std::ostream& os, const std::vector<BecSample>& samples);

}  // namespace kl
