#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "kacl/grid.hpp"

namespace kl {

// k lowest eigenpairs of the discrete -1/2 Laplacian. Eigenvectors are
// orthonormal in the h^d-weighted discrete L2 inner product; the first
// eigenvector is sign-fixed so its largest-magnitude entry is positive.
// An empty domain is represented by the infinite-spectrum sentinel.
struct Spectrum {
  bool empty_domain = false;
  std::vector<double> eigenvalues;  // nondecreasing; empty iff empty_domain
  Eigen::MatrixXd vectors;          // n_active x k
  std::vector<double> residuals;    // ||A v - lambda v||_2 per pair
  int iterations = 0;
  bool k_clamped = false;
  double h = 0.0;
  int d = 0;

  double lambda(std::size_t i) const;  // +inf past the end or when empty
};

Spectrum infinite_spectrum(double h, int d);

struct SolveOptions {
  double tol = 1e-10;       // relative residual ||Av - lv|| <= tol * |l|
  int max_iterations = 5000;
  std::uint64_t seed = 0;   // starting-block seed
};

// Preconditioned block iteration (LOBPCG); block size >= k+2 so clustered
// eigenvalues are reported with multiplicity.
Spectrum smallest_eigenpairs(const SparseOperator& op, int k,
                             const SolveOptions& opts = {});

// Validation path: full dense symmetric eigendecomposition, first k values.
// Refuses matrices beyond the size guard.
std::vector<double> dense_oracle_eigs(const SparseOperator& op, int k,
                                      std::int64_t size_guard = 2000);

// CSV: index,eigenvalue,residual
void write_spectrum_csv(std::ostream& os, const Spectrum& spec);

}  // namespace kl
