#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "kacl/eigensolver.hpp"
#include "kacl/model.hpp"

namespace kl {

// Tabulated integrated density of states: cumulative[j] estimates
// M(lambda[j]) = E[#eigenvalues <= lambda[j]] / volume. Increments are
// treated as point masses at the right grid endpoint when integrating.
struct DosEstimate {
  std::vector<double> lambda;
  std::vector<double> cumulative;
  std::vector<double> stderr_;
  int n_realizations = 0;
  double volume = 0.0;  // per realization
};

// Average the per-realization counting functions of fully solved spectra.
// Counts are only meaningful up to the truncation level of each spectrum;
// the caller picks a grid below it.
DosEstimate empirical_dos(const std::vector<Spectrum>& spectra,
                          const std::vector<double>& volumes,
                          const std::vector<double>& lambda_grid);

// Sylvester inertia counting: the number of eigenvalues of op strictly below
// lambda, by the sign count of the LDL^T pivots of (A - lambda I). The
// symbolic analysis is shared across shifts.
class EigenvalueCounter {
 public:
  explicit EigenvalueCounter(const SparseOperator& op);
  ~EigenvalueCounter();
  EigenvalueCounter(EigenvalueCounter&&) noexcept;
  EigenvalueCounter& operator=(EigenvalueCounter&&) noexcept;
  std::int64_t count_below(double lambda) const;

 private:
  struct Impl;
  Impl* impl_;
};

// Production estimator: counting functions of independent clouds in B_ell.
DosEstimate dos_by_counting(const ModelParams& params, double ell, double h,
                            const std::vector<double>& lambda_grid,
                            int n_realizations, std::uint64_t seed);

// One Brownian bridge from 0 to 0 in time t, with the volume of its
// a-sausage measured by cell counting at the given resolution.
struct BridgeSample {
  double t = 0.0;
  int steps = 0;
  std::vector<double> path;       // (steps+1) x d, flattened
  double sausage_volume = 0.0;
  double ball_volume_grid = 0.0;  // a-ball of a single point on the same grid
};

BridgeSample bridge_sausage_volume(double t, double a, int d, int steps,
                                   double resolution, Rng& rng);

struct LaplaceEstimate {
  double t = 0.0;
  double value = 0.0;
  double se = 0.0;
  int n = 0;
};

// Monte Carlo for the Laplace transform of the DOS measure,
// (2 pi t)^{-d/2} E[ exp(-nu |sausage|) ] over pinned bridges.
// resolution <= 0 defaults to a/16.
LaplaceEstimate dos_laplace(double t, const ModelParams& params, int mc_budget,
                            std::uint64_t seed, int steps = 512,
                            double resolution = 0.0);

// Stieltjes integral of exp(-t lambda) against a tabulated DOS.
double laplace_of_dos(const DosEstimate& dos, double t);

struct LifshitzFit {
  double slope = 0.0;      // leading coefficient of -log M against lambda^{-d/2}
  double curvature = 0.0;  // subleading coefficient against lambda^{-d/4}
  double intercept = 0.0;
  double theory = 0.0;     // nu omega_d lambda_d^{d/2}
  double relative_error = 0.0;
  int n_points = 0;
};

// Least squares of -log M(lambda) = slope x + curvature sqrt(x) + intercept
// with x = lambda^{-d/2}; the sqrt(x) term absorbs the slowly decaying
// finite-lambda correction of the tail so the leading coefficient converges.
// Uses grid points with lambda in [lo, hi] and M > 0; throws
// insufficient_data (naming the usable range) below 5 such points.
LifshitzFit lifshitz_fit(const DosEstimate& dos, const ModelParams& params,
                         double lo, double hi);

// CSV: lambda,cumulative,stderr,n
void write_dos_csv(std::ostream& os, const DosEstimate& dos);

}  // namespace kl
