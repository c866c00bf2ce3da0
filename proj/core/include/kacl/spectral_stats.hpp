#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "kacl/eigensolver.hpp"
#include "kacl/grid.hpp"
#include "kacl/model.hpp"

namespace kl {

// Gap and resonance flag of one disorder realization in B_ell.
struct GapRecord {
  double ell = 0.0;
  double lambda1 = 0.0;  // +inf when the domain is empty
  double lambda2 = 0.0;
  double gap = 0.0;
  double sigma = 0.0;
  bool resonance = false;  // lambda1 finite and gap < sigma (log ell)^{-(1+2/d)}
};

GapRecord spectral_gap(const Spectrum& spec, double sigma, double ell);

// Geometry and thresholds of the L0-box quantile machinery.
struct QuantileSpec {
  double Gamma = 1.0;
  double ell = 0.0;
  double L0 = 0.0;            // 10 (ceil(R0)+1) (log ell)^{1/d}
  std::int64_t count_all = 0;      // |C_hat_ell|
  std::int64_t count_spaced = 0;   // |C_hat_ell^*|
  double c_hat = 0.0;         // {40 (ceil(R0)+1)}^d
  double s_ell = 0.0;         // d pi^2 / (2 L0^2)
  double delta_ell = 0.0;     // (log ell)^{-(2+2/d)}
  double eta_hat = 0.0;       // decay exponent in (0, 1/d)
  double eta_ell = 0.0;       // exp(-(log ell)^{eta_hat})
  double rho_ell = 0.0;       // sigma (log ell)^{-(1+2/d)}
  double eps_ell = 0.0;       // rho_ell + delta_ell + eta_ell

  double p() const { return Gamma / static_cast<double>(count_spaced); }
};

// eta_hat defaults to 1/(2d) when passed <= 0.
QuantileSpec make_quantile_spec(const ModelParams& params, double ell,
                                double Gamma, double sigma,
                                double eta_hat = 0.0);

// The interior box D0^int of side (2 ceil(R0) + 4)(log ell)^{1/d}; the
// side prefactor is configurable geometry.
Box interior_box(const Box& D0, const ModelParams& params, double ell,
                 double side_prefactor_ceilR0 = 2.0,
                 double side_offset = 4.0);

struct QuantileEstimate {
  double t_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double p = 0.0;
  double frac_le = 0.0;  // empirical P[lambda1 <= t_hat]
  double frac_lt = 0.0;  // empirical P[lambda1 <  t_hat]
};

// Order-statistic quantile with a bootstrap CI; infinite sentinels sort above
// all finite values. Requires n >= 100 samples and p in (0,1).
QuantileEstimate quantile_t(const std::vector<double>& samples,
                            const QuantileSpec& spec,
                            int bootstrap_resamples = 1000,
                            std::uint64_t seed = 0);

struct LocalizationReport {
  double max_outside = 0.0;
  bool pass = false;
};

// Max of |phi_1| over active nodes of D0 \ D0^int against eta_ell.
LocalizationReport localization_check(const Spectrum& spec,
                                      const GridDomain& domain,
                                      const Box& d0_int, double eta_ell);

struct AsymmetryReport {
  double A = 0.0;           // Fraenkel asymmetry in [0,2)
  double fk_deficit = 0.0;  // lambda1 (|U|/omega_d)^{2/d} / lambda_d - 1
  std::vector<double> center;
  double radius = 0.0;
};

AsymmetryReport fraenkel_asymmetry(const GridDomain& domain,
                                   std::uint64_t solver_seed = 0);

// CSV writers for gap sweeps and quantile summaries.
void write_gap_csv_header(std::ostream& os);
void write_gap_csv_row(std::ostream& os, std::uint64_t seed,
                       const GapRecord& rec);
void write_quantile_csv(std::ostream& os, const QuantileSpec& spec,
                        const QuantileEstimate& est);

}  // namespace kl
