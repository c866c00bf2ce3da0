#pragma once

#include <cstdint>
#include <vector>

#include "kacl/eigensolver.hpp"
#include "kacl/model.hpp"
#include "kacl/spectral_stats.hpp"

namespace kl {

// Expansion ratio of the gentle blow-up, lambda = exp(u / |D0|).
double expansion_ratio(double u, double D0_volume);

// Homothety x -> lambda x applied to every cloud point and the region.
// The obstacle radius is left untouched; radius handling (a vs lambda a)
// is the caller's choice.
Cloud blow_up(const Cloud& cloud, double u, double D0_volume);

// Radon-Nikodym weight of the blown-up law with respect to the original one,
// restricted to the window lambda D0^a:
//   exp{nu (lambda^d - 1) |D0^a|} * exp{-(d u / |D0|) * omega(lambda D0^a)}.
// D0 must be centered at the origin.
double rn_weight(const Cloud& cloud, double u, const Box& D0, double a,
                 double nu);

struct ScaledPair {
  Spectrum original;  // -1/2 Laplacian on D0 \ union B(x, a)
  Spectrum scaled;    // on lambda D0 \ union B(lambda x, lambda a), spacing lambda h
  double lambda_ratio = 1.0;
};

// Matched re-rasterization: the scaled grid is the image of the original one,
// so lambda_scaled * lambda^2 = lambda_orig up to rounding.
ScaledPair scaled_eigenproblem(const Cloud& cloud, double u, const Box& D0,
                               double a, double h, std::uint64_t seed = 0);

struct Schedule {
  double sigma0 = 0.0;
  double c_bar = 1.0;
  double c_star = 5.0;
  int m = 0;
  std::vector<double> u;  // u_1 < ... < u_m in (0,1)
};

// u_{i+1} = c_bar sigma0 + (c_star + 2) u_i starting from u_0 = 0; throws
// schedule_infeasible when u_m >= 1.
Schedule make_schedule(double sigma0, int m, double c_bar, double c_star);

// Closed form c_bar sigma0 ((c_star+2)^i - 1)/(c_star+1), for cross-checks.
double schedule_closed_form(double sigma0, double c_bar, double c_star, int i);

struct Interval {
  double lo = 0.0, hi = 0.0;
};

// Target intervals
//   J_i = [t e^{-(c*+2) u_i/|D0|}, (t+eps) e^{5 eta |D0|^{1/2} - 2 u_i/|D0|}].
// Asserts pairwise disjointness and inclusion in (0, t); throws
// regime_violation otherwise.
std::vector<Interval> target_intervals(double t, double eps_ell,
                                       const Schedule& schedule,
                                       double D0_volume, double eta_ell);

// Probability-inflation constant K = e^{2 d nu (1+2a)^d}.
double deconcentration_K(int d, double nu, double a);

struct SandwichReport {
  double lam_orig = 0.0;    // lambda_1(D0), obstacles of radius a
  double lam_scaled = 0.0;  // lambda~_1(lambda D0), radius lambda a, same cloud
  bool hyp1 = false;        // scaled eigenfunction <= t1 outside D0
  bool hyp2 = false;        // original eigenfunction <= t2 on the lambda a shells
  double bound1 = 0.0;      // lam_scaled (1 - 4 t1 |D0|^{1/2})^{-1}
  double bound2 = 0.0;      // lam_orig   (1 - 4 t2 |D0|^{1/2})^{-1}
  bool concl1 = false;      // lam_orig   <= bound1 (1 + 2 eps_h)
  bool concl2 = false;      // lam_scaled <= bound2 (1 + 2 eps_h)
  double slack1 = 0.0;      // bound1 (1 + 2 eps_h) - lam_orig
  double slack2 = 0.0;
};

SandwichReport sandwich_check(const Cloud& cloud, double u, const Box& D0,
                              double a, double h, double t1, double t2,
                              double eps_h, std::uint64_t seed = 0);

struct DeconcSeedRecord {
  std::uint64_t seed = 0;
  double lambda1 = 0.0;
  bool loc_pass = false;
  bool in_J = false;              // lambda1 in J and localization passes
  std::vector<std::uint8_t> in_Ji;
  double weight = 1.0;            // rn weight at u_1
};

struct DeconcResult {
  double t = 0.0;
  double eps_ell = 0.0;
  double K = 0.0;
  int n = 0;
  double lhs = 0.0, lhs_se = 0.0;
  std::vector<double> rhs, rhs_se;
  std::vector<double> ratios;  // NaN when the denominator count is zero
  std::vector<Interval> intervals;
  std::vector<DeconcSeedRecord> records;
};

struct DeconcOptions {
  ModelParams params;
  double ell = 0.0;       // geometry scale fixing L0, eps_ell, eta_ell
  double h = 0.0;
  double Gamma = 1.0;
  double sigma = 0.1;
  double eta_hat = 0.0;   // 0 -> default 1/(2d)
  Schedule schedule;
  double t = 0.0;         // <= 0: estimate the Gamma-quantile first
  int n_seeds = 1000;
  int n_quantile = 200;
  std::uint64_t seed = 0;
  // Empty: use target_intervals; otherwise taken as-is (degenerate runs).
  std::vector<Interval> intervals_override;
};

DeconcResult deconcentration_experiment(const DeconcOptions& opt);

}  // namespace kl
