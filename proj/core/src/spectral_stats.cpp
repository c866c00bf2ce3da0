#include "kacl/spectral_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "kacl/errors.hpp"
#include "kacl/rng.hpp"

namespace kl {

GapRecord spectral_gap(const Spectrum& spec, double sigma, double ell) {
  GapRecord rec;
  rec.ell = ell;
  rec.sigma = sigma;
  rec.lambda1 = spec.lambda(0);
  rec.lambda2 = spec.lambda(1);
  rec.gap = rec.lambda2 - rec.lambda1;
  if (std::isinf(rec.lambda1)) {
    rec.gap = std::numeric_limits<double>::infinity();
    rec.resonance = false;
    return rec;
  }
  const double threshold =
      sigma * std::pow(std::log(ell), -(1.0 + 2.0 / spec.d));
  rec.resonance = rec.gap < threshold;
  return rec;
}

QuantileSpec make_quantile_spec(const ModelParams& params, double ell,
                                double Gamma, double sigma, double eta_hat) {
  params.validate();
  if (!(Gamma > 0.0)) throw invalid_parameter("quantile spec: Gamma must be > 0");
  if (!(ell > 10.0)) throw invalid_parameter("quantile spec: ell must exceed 10");
  const Constants c = constants(params.d, params.nu);
  QuantileSpec q;
  q.Gamma = Gamma;
  q.ell = ell;
  q.eta_hat = eta_hat > 0.0 ? eta_hat : 1.0 / (2.0 * params.d);
  if (q.eta_hat >= 1.0 / params.d)
    throw invalid_parameter("quantile spec: eta_hat must lie in (0, 1/d)");

  const double logl = std::log(ell);
  const double unit = std::pow(logl, 1.0 / params.d);  // center spacing
  const double r0c = std::ceil(c.R0) + 1.0;
  q.L0 = 10.0 * r0c * unit;
  q.c_hat = std::pow(40.0 * r0c, params.d);
  q.s_ell = params.d * M_PI * M_PI / (2.0 * q.L0 * q.L0);
  q.delta_ell = std::pow(logl, -(2.0 + 2.0 / params.d));
  q.eta_ell = std::exp(-std::pow(logl, q.eta_hat));
  q.rho_ell = sigma * std::pow(logl, -(1.0 + 2.0 / params.d));
  q.eps_ell = q.rho_ell + q.delta_ell + q.eta_ell;

  // D0-boxes with center q*unit fitting inside B_ell.
  const double reach = ell - 0.5 * q.L0;
  if (reach <= 0.0) {
    q.count_all = q.count_spaced = 0;
  } else {
    const auto per_dim = [&](double spacing) {
      return 2 * static_cast<std::int64_t>(std::floor(reach / spacing)) + 1;
    };
    q.count_all = 1;
    q.count_spaced = 1;
    for (int k = 0; k < params.d; ++k) {
      q.count_all *= per_dim(unit);
      q.count_spaced *= per_dim(20.0 * r0c * unit);
    }
  }
  return q;
}

Box interior_box(const Box& D0, const ModelParams& params, double ell,
                 double side_prefactor_ceilR0, double side_offset) {
  const Constants c = constants(params.d, params.nu);
  const double unit = std::pow(std::log(ell), 1.0 / params.d);
  const double side =
      (side_prefactor_ceilR0 * std::ceil(c.R0) + side_offset) * unit;
  Box b;
  b.lo.resize(params.d);
  b.hi.resize(params.d);
  for (int k = 0; k < params.d; ++k) {
    const double mid = 0.5 * (D0.lo[k] + D0.hi[k]);
    b.lo[k] = mid - 0.5 * side;
    b.hi[k] = mid + 0.5 * side;
  }
  return b;
}

QuantileEstimate quantile_t(const std::vector<double>& samples,
                            const QuantileSpec& spec, int bootstrap_resamples,
                            std::uint64_t seed) {
  const std::size_t n = samples.size();
  if (n < 100) throw invalid_parameter("quantile_t: need at least 100 samples");
  const double p = spec.p();
  if (!(p > 0.0 && p < 1.0))
    throw invalid_parameter(
        "quantile_t: target level Gamma/|C*| outside (0,1); Gamma too large "
        "for the geometry");

  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());  // +inf sorts above all finite
  const std::size_t rank = static_cast<std::size_t>(std::ceil(p * n));
  QuantileEstimate est;
  est.p = p;
  est.t_hat = sorted[rank - 1];

  std::size_t le = 0, lt = 0;
  for (double v : samples) {
    if (v <= est.t_hat) ++le;
    if (v < est.t_hat) ++lt;
  }
  est.frac_le = static_cast<double>(le) / n;
  est.frac_lt = static_cast<double>(lt) / n;

  Rng rng = Rng::keyed(seed, 0xB007);
  std::vector<double> boots(bootstrap_resamples);
  std::vector<double> resample(n);
  for (int b = 0; b < bootstrap_resamples; ++b) {
    for (std::size_t i = 0; i < n; ++i)
      resample[i] = sorted[rng.next_u64() % n];
    std::nth_element(resample.begin(), resample.begin() + (rank - 1),
                     resample.end());
    boots[b] = resample[rank - 1];
  }
  std::sort(boots.begin(), boots.end());
  est.ci_lo = boots[static_cast<std::size_t>(0.025 * bootstrap_resamples)];
  est.ci_hi = boots[static_cast<std::size_t>(0.975 * bootstrap_resamples) - 1];
  return est;
}

LocalizationReport localization_check(const Spectrum& spec,
                                      const GridDomain& domain,
                                      const Box& d0_int, double eta_ell) {
  for (int k = 0; k < domain.d; ++k)
    if (d0_int.lo[k] < domain.box.lo[k] || d0_int.hi[k] > domain.box.hi[k])
      throw invalid_parameter("localization_check: D0^int not nested in D0");
  if (spec.empty_domain || spec.vectors.cols() < 1)
    throw invalid_parameter("localization_check: spectrum lacks eigenvector");

  LocalizationReport rep;
  std::vector<double> x(domain.d);
  for (std::int64_t i = 0; i < domain.n_active; ++i) {
    domain.coord_of_active(i, x.data());
    bool inside = true;
    for (int k = 0; k < domain.d; ++k)
      if (x[k] < d0_int.lo[k] || x[k] > d0_int.hi[k]) {  // D0^int is closed
        inside = false;
        break;
      }
    if (!inside)
      rep.max_outside = std::max(rep.max_outside, std::fabs(spec.vectors(i, 0)));
  }
  rep.pass = rep.max_outside <= eta_ell;
  return rep;
}

namespace {

// Symmetric-difference asymmetry between the active set and the lattice ball
// B(center, r), volumes counted node-wise on the common lattice.
double asymmetry_at(const GridDomain& g, const std::vector<double>& center,
                    double r) {
  const double r2 = r * r;
  const int d = g.d;
  std::int64_t in_both = 0;
  std::vector<double> x(d);
  for (std::int64_t i = 0; i < g.n_active; ++i) {
    g.coord_of_active(i, x.data());
    double rr = 0.0;
    for (int k = 0; k < d; ++k) rr += (x[k] - center[k]) * (x[k] - center[k]);
    if (rr <= r2) ++in_both;
  }
  // Ball volume on the extended lattice (nodes lo + k h, any integer k).
  std::int64_t ball = 0;
  std::vector<std::int64_t> klo(d), khi(d), idx(d);
  for (int k = 0; k < d; ++k) {
    klo[k] = static_cast<std::int64_t>(
        std::ceil((center[k] - r - g.box.lo[k]) / g.h)) - 1;
    khi[k] = static_cast<std::int64_t>(
        std::floor((center[k] + r - g.box.lo[k]) / g.h)) + 1;
    idx[k] = klo[k];
  }
  for (;;) {
    double rr = 0.0;
    for (int k = 0; k < d; ++k) {
      const double xk = g.box.lo[k] + idx[k] * g.h;
      rr += (xk - center[k]) * (xk - center[k]);
    }
    if (rr <= r2) ++ball;
    int k = d - 1;
    while (k >= 0 && ++idx[k] > khi[k]) idx[k--] = klo[k];
    if (k < 0) break;
  }
  if (ball == 0) return 2.0;
  const double both = static_cast<double>(in_both);
  return ((g.n_active - both) + (ball - both)) / static_cast<double>(ball);
}

}  // namespace

AsymmetryReport fraenkel_asymmetry(const GridDomain& domain,
                                   std::uint64_t solver_seed) {
  if (domain.n_active == 0)
    throw empty_domain_error("fraenkel_asymmetry: empty domain");
  const int d = domain.d;
  const Constants cs = constants(d, 1.0);
  const double vol = domain.n_active * std::pow(domain.h, d);
  const double r = std::pow(vol / cs.omega_d, 1.0 / d);

  AsymmetryReport rep;
  rep.radius = r;

  // Coarse candidate grid, then coordinate descent with shrinking step;
  // ties broken toward lexicographically smallest center.
  std::vector<double> best;
  double best_a = std::numeric_limits<double>::infinity();
  const int coarse = 5;
  std::vector<int> idx(d, 0);
  for (;;) {
    std::vector<double> c(d);
    for (int k = 0; k < d; ++k)
      c[k] = domain.box.lo[k] +
             (idx[k] + 1) * domain.box.side(k) / (coarse + 1);
    const double a = asymmetry_at(domain, c, r);
    if (a < best_a - 1e-15) {
      best_a = a;
      best = c;
    }
    int k = d - 1;
    while (k >= 0 && ++idx[k] == coarse) idx[k--] = 0;
    if (k < 0) break;
  }

  for (double step = 4.0 * domain.h; step >= 0.24 * domain.h; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      std::vector<int> off(d, -1);
      for (;;) {
        std::vector<double> c(d);
        for (int k = 0; k < d; ++k) c[k] = best[k] + off[k] * step;
        const double a = asymmetry_at(domain, c, r);
        if (a < best_a - 1e-15) {
          best_a = a;
          best = c;
          improved = true;
        }
        int k = d - 1;
        while (k >= 0 && ++off[k] > 1) off[k--] = -1;
        if (k < 0) break;
      }
    }
  }
  rep.A = best_a;
  rep.center = best;

  const SparseOperator op = assemble_half_laplacian(domain);
  SolveOptions opts;
  opts.seed = solver_seed;
  const Spectrum spec = smallest_eigenpairs(op, 1, opts);
  rep.fk_deficit =
      spec.eigenvalues[0] * std::pow(vol / cs.omega_d, 2.0 / d) / cs.lambda_d -
      1.0;
  return rep;
}

void write_gap_csv_header(std::ostream& os) {
  os << "seed,lambda1,lambda2,gap,resonance\n";
}

void write_gap_csv_row(std::ostream& os, std::uint64_t seed,
                       const GapRecord& rec) {
  char buf[64];
  os << seed << ",";
  std::snprintf(buf, sizeof buf, "%.17g", rec.lambda1);
  os << buf << ",";
  std::snprintf(buf, sizeof buf, "%.17g", rec.lambda2);
  os << buf << ",";
  std::snprintf(buf, sizeof buf, "%.17g", rec.gap);
  os << buf << "," << (rec.resonance ? 1 : 0) << "\n";
}

void write_quantile_csv(std::ostream& os, const QuantileSpec& spec,
                        const QuantileEstimate& est) {
  os << "Gamma,p,t_hat,ci_lo,ci_hi,s_ell\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", spec.Gamma);
  os << buf << ",";
  std::snprintf(buf, sizeof buf, "%.17g", est.p);
  os << buf << ",";
  std::snprintf(buf, sizeof buf, "%.17g", est.t_hat);
  os << buf << ",";
  std::snprintf(buf, sizeof buf, "%.17g", est.ci_lo);
  os << buf << ",";
  std::snprintf(buf, sizeof buf, "%.17g", est.ci_hi);
  os << buf << ",";
  std::snprintf(buf, sizeof buf, "%.17g", spec.s_ell);
  os << buf << "\n";
}

}  // namespace kl
