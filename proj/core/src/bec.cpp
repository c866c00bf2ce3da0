#include "kacl/bec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "kacl/errors.hpp"
#include "kacl/grid.hpp"

namespace kl {

namespace {

// All free-box levels (pi^2/(8 ell^2)) sum k_i^2 <= lam_max, sorted.
std::vector<double> free_levels_below(int d, double ell, double lam_max) {
  const double scale = M_PI * M_PI / (8.0 * ell * ell);
  const double S = lam_max / scale;
  std::vector<double> out;
  if (S < d) return out;  // even (1,...,1) is above the cut
  const std::int64_t K = static_cast<std::int64_t>(std::floor(std::sqrt(S)));
  std::vector<std::int64_t> k(d, 1);
  while (true) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += static_cast<double>(k[j]) * k[j];
    if (s <= S) out.push_back(scale * s);
    int j = d - 1;
    while (j >= 0 && ++k[j] > K) k[j--] = 1;
    if (j < 0) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

double density_at(std::span<const double> levels,
                  std::span<const double> weights, double beta, double mu,
                  double volume) {
  double acc = 0.0;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    acc += weights[j] / std::expm1(beta * (levels[j] - mu));
  }
  return acc / volume;
}

double solve_mu_weighted(std::span<const double> levels,
                         std::span<const double> weights, double beta,
                         double rho, double volume) {
  if (levels.empty() || levels.size() != weights.size()) {
    throw invalid_parameter("solve_mu: empty or mismatched level table");
  }
  if (!(beta > 0.0) || !(rho > 0.0) || !(volume > 0.0)) {
    throw invalid_parameter("solve_mu: need beta, rho, volume > 0");
  }
  const double lam1 = levels[0];
  const double tol = 1e-12 * std::max(1.0, rho);
  double hi = lam1 - std::max(1e-300, 4.0 * std::numeric_limits<double>::epsilon() *
                                          std::abs(lam1));
  const double rho_hi = density_at(levels, weights, beta, hi, volume);
  if (rho_hi < rho) {
    std::ostringstream msg;
    msg << "solve_mu: truncated spectrum saturates at density " << rho_hi
        << " < target " << rho << " (ground level " << lam1 << ", beta "
        << beta << ")";
    throw saturation_error(msg.str(), rho_hi);
  }
  double step = std::max(1.0, std::abs(lam1));
  double lo = lam1 - step;
  for (int i = 0; i < 80 && density_at(levels, weights, beta, lo, volume) > rho;
       ++i) {
    step *= 2.0;
    lo = lam1 - step;
  }
  double best_mu = hi, best_err = std::abs(rho_hi - rho);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = density_at(levels, weights, beta, mid, volume);
    const double err = std::abs(f - rho);
    if (err < best_err) {
      best_err = err;
      best_mu = mid;
    }
    if (err <= tol) break;
    (f > rho ? hi : lo) = mid;
    if (hi - lo <= std::abs(hi) * 1e-17) break;
  }
  return best_mu;
}

}  // namespace

std::vector<double> free_box_eigenvalues(int d, double ell, int k) {
  if (d < 1 || !(ell > 0.0) || k < 1) {
    throw invalid_parameter("free_box_eigenvalues: bad parameters");
  }
  // Grow the cutoff until at least k complete levels are enumerated.
  double lam_max = (M_PI * M_PI / (8.0 * ell * ell)) * (d + 3.0);
  for (int round = 0; round < 60; ++round) {
    std::vector<double> levels = free_levels_below(d, ell, lam_max);
    if (static_cast<int>(levels.size()) >= k) {
      levels.resize(k);
      return levels;
    }
    lam_max *= 2.0;
  }
  throw convergence_failure("free_box_eigenvalues: enumeration cutoff overflow");
}

std::vector<double> modified_spectrum(const Spectrum& spec, double ell, int k) {
  if (spec.empty_domain) {
    std::vector<double> levels = free_box_eigenvalues(spec.d, ell, k);
    for (double& v : levels) v += 1.0;
    return levels;
  }
  std::vector<double> levels = spec.eigenvalues;
  if (static_cast<int>(levels.size()) > k) levels.resize(k);
  return levels;
}

double critical_density(const DosEstimate& dos, double beta) {
  if (!(beta > 0.0)) throw invalid_parameter("critical_density: beta must be positive");
  double acc = 0.0, prev = 0.0;
  for (std::size_t j = 0; j < dos.lambda.size(); ++j) {
    const double inc = dos.cumulative[j] - prev;
    prev = dos.cumulative[j];
    if (inc <= 0.0) continue;
    if (!(dos.lambda[j] > 0.0) || beta * dos.lambda[j] < 1e-12) {
      std::ostringstream msg;
      msg << "critical_density: grid point " << j << " at lambda = "
          << dos.lambda[j] << " carries mass " << inc
          << " where the Bose integrand diverges";
      throw divergence_error(msg.str());
    }
    acc += inc / std::expm1(beta * dos.lambda[j]);
  }
  return acc;
}

double bose_occupation(double lambda, double beta, double mu) {
  if (!(mu < lambda)) {
    throw invalid_parameter("bose_occupation: mu must lie below the level");
  }
  return 1.0 / std::expm1(beta * (lambda - mu));
}

double solve_mu(std::span<const double> levels, double beta, double rho,
                double volume) {
  const std::vector<double> ones(levels.size(), 1.0);
  return solve_mu_weighted(levels, ones, beta, rho, volume);
}

std::vector<double> occupations(std::span<const double> levels, double beta,
                                double mu) {
  if (levels.empty()) throw invalid_parameter("occupations: empty level table");
  if (!(mu < levels[0])) {
    throw invalid_parameter("occupations: mu must lie strictly below the ground level");
  }
  std::vector<double> out(levels.size());
  for (std::size_t j = 0; j < levels.size(); ++j) {
    out[j] = 1.0 / std::expm1(beta * (levels[j] - mu));
  }
  return out;
}

BecResult condensation_experiment(const BecOptions& opt,
                                  const DosEstimate* dos) {
  opt.params.validate();
  if (opt.N_list.empty() || opt.seeds_per_N < 1 || opt.k_exact < 1 ||
      !(opt.rho > 0.0) || !(opt.beta > 0.0) || !(opt.h > 0.0) ||
      !(opt.grid_step > 0.0)) {
    throw invalid_parameter("condensation_experiment: bad options");
  }
  BecResult res;
  if (dos) res.rho_c = critical_density(*dos, opt.beta);

  const int d = opt.params.d;
  for (std::size_t iN = 0; iN < opt.N_list.size(); ++iN) {
    const double N = opt.N_list[iN];
    const double ell = 0.5 * std::pow(N / opt.rho, 1.0 / d);
    const Box box = Box::centered(d, ell);
    const double volume = box.volume();
    const Box region = box.inflated(opt.params.a);
    for (int s = 0; s < opt.seeds_per_N; ++s) {
      Rng rng = Rng::keyed(opt.seed, (iN << 24) + s);
      const Cloud cloud = sample_cloud(region, opt.params, rng);
      const GridDomain dom = build_mask(box, cloud, opt.params.a, opt.h);

      std::vector<double> levels, weights;
      std::function<std::int64_t(double)> count_below;
      std::vector<double> free_sorted;  // empty-domain fallback table
      std::optional<EigenvalueCounter> counter;

      if (dom.n_active == 0) {
        levels = modified_spectrum(infinite_spectrum(opt.h, d), ell, opt.k_exact);
        count_below = [&free_sorted](double lam) {
          return static_cast<std::int64_t>(
              std::lower_bound(free_sorted.begin(), free_sorted.end(), lam) -
              free_sorted.begin());
        };
      } else {
        SolveOptions sopts;
        sopts.seed = rng.split(0xBEC).next_u64();
        const SparseOperator op = assemble_half_laplacian(dom);
        const Spectrum spec = smallest_eigenpairs(op, opt.k_exact, sopts);
        levels = spec.eigenvalues;
        counter.emplace(op);
        count_below = [&counter](double lam) { return counter->count_below(lam); };
      }
      weights.assign(levels.size(), 1.0);
      const double lam1 = levels[0];
      const double lam2 = levels.size() > 1
                              ? levels[1]
                              : std::numeric_limits<double>::infinity();

      // Thermal tail above the exactly resolved modes, binned by counting.
      const double tol_abs = opt.tail_tolerance * opt.rho * volume;
      double g_prev = levels.back();
      if (dom.n_active == 0) {
        // Pre-enumerate generously; extended below if the loop outruns it.
        free_sorted = free_levels_below(d, ell, g_prev - 1.0 + 200.0 / opt.beta +
                                                    100.0 * opt.grid_step);
        for (double& v : free_sorted) v += 1.0;
      }
      std::int64_t c_prev = static_cast<std::int64_t>(levels.size());
      for (int bin = 0; bin < 100000; ++bin) {
        const double g = g_prev + opt.grid_step;
        const std::int64_t c = count_below(g);
        const double dn = static_cast<double>(c - c_prev);
        const double mid = 0.5 * (g_prev + g);
        if (dn > 0.0) {
          levels.push_back(mid);
          weights.push_back(dn);
        }
        const double contrib = dn / std::expm1(opt.beta * (mid - lam1));
        g_prev = g;
        c_prev = c;
        if (g > lam1 + 5.0 / opt.beta && contrib < tol_abs) break;
        // Masked domains have a finite spectrum: once every mode is
        // tabulated, further bins are empty and the tail is exact.
        if (dom.n_active > 0 &&
            c_prev >= static_cast<std::int64_t>(dom.n_active)) {
          break;
        }
      }

      // The table is built at bin midpoints; re-sort jointly just in case a
      // midpoint undercuts the last exact level.
      std::vector<std::size_t> order(levels.size());
      for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
      std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return levels[x] < levels[y];
      });
      std::vector<double> lv(levels.size()), wt(levels.size());
      for (std::size_t j = 0; j < order.size(); ++j) {
        lv[j] = levels[order[j]];
        wt[j] = weights[order[j]];
      }

      BecSample sample;
      sample.N = N;
      sample.ell = ell;
      sample.seed = s;
      sample.lambda1 = lam1;
      sample.lambda2 = lam2;
      sample.mu = solve_mu_weighted(lv, wt, opt.beta, opt.rho, volume);
      sample.frac1 = 1.0 / (std::expm1(opt.beta * (lam1 - sample.mu)) * N);
      sample.frac2 = std::isfinite(lam2)
                         ? 1.0 / (std::expm1(opt.beta * (lam2 - sample.mu)) * N)
                         : 0.0;
      res.samples.push_back(sample);
    }
  }
  return res;
}

void write_bec_csv(std::ostream& os, const std::vector<BecSample>& samples) {
  os << "N,ell_N,seed,mu,lambda1,lambda2,frac1,frac2\n";
  char buf[256];
  for (const BecSample& s : samples) {
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%llu,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.N,
                  s.ell, static_cast<unsigned long long>(s.seed), s.mu,
                  s.lambda1, s.lambda2, s.frac1, s.frac2);
    os << buf;
  }
}

}  // namespace kl
