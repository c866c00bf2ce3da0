#include "kacl/deconcentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kacl/errors.hpp"

namespace kl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_centered(const Box& box) {
  for (int k = 0; k < box.dim(); ++k) {
    if (std::abs(box.lo[k] + box.hi[k]) > 1e-9 * std::max(1.0, box.side(k))) {
      throw invalid_parameter("rn_weight: window box must be centered at the origin");
    }
  }
}
}  // namespace

double expansion_ratio(double u, double D0_volume) {
  if (!(u >= 0.0 && u < 1.0)) {
    throw invalid_parameter("expansion_ratio: u must lie in [0,1)");
  }
  if (!(D0_volume > 0.0)) {
    throw invalid_parameter("expansion_ratio: box volume must be positive");
  }
  return std::exp(u / D0_volume);
}

Cloud blow_up(const Cloud& cloud, double u, double D0_volume) {
  const double lambda = expansion_ratio(u, D0_volume);
  if (cloud.d > 0 && std::pow(lambda, cloud.d) > 2.0) {
    throw regime_violation("blow_up: expansion ratio^d exceeds 2; box too small for u");
  }
  Cloud out = cloud;
  for (double& c : out.pts) c *= lambda;
  out.region = cloud.region.scaled(lambda);
  return out;
}

double rn_weight(const Cloud& cloud, double u, const Box& D0, double a,
                 double nu) {
  require_centered(D0);
  const int d = D0.dim();
  const double vol = D0.volume();
  const double lambda = expansion_ratio(u, vol);
  const double lam_d = std::pow(lambda, d);
  if (lam_d > 2.0) {
    throw regime_violation("rn_weight: expansion ratio^d exceeds 2");
  }
  const Box window = D0.inflated(a);
  const Box blown = window.scaled(lambda);
  std::int64_t count = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (blown.contains(cloud.point(i))) ++count;
  }
  return std::exp(nu * (lam_d - 1.0) * window.volume() -
                  (d * u / vol) * static_cast<double>(count));
}

ScaledPair scaled_eigenproblem(const Cloud& cloud, double u, const Box& D0,
                               double a, double h, std::uint64_t seed) {
  const double vol = D0.volume();
  const double lambda = expansion_ratio(u, vol);

  ScaledPair pair;
  pair.lambda_ratio = lambda;

  SolveOptions opts;
  opts.seed = seed;

  const GridDomain dom = build_mask(D0, cloud, a, h);
  pair.original = dom.n_active == 0
                      ? infinite_spectrum(h, D0.dim())
                      : smallest_eigenpairs(assemble_half_laplacian(dom), 1, opts);

  const Cloud blown = blow_up(cloud, u, vol);
  const GridDomain dom2 =
      build_mask(D0.scaled(lambda), blown, lambda * a, lambda * h);
  pair.scaled = dom2.n_active == 0
                    ? infinite_spectrum(lambda * h, D0.dim())
                    : smallest_eigenpairs(assemble_half_laplacian(dom2), 1, opts);
  return pair;
}

Schedule make_schedule(double sigma0, int m, double c_bar, double c_star) {
  if (!(sigma0 > 0.0) || m < 1 || !(c_bar > 0.0) || !(c_star > 0.0)) {
    throw invalid_parameter("make_schedule: need sigma0 > 0, m >= 1, c_bar > 0, c_star > 0");
  }
  Schedule s;
  s.sigma0 = sigma0;
  s.c_bar = c_bar;
  s.c_star = c_star;
  s.m = m;
  double u = 0.0;
  for (int i = 1; i <= m; ++i) {
    u = c_bar * sigma0 + (c_star + 2.0) * u;
    if (!(u < 1.0)) {
      std::ostringstream msg;
      msg << "make_schedule: u_" << i << " = " << u
          << " leaves [0,1); reduce sigma0 or the number of steps";
      throw schedule_infeasible(msg.str());
    }
    s.u.push_back(u);
  }
  return s;
}

double schedule_closed_form(double sigma0, double c_bar, double c_star, int i) {
  return c_bar * sigma0 * (std::pow(c_star + 2.0, i) - 1.0) / (c_star + 1.0);
}

std::vector<Interval> target_intervals(double t, double eps_ell,
                                       const Schedule& schedule,
                                       double D0_volume, double eta_ell) {
  if (!(t > 0.0) || !(eps_ell >= 0.0) || !(D0_volume > 0.0)) {
    throw invalid_parameter("target_intervals: need t > 0, eps_ell >= 0, positive volume");
  }
  std::vector<Interval> out;
  out.reserve(schedule.u.size());
  const double root_vol = std::sqrt(D0_volume);
  for (double u : schedule.u) {
    Interval J;
    J.lo = t * std::exp(-(schedule.c_star + 2.0) * u / D0_volume);
    J.hi = (t + eps_ell) * std::exp(5.0 * eta_ell * root_vol - 2.0 * u / D0_volume);
    out.push_back(J);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i].hi < t)) {
      std::ostringstream msg;
      msg << "target_intervals: interval " << i + 1 << " = [" << out[i].lo
          << ", " << out[i].hi << "] is not contained in (0, " << t << ")";
      throw regime_violation(msg.str());
    }
    if (i + 1 < out.size() && !(out[i + 1].hi < out[i].lo)) {
      std::ostringstream msg;
      msg << "target_intervals: intervals " << i + 1 << " and " << i + 2
          << " overlap";
      throw regime_violation(msg.str());
    }
  }
  return out;
}

double deconcentration_K(int d, double nu, double a) {
  return std::exp(2.0 * d * nu * std::pow(1.0 + 2.0 * a, d));
}

SandwichReport sandwich_check(const Cloud& cloud, double u, const Box& D0,
                              double a, double h, double t1, double t2,
                              double eps_h, std::uint64_t seed) {
  const double vol = D0.volume();
  const double root_vol = std::sqrt(vol);
  if (!(t1 > 0.0 && t1 < 0.25 / root_vol) || !(t2 > 0.0 && t2 < 0.25 / root_vol)) {
    throw invalid_parameter("sandwich_check: thresholds must lie in (0, 1/(4 |D0|^{1/2}))");
  }
  const double lambda = expansion_ratio(u, vol);

  SolveOptions opts;
  opts.seed = seed;

  const GridDomain dom = build_mask(D0, cloud, a, h);
  const Spectrum orig = dom.n_active == 0
                            ? infinite_spectrum(h, D0.dim())
                            : smallest_eigenpairs(assemble_half_laplacian(dom), 1, opts);

  const Cloud blown = blow_up(cloud, u, vol);
  const GridDomain dom2 =
      build_mask(D0.scaled(lambda), blown, lambda * a, lambda * h);
  const Spectrum scaled =
      dom2.n_active == 0
          ? infinite_spectrum(lambda * h, D0.dim())
          : smallest_eigenpairs(assemble_half_laplacian(dom2), 1, opts);

  SandwichReport rep;
  rep.lam_orig = orig.lambda(0);
  rep.lam_scaled = scaled.lambda(0);

  // Hypothesis of the upper sandwich: the scaled ground state is small
  // everywhere outside the original box.
  double max_outside = 0.0;
  if (!scaled.empty_domain) {
    std::vector<double> x(D0.dim());
    for (std::int64_t i = 0; i < dom2.n_active; ++i) {
      dom2.coord_of_active(i, x.data());
      if (!D0.contains(x)) {
        max_outside = std::max(max_outside, std::abs(scaled.vectors(i, 0)));
      }
    }
  }
  rep.hyp1 = max_outside <= t1;

  // Hypothesis of the lower sandwich: the original ground state is small on
  // the annuli a < |x - y| <= lambda a around the obstacle centers.
  double max_shell = 0.0;
  if (!orig.empty_domain) {
    std::vector<double> x(D0.dim());
    for (std::int64_t i = 0; i < dom.n_active; ++i) {
      dom.coord_of_active(i, x.data());
      if (!is_vacant(x, cloud, lambda * a)) {
        max_shell = std::max(max_shell, std::abs(orig.vectors(i, 0)));
      }
    }
  }
  rep.hyp2 = max_shell <= t2;

  rep.bound1 = rep.lam_scaled / (1.0 - 4.0 * t1 * root_vol);
  rep.bound2 = rep.lam_orig / (1.0 - 4.0 * t2 * root_vol);
  const double slack = 1.0 + 2.0 * eps_h;
  rep.concl1 = rep.lam_orig <= rep.bound1 * slack;
  rep.concl2 = rep.lam_scaled <= rep.bound2 * slack;
  rep.slack1 = rep.bound1 * slack - rep.lam_orig;
  rep.slack2 = rep.bound2 * slack - rep.lam_scaled;
  return rep;
}

DeconcResult deconcentration_experiment(const DeconcOptions& opt) {
  opt.params.validate();
  if (opt.n_seeds < 1 || !(opt.h > 0.0)) {
    throw invalid_parameter("deconcentration_experiment: need n_seeds >= 1 and h > 0");
  }
  const QuantileSpec spec = make_quantile_spec(opt.params, opt.ell, opt.Gamma,
                                               opt.sigma, opt.eta_hat);
  const int d = opt.params.d;
  const Box D0 = Box::centered(d, spec.L0 / 2.0);
  const Box d0int = interior_box(D0, opt.params, opt.ell);
  const Box region = D0.inflated(opt.params.a);
  const double vol = D0.volume();

  auto lambda1_of = [&](Rng& rng, Cloud* keep, LocalizationReport* loc) {
    const Cloud cloud = sample_cloud(region, opt.params, rng);
    if (keep) *keep = cloud;
    const GridDomain dom = build_mask(D0, cloud, opt.params.a, opt.h);
    if (dom.n_active == 0) {
      if (loc) *loc = LocalizationReport{};
      return kInf;
    }
    SolveOptions opts;
    opts.seed = rng.split(0xE1).next_u64();
    const Spectrum s = smallest_eigenpairs(assemble_half_laplacian(dom), 1, opts);
    if (loc) *loc = localization_check(s, dom, d0int, spec.eta_ell);
    return s.lambda(0);
  };

  double t = opt.t;
  if (!(t > 0.0)) {
    std::vector<double> samples;
    samples.reserve(opt.n_quantile);
    for (int i = 0; i < opt.n_quantile; ++i) {
      Rng rng = Rng::keyed(opt.seed, (1ull << 32) + i);
      samples.push_back(lambda1_of(rng, nullptr, nullptr));
    }
    t = quantile_t(samples, spec, 1000, opt.seed).t_hat;
  }

  DeconcResult res;
  res.t = t;
  res.eps_ell = spec.eps_ell;
  res.K = deconcentration_K(d, opt.params.nu, opt.params.a);
  res.n = opt.n_seeds;
  res.intervals = opt.intervals_override.empty()
                      ? target_intervals(t, spec.eps_ell, opt.schedule, vol,
                                         spec.eta_ell)
                      : opt.intervals_override;
  const double u1 = opt.schedule.u.empty() ? 0.0 : opt.schedule.u.front();

  const std::size_t m = res.intervals.size();
  std::int64_t lhs_count = 0;
  std::vector<std::int64_t> rhs_count(m, 0);
  res.records.resize(opt.n_seeds);
  for (int i = 0; i < opt.n_seeds; ++i) {
    Rng rng = Rng::keyed(opt.seed, i);
    DeconcSeedRecord& rec = res.records[i];
    rec.seed = i;
    Cloud cloud;
    LocalizationReport loc;
    rec.lambda1 = lambda1_of(rng, &cloud, &loc);
    rec.loc_pass = loc.pass;
    rec.in_J = rec.lambda1 >= t && rec.lambda1 <= t + spec.eps_ell && loc.pass;
    rec.in_Ji.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      rec.in_Ji[j] = rec.lambda1 >= res.intervals[j].lo &&
                     rec.lambda1 <= res.intervals[j].hi;
      rhs_count[j] += rec.in_Ji[j];
    }
    rec.weight = rn_weight(cloud, u1, D0, opt.params.a, opt.params.nu);
    lhs_count += rec.in_J;
  }

  const double n = static_cast<double>(opt.n_seeds);
  auto binom_se = [n](double p) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / n); };
  res.lhs = lhs_count / n;
  res.lhs_se = binom_se(res.lhs);
  res.rhs.resize(m);
  res.rhs_se.resize(m);
  res.ratios.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    res.rhs[j] = rhs_count[j] / n;
    res.rhs_se[j] = binom_se(res.rhs[j]);
    res.ratios[j] = rhs_count[j] == 0
                        ? std::numeric_limits<double>::quiet_NaN()
                        : res.lhs / res.rhs[j];
  }
  return res;
}

}  // namespace kl
