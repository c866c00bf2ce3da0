#include "kacl/dos.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "kacl/errors.hpp"
#include "kacl/grid.hpp"

namespace kl {

namespace {
void finalize_moments(DosEstimate& dos, const std::vector<double>& sum,
                      const std::vector<double>& sumsq, int n) {
  const std::size_t g = dos.lambda.size();
  dos.cumulative.resize(g);
  dos.stderr_.resize(g);
  dos.n_realizations = n;
  for (std::size_t j = 0; j < g; ++j) {
    const double mean = sum[j] / n;
    dos.cumulative[j] = mean;
    const double var = n > 1 ? std::max(0.0, (sumsq[j] - n * mean * mean) / (n - 1.0)) : 0.0;
    dos.stderr_[j] = std::sqrt(var / n);
  }
}
}  // namespace

DosEstimate empirical_dos(const std::vector<Spectrum>& spectra,
                          const std::vector<double>& volumes,
                          const std::vector<double>& lambda_grid) {
  if (spectra.empty() || spectra.size() != volumes.size()) {
    throw invalid_parameter("empirical_dos: need matching, nonempty spectra and volumes");
  }
  if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end())) {
    throw invalid_parameter("empirical_dos: lambda grid must be nondecreasing");
  }
  DosEstimate dos;
  dos.lambda = lambda_grid;
  dos.volume = volumes[0];
  const std::size_t g = lambda_grid.size();
  std::vector<double> sum(g, 0.0), sumsq(g, 0.0);
  for (std::size_t r = 0; r < spectra.size(); ++r) {
    if (!(volumes[r] > 0.0)) {
      throw invalid_parameter("empirical_dos: volumes must be positive");
    }
    const auto& ev = spectra[r].eigenvalues;  // nondecreasing; empty if no domain
    for (std::size_t j = 0; j < g; ++j) {
      const auto cnt = std::upper_bound(ev.begin(), ev.end(), lambda_grid[j]) -
                       ev.begin();
      const double m = static_cast<double>(cnt) / volumes[r];
      sum[j] += m;
      sumsq[j] += m * m;
    }
  }
  finalize_moments(dos, sum, sumsq, static_cast<int>(spectra.size()));
  return dos;
}

struct EigenvalueCounter::Impl {
  Eigen::SparseMatrix<double> base;     // A
  Eigen::SparseMatrix<double> identity;
  mutable Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
};

EigenvalueCounter::EigenvalueCounter(const SparseOperator& op)
    : impl_(new Impl) {
  impl_->base = op.mat;
  impl_->identity.resize(op.mat.rows(), op.mat.cols());
  impl_->identity.setIdentity();
  impl_->ldlt.analyzePattern(impl_->base);
  impl_->analyzed = true;
}

EigenvalueCounter::~EigenvalueCounter() { delete impl_; }
EigenvalueCounter::EigenvalueCounter(EigenvalueCounter&& o) noexcept
    : impl_(o.impl_) {
  o.impl_ = nullptr;
}
EigenvalueCounter& EigenvalueCounter::operator=(EigenvalueCounter&& o) noexcept {
  std::swap(impl_, o.impl_);
  return *this;
}

std::int64_t EigenvalueCounter::count_below(double lambda) const {
  // A tiny shift jitter recovers from an exactly singular A - lambda I.
  double shift = lambda;
  double step = 1e-10 * (1.0 + std::abs(lambda));
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::SparseMatrix<double> shifted =
        impl_->base - shift * impl_->identity;
    impl_->ldlt.factorize(shifted);
    if (impl_->ldlt.info() == Eigen::Success) {
      const auto& dvec = impl_->ldlt.vectorD();
      std::int64_t neg = 0;
      bool degenerate = false;
      for (Eigen::Index i = 0; i < dvec.size(); ++i) {
        if (dvec[i] < 0.0) {
          ++neg;
        } else if (dvec[i] == 0.0) {
          degenerate = true;
          break;
        }
      }
      if (!degenerate) return neg;
    }
    // The unpivoted LDL^T can break down whenever the shift is close to an
    // eigenvalue; in the bulk of a large spectrum the spacing is tiny, so
    // escape geometrically.  A displacement of 1e-5 (1 + |lambda|) moves a
    // negligible fraction of the spectrum across the cut.
    shift += step;
    step *= 10.0;
    if (step > 1e-4 * (1.0 + std::abs(lambda))) break;
  }
  throw convergence_failure("count_below: LDL^T factorization failed repeatedly near the shift");
}

DosEstimate dos_by_counting(const ModelParams& params, double ell, double h,
                            const std::vector<double>& lambda_grid,
                            int n_realizations, std::uint64_t seed) {
  params.validate();
  if (!(ell > 0.0) || !(h > 0.0) || n_realizations < 1) {
    throw invalid_parameter("dos_by_counting: need ell > 0, h > 0, n >= 1");
  }
  if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()) ||
      lambda_grid.empty()) {
    throw invalid_parameter("dos_by_counting: lambda grid must be nonempty and sorted");
  }
  const Box box = Box::centered(params.d, ell);
  const Box region = box.inflated(params.a);
  DosEstimate dos;
  dos.lambda = lambda_grid;
  dos.volume = box.volume();
  const std::size_t g = lambda_grid.size();
  std::vector<double> sum(g, 0.0), sumsq(g, 0.0);
  for (int r = 0; r < n_realizations; ++r) {
    Rng rng = Rng::keyed(seed, r);
    const Cloud cloud = sample_cloud(region, params, rng);
    const GridDomain dom = build_mask(box, cloud, params.a, h);
    if (dom.n_active == 0) continue;  // zero counting function
    const SparseOperator op = assemble_half_laplacian(dom);
    EigenvalueCounter counter(op);
    for (std::size_t j = 0; j < g; ++j) {
      const double m = counter.count_below(lambda_grid[j]) / dos.volume;
      sum[j] += m;
      sumsq[j] += m * m;
    }
  }
  finalize_moments(dos, sum, sumsq, n_realizations);
  return dos;
}

BridgeSample bridge_sausage_volume(double t, double a, int d, int steps,
                                   double resolution, Rng& rng) {
  if (!(t > 0.0) || !(a > 0.0) || d < 1 || steps < 2 || !(resolution > 0.0)) {
    throw invalid_parameter("bridge_sausage_volume: bad parameters");
  }
  BridgeSample out;
  out.t = t;
  out.steps = steps;
  out.path.assign(static_cast<std::size_t>(steps + 1) * d, 0.0);

  // Sequential conditional sampling of the pinned bridge: given X_{i-1},
  // X_i ~ N(X_{i-1} (T - t_i)/(T - t_{i-1}), dt (T - t_i)/(T - t_{i-1})).
  const double dt = t / steps;
  for (int i = 1; i < steps; ++i) {
    const double remain_prev = t - (i - 1) * dt;
    const double remain = t - i * dt;
    const double shrink = remain / remain_prev;
    const double sd = std::sqrt(dt * shrink);
    for (int k = 0; k < d; ++k) {
      const double prev = out.path[static_cast<std::size_t>(i - 1) * d + k];
      out.path[static_cast<std::size_t>(i) * d + k] =
          prev * shrink + sd * rng.normal();
    }
  }
  // X_steps stays pinned at 0.

  // Occupancy grid over the bounding box of the path, padded by a.
  std::vector<double> lo(d, 0.0), hi(d, 0.0);
  for (int i = 0; i <= steps; ++i) {
    for (int k = 0; k < d; ++k) {
      const double v = out.path[static_cast<std::size_t>(i) * d + k];
      lo[k] = std::min(lo[k], v);
      hi[k] = std::max(hi[k], v);
    }
  }
  std::vector<std::int64_t> shape(d);
  std::vector<double> origin(d);
  std::int64_t total = 1;
  for (int k = 0; k < d; ++k) {
    origin[k] = lo[k] - a - resolution;
    shape[k] = static_cast<std::int64_t>(
                   std::ceil((hi[k] + a + resolution - origin[k]) / resolution)) +
               1;
    total *= shape[k];
  }
  std::vector<std::uint8_t> hit(total, 0);
  std::vector<std::uint8_t> hit_ball(total, 0);
  const std::int64_t reach = static_cast<std::int64_t>(std::ceil(a / resolution));
  const double a2 = a * a;

  std::vector<std::int64_t> base(d), offs(d);
  auto mark = [&](const double* p, std::vector<std::uint8_t>& grid) {
    for (int k = 0; k < d; ++k) {
      base[k] = static_cast<std::int64_t>(std::floor((p[k] - origin[k]) / resolution));
      offs[k] = -reach;
    }
    while (true) {
      double r2 = 0.0;
      std::int64_t flat = 0;
      bool inside = true;
      for (int k = 0; k < d; ++k) {
        const std::int64_t c = base[k] + offs[k];
        if (c < 0 || c >= shape[k]) {
          inside = false;
          break;
        }
        const double center = origin[k] + (c + 0.5) * resolution;
        const double dx = center - p[k];
        r2 += dx * dx;
        flat = flat * shape[k] + c;
      }
      if (inside && r2 <= a2) grid[flat] = 1;
      int k = d - 1;
      while (k >= 0 && ++offs[k] > reach) offs[k--] = -reach;
      if (k < 0) break;
    }
  };
  for (int i = 0; i <= steps; ++i) {
    mark(out.path.data() + static_cast<std::size_t>(i) * d, hit);
  }
  mark(out.path.data(), hit_ball);  // the a-ball of the starting point

  const double cell = std::pow(resolution, d);
  std::int64_t count = 0, count_ball = 0;
  for (std::int64_t i = 0; i < total; ++i) {
    count += hit[i];
    count_ball += hit_ball[i];
  }
  out.sausage_volume = count * cell;
  out.ball_volume_grid = count_ball * cell;
  return out;
}

LaplaceEstimate dos_laplace(double t, const ModelParams& params, int mc_budget,
                            std::uint64_t seed, int steps, double resolution) {
  // nu = 0 (no obstacles) is a legitimate bridge check here, so the usual
  // parameter validation is relaxed to nu >= 0.
  if (params.d < 2 || !(params.nu >= 0.0) || !(params.a > 0.0)) {
    throw invalid_parameter("dos_laplace: need d >= 2, nu >= 0, a > 0");
  }
  if (!(t > 0.0) || mc_budget < 1) {
    throw invalid_parameter("dos_laplace: need t > 0 and a positive budget");
  }
  if (resolution <= 0.0) resolution = params.a / 16.0;
  const double prefactor =
      std::pow(2.0 * M_PI * t, -0.5 * params.d);
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < mc_budget; ++i) {
    Rng rng = Rng::keyed(seed, i);
    const BridgeSample b =
        bridge_sausage_volume(t, params.a, params.d, steps, resolution, rng);
    const double v = prefactor * std::exp(-params.nu * b.sausage_volume);
    sum += v;
    sumsq += v * v;
  }
  LaplaceEstimate est;
  est.t = t;
  est.n = mc_budget;
  est.value = sum / mc_budget;
  const double var = mc_budget > 1
                         ? std::max(0.0, (sumsq - mc_budget * est.value * est.value) /
                                             (mc_budget - 1.0))
                         : 0.0;
  est.se = std::sqrt(var / mc_budget);
  return est;
}

double laplace_of_dos(const DosEstimate& dos, double t) {
  double acc = 0.0;
  double prev = 0.0;
  for (std::size_t j = 0; j < dos.lambda.size(); ++j) {
    const double inc = dos.cumulative[j] - prev;
    prev = dos.cumulative[j];
    if (inc > 0.0) acc += inc * std::exp(-t * dos.lambda[j]);
  }
  return acc;
}

LifshitzFit lifshitz_fit(const DosEstimate& dos, const ModelParams& params,
                         double lo, double hi) {
  std::vector<double> xs, ys;
  double usable_lo = std::numeric_limits<double>::infinity();
  double usable_hi = -usable_lo;
  for (std::size_t j = 0; j < dos.lambda.size(); ++j) {
    if (dos.cumulative[j] > 0.0 && dos.lambda[j] > 0.0) {
      usable_lo = std::min(usable_lo, dos.lambda[j]);
      usable_hi = std::max(usable_hi, dos.lambda[j]);
      if (dos.lambda[j] >= lo && dos.lambda[j] <= hi) {
        xs.push_back(std::pow(dos.lambda[j], -0.5 * params.d));
        ys.push_back(-std::log(dos.cumulative[j]));
      }
    }
  }
  if (xs.size() < 5) {
    std::ostringstream msg;
    msg << "lifshitz_fit: only " << xs.size()
        << " usable grid points in [" << lo << ", " << hi
        << "]; positive-mass range is [" << usable_lo << ", " << usable_hi
        << "]";
    throw insufficient_data(msg.str());
  }
  const Eigen::Index n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = xs[i];
    X(i, 1) = std::sqrt(xs[i]);
    X(i, 2) = 1.0;
    y(i) = ys[i];
  }
  const Eigen::Vector3d coef =
      X.colPivHouseholderQr().solve(y);
  LifshitzFit fit;
  fit.n_points = static_cast<int>(xs.size());
  fit.slope = coef(0);
  fit.curvature = coef(1);
  fit.intercept = coef(2);
  const Constants c = constants(params.d, params.nu);
  fit.theory = params.nu * c.omega_d * std::pow(c.lambda_d, 0.5 * params.d);
  fit.relative_error = std::abs(fit.slope - fit.theory) / fit.theory;
  return fit;
}

void write_dos_csv(std::ostream& os, const DosEstimate& dos) {
  os << "lambda,cumulative,stderr,n\n";
  char buf[128];
  for (std::size_t j = 0; j < dos.lambda.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%d\n", dos.lambda[j],
                  dos.cumulative[j], dos.stderr_[j], dos.n_realizations);
    os << buf;
  }
}

}  // namespace kl
