#include <doctest.h>

#include <cmath>
#include <vector>

#include "kacl/dos.hpp"
#include "kacl/errors.hpp"
#include "kacl/grid.hpp"

using namespace kl;

namespace {
Spectrum with_levels(std::vector<double> ev) {
  Spectrum s;
  s.eigenvalues = std::move(ev);
  s.h = 0.1;
  s.d = 2;
  return s;
}
}  // namespace

TEST_CASE("empirical DOS averages counting functions") {
  std::vector<Spectrum> spectra;
  spectra.push_back(with_levels({1.0, 2.0, 3.0}));
  spectra.push_back(with_levels({1.5, 2.5}));
  spectra.push_back(infinite_spectrum(0.1, 2));  // contributes zero
  const std::vector<double> volumes = {2.0, 2.0, 2.0};
  const DosEstimate dos = empirical_dos(spectra, volumes, {0.5, 1.0, 2.0, 3.5});
  CHECK(dos.cumulative[0] == doctest::Approx(0.0));
  CHECK(dos.cumulative[1] == doctest::Approx((1.0 / 2.0) / 3.0));  // only 1.0 <= 1
  CHECK(dos.cumulative[2] == doctest::Approx((2.0 / 2.0 + 1.0 / 2.0) / 3.0));
  CHECK(dos.cumulative[3] == doctest::Approx((3.0 / 2.0 + 2.0 / 2.0) / 3.0));
  CHECK(dos.n_realizations == 3);
  CHECK_THROWS_AS(empirical_dos({}, {}, {1.0}), invalid_parameter);
  CHECK_THROWS_AS(empirical_dos(spectra, volumes, {2.0, 1.0}), invalid_parameter);
}

TEST_CASE("inertia counting matches the dense spectrum") {
  Box b;
  b.lo = {0.0, 0.0};
  b.hi = {2.0, 1.2};
  ModelParams p;
  p.d = 2;
  p.nu = 1.0;
  p.a = 0.2;
  Rng rng = Rng::keyed(31, 0);
  const Cloud c = sample_cloud(b.inflated(p.a), p, rng);
  const GridDomain g = build_mask(b, c, p.a, 0.08);
  REQUIRE(g.n_active > 20);
  const SparseOperator op = assemble_half_laplacian(g);
  const std::vector<double> all =
      dense_oracle_eigs(op, static_cast<int>(op.n()));
  const EigenvalueCounter counter(op);
  for (double lam : {1.0, 5.0, 12.0, 40.0, 200.0}) {
    const std::int64_t expected =
        std::lower_bound(all.begin(), all.end(), lam) - all.begin();
    CHECK(counter.count_below(lam) == expected);
  }
  CHECK(counter.count_below(all[0] * 0.5) == 0);
  CHECK(counter.count_below(all.back() * 2.0) == op.n());
}

TEST_CASE("counting DOS is nondecreasing and deterministic") {
  ModelParams p;
  p.d = 2;
  p.nu = 0.6;
  p.a = 0.25;
  const std::vector<double> grid = {1.0, 2.0, 4.0, 8.0};
  const DosEstimate a = dos_by_counting(p, 2.0, 0.1, grid, 4, 9);
  const DosEstimate b = dos_by_counting(p, 2.0, 0.1, grid, 4, 9);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    CHECK(a.cumulative[j] == b.cumulative[j]);
    if (j) CHECK(a.cumulative[j] >= a.cumulative[j - 1]);
  }
  CHECK_THROWS_AS(dos_by_counting(p, 2.0, 0.1, {}, 4, 9), invalid_parameter);
}

TEST_CASE("short bridges trace out a single ball") {
  Rng rng = Rng::keyed(17, 0);
  const double a = 0.3;
  const BridgeSample s = bridge_sausage_volume(1e-4, a, 2, 512, a / 64.0, rng);
  CHECK(s.sausage_volume == doctest::Approx(M_PI * a * a).epsilon(0.01));
  // endpoints pinned at the origin
  CHECK(s.path[0] == 0.0);
  CHECK(s.path[1] == 0.0);
  CHECK(s.path[2 * 512] == 0.0);
  CHECK(s.path[2 * 512 + 1] == 0.0);
}

TEST_CASE("sausage dominates the single-point ball on the same grid") {
  for (int trial = 0; trial < 12; ++trial) {
    Rng rng = Rng::keyed(23, trial);
    const BridgeSample s = bridge_sausage_volume(0.8, 0.25, 2, 128, 0.25 / 12.0, rng);
    CHECK(s.sausage_volume >= s.ball_volume_grid);
  }
}

TEST_CASE("bridge increments have the pinned covariance profile") {
  // variance of the midpoint of a bridge on [0, t] is t/4 per coordinate
  const double t = 2.0;
  const int steps = 64, n = 4000;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    Rng rng = Rng::keyed(29, i);
    const BridgeSample b = bridge_sausage_volume(t, 0.2, 2, steps, 0.1, rng);
    const double x = b.path[2 * (steps / 2)];
    s2 += x * x;
  }
  CHECK(s2 / n == doctest::Approx(t / 4.0).epsilon(0.08));
}

TEST_CASE("Laplace transform of a tabulated atom") {
  DosEstimate atom;
  atom.lambda = {2.0};
  atom.cumulative = {0.7};
  atom.stderr_ = {0.0};
  CHECK(laplace_of_dos(atom, 1.5) == doctest::Approx(0.7 * std::exp(-3.0)).epsilon(1e-14));
}

TEST_CASE("free-motion Laplace value and zero variance at nu = 0") {
  ModelParams p;
  p.d = 2;
  p.nu = 0.0;
  p.a = 0.3;
  const LaplaceEstimate est = dos_laplace(1.0, p, 50, 3, 64, 0.05);
  CHECK(est.value == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-12));
  CHECK(est.se == doctest::Approx(0.0));
}

TEST_CASE("synthetic Lifshitz self-fit recovers its constant") {
  ModelParams p;
  p.d = 2;
  p.nu = 2.0 / M_PI;
  p.a = 0.3;
  const double C = 5.7831859629467845;
  DosEstimate dos;
  for (double lam = 0.4; lam <= 2.0; lam += 0.1) {
    dos.lambda.push_back(lam);
    dos.cumulative.push_back(std::exp(-C / lam));
    dos.stderr_.push_back(0.0);
  }
  const LifshitzFit fit = lifshitz_fit(dos, p, 0.4, 2.0);
  CHECK(std::fabs(fit.slope - C) <= 1e-6 * C);
  CHECK(std::fabs(fit.intercept) < 1e-9);
  CHECK(fit.theory == doctest::Approx(p.nu * M_PI * std::pow(2.891592981473392, 1.0)).epsilon(1e-12));

  DosEstimate thin;
  thin.lambda = {1.0, 2.0};
  thin.cumulative = {0.1, 0.2};
  thin.stderr_ = {0.0, 0.0};
  CHECK_THROWS_AS(lifshitz_fit(thin, p, 0.5, 3.0), insufficient_data);
}
