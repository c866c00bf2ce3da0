#include <doctest.h>

#include <cmath>
#include <sstream>

#include "kacl/errors.hpp"
#include "kacl/model.hpp"

using namespace kl;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("first Bessel zeros against tabulated values") {
  CHECK(bessel_j_first_zero(0.0) == doctest::Approx(2.404825557695773).epsilon(1e-12));
  CHECK(bessel_j_first_zero(1.0) == doctest::Approx(3.831705970207512).epsilon(1e-12));
  CHECK(bessel_j_first_zero(0.5) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(bessel_j_first_zero(1.5) == doctest::Approx(4.493409457909064).epsilon(1e-12));
  CHECK(bessel_j_first_zero(4.0) == doctest::Approx(7.588342434503804).epsilon(1e-11));
}

TEST_CASE("derived constants in low dimensions") {
  const Constants c2 = constants(2, 2.0 / kPi);
  CHECK(c2.omega_d == doctest::Approx(kPi).epsilon(1e-14));
  // principal eigenvalue of -1/2 Laplacian in the unit disk: j_{0,1}^2 / 2
  CHECK(c2.lambda_d == doctest::Approx(2.891592981473392).epsilon(1e-12));
  CHECK(c2.R0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c2.c0 == doctest::Approx(c2.lambda_d).epsilon(1e-13));
  CHECK(c2.c1 == doctest::Approx(std::exp(1.0) / std::sqrt(4.0 * kPi)).epsilon(1e-13));

  const Constants c3 = constants(3, 1.0);
  CHECK(c3.omega_d == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-14));
  // j_{1/2,1} = pi, so lambda_3 = pi^2 / 2
  CHECK(c3.lambda_d == doctest::Approx(kPi * kPi / 2.0).epsilon(1e-12));
  CHECK(c3.R0 == doctest::Approx(std::pow(3.0 / (4.0 * kPi / 3.0), 1.0 / 3.0)).epsilon(1e-13));
}

TEST_CASE("parameter validation") {
  ModelParams p;
  p.d = 1;
  CHECK_THROWS_AS(p.validate(), invalid_parameter);
  p.d = 2;
  p.nu = 0.0;
  CHECK_THROWS_AS(p.validate(), invalid_parameter);
  p.nu = 1.0;
  p.a = -0.1;
  CHECK_THROWS_AS(p.validate(), invalid_parameter);
}

TEST_CASE("cloud sampling: intensity, support, determinism") {
  ModelParams p;
  p.d = 2;
  p.nu = 1.5;
  p.a = 0.3;
  const Box region = Box::centered(2, 2.0);  // volume 16
  Rng rng = Rng::keyed(11, 0);
  double total = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    Rng r = rng.split(i);
    const Cloud c = sample_cloud(region, p, r);
    total += static_cast<double>(c.size());
    if (i < 50) {
      for (std::size_t j = 0; j < c.size(); ++j) {
        CHECK(region.contains(c.point(j)));
      }
    }
  }
  const double mean = total / n;
  CHECK(std::fabs(mean - p.nu * region.volume()) < 0.15);  // ~4 SE

  Rng r1 = Rng::keyed(11, 77), r2 = Rng::keyed(11, 77);
  const Cloud a = sample_cloud(region, p, r1);
  const Cloud b = sample_cloud(region, p, r2);
  REQUIRE(a.size() == b.size());
  CHECK(a.pts == b.pts);
}

TEST_CASE("vacancy uses closed balls and is monotone in the radius") {
  Cloud c;
  c.d = 2;
  c.pts = {1.0, 0.0};
  c.region = Box::centered(2, 2.0);
  const double x_on[] = {0.5, 0.0};
  CHECK(!is_vacant(x_on, c, 0.5));  // boundary point belongs to the ball
  CHECK(is_vacant(x_on, c, 0.499999));
  const double y[] = {-0.3, 0.4};
  for (double a = 0.05; a < 2.0; a += 0.05) {
    if (!is_vacant(y, c, a)) {
      // once covered, stays covered for all larger radii
      for (double b = a; b < 2.0; b += 0.1) CHECK(!is_vacant(y, c, b));
      break;
    }
  }
}

TEST_CASE("cloud CSV round trip") {
  ModelParams p;
  p.d = 3;
  p.nu = 0.8;
  p.a = 0.2;
  Rng rng = Rng::keyed(5, 0);
  const Box region = Box::centered(3, 1.5);
  const Cloud c = sample_cloud(region, p, rng);
  std::stringstream ss;
  write_cloud_csv(ss, c);
  const Cloud back = read_cloud_csv(ss, region);
  REQUIRE(back.size() == c.size());
  CHECK(back.pts == c.pts);  // %.17g is lossless for doubles
}

TEST_CASE("box helpers") {
  const Box b = Box::centered(2, 3.0);
  CHECK(b.volume() == doctest::Approx(36.0));
  const Box s = b.scaled(1.5);
  CHECK(s.lo[0] == doctest::Approx(-4.5));
  const Box i = b.inflated(0.25);
  CHECK(i.side(1) == doctest::Approx(6.5));
}
