#include "kacl/model.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "kacl/errors.hpp"

namespace kl {

double Box::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= side(i);
  return v;
}

bool Box::contains(std::span<const double> x) const {
  for (int i = 0; i < dim(); ++i)
    if (x[i] <= lo[i] || x[i] >= hi[i]) return false;
  return true;
}

Box Box::centered(int d, double half) {
  Box b;
  b.lo.assign(d, -half);
  b.hi.assign(d, half);
  return b;
}

Box Box::scaled(double factor) const {
  Box b = *this;
  for (int i = 0; i < dim(); ++i) {
    b.lo[i] *= factor;
    b.hi[i] *= factor;
  }
  return b;
}

Box Box::inflated(double pad) const {
  Box b = *this;
  for (int i = 0; i < dim(); ++i) {
    b.lo[i] -= pad;
    b.hi[i] += pad;
  }
  return b;
}

void ModelParams::validate() const {
  if (d < 2) throw invalid_parameter("dimension must satisfy d >= 2");
  if (!(nu > 0.0)) throw invalid_parameter("intensity nu must be > 0");
  if (!(a > 0.0)) throw invalid_parameter("obstacle radius a must be > 0");
}

namespace {

// J_order(x) by the ascending series; adequate for the small arguments used
// when bracketing first zeros.
double bessel_j_series(double order, double x) {
  const double half_x = 0.5 * x;
  double term = std::pow(half_x, order) / std::tgamma(order + 1.0);
  double sum = term;
  for (int m = 1; m < 200; ++m) {
    term *= -half_x * half_x / (m * (m + order));
    sum += term;
    if (std::fabs(term) < 1e-18 * std::fabs(sum) + 1e-300) break;
  }
  return sum;
}

}  // namespace

double bessel_j_first_zero(double order) {
  // Scan outward from order+1 for a sign change, then bisect.
  double x0 = order + 1.0;
  double f0 = bessel_j_series(order, x0);
  double x1 = x0;
  double f1 = f0;
  for (int i = 0; i < 400; ++i) {
    x1 = x0 + 0.1;
    f1 = bessel_j_series(order, x1);
    if (f0 * f1 <= 0.0) break;
    x0 = x1;
    f0 = f1;
  }
  if (f0 * f1 > 0.0) throw convergence_failure("bessel zero bracketing failed");
  while (x1 - x0 > 1e-12) {
    const double xm = 0.5 * (x0 + x1);
    const double fm = bessel_j_series(order, xm);
    if (f0 * fm <= 0.0) {
      x1 = xm;
      f1 = fm;
    } else {
      x0 = xm;
      f0 = fm;
    }
  }
  return 0.5 * (x0 + x1);
}

Constants constants(int d, double nu) {
  if (d < 2) throw invalid_parameter("constants: d must be >= 2");
  if (!(nu > 0.0)) throw invalid_parameter("constants: nu must be > 0");
  Constants c;
  c.omega_d = std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
  const double j = bessel_j_first_zero(0.5 * d - 1.0);
  c.lambda_d = 0.5 * j * j;
  c.R0 = std::pow(d / (nu * c.omega_d), 1.0 / d);
  c.c0 = c.lambda_d / (c.R0 * c.R0);
  c.c1 = std::pow(4.0 * M_PI, -0.25 * d) * std::exp(1.0);
  return c;
}

Cloud sample_cloud(const Box& region, const ModelParams& params, Rng& rng) {
  params.validate();
  if (region.dim() != params.d)
    throw invalid_parameter("sample_cloud: region dimension mismatch");
  Cloud c;
  c.d = params.d;
  c.region = region;
  const std::uint64_t n = rng.poisson(params.nu * region.volume());
  c.pts.resize(n * params.d);
  for (std::uint64_t i = 0; i < n; ++i)
    for (int k = 0; k < params.d; ++k)
      c.pts[i * params.d + k] = rng.uniform(region.lo[k], region.hi[k]);
  return c;
}

Cloud sample_cloud(const Box& region, const ModelParams& params) {
  Rng rng = Rng::keyed(params.seed, 0);
  return sample_cloud(region, params, rng);
}

bool is_vacant(std::span<const double> x, const Cloud& cloud, double a) {
  const double a2 = a * a;
  const int d = cloud.d;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double dx = x[k] - cloud.pts[i * d + k];
      r2 += dx * dx;
    }
    if (r2 <= a2) return false;  // closed-ball convention
  }
  return true;
}

void write_cloud_csv(std::ostream& os, const Cloud& cloud) {
  for (int k = 0; k < cloud.d; ++k) os << (k ? ",x" : "x") << (k + 1);
  os << "\n";
  char buf[64];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int k = 0; k < cloud.d; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", cloud.pts[i * cloud.d + k]);
      os << (k ? "," : "") << buf;
    }
    os << "\n";
  }
}

void write_cloud_sidecar_json(std::ostream& os, const Cloud& cloud,
                              const ModelParams& params) {
  char buf[64];
  os << "{\"d\":" << params.d;
  std::snprintf(buf, sizeof buf, "%.17g", params.nu);
  os << ",\"nu\":" << buf;
  std::snprintf(buf, sizeof buf, "%.17g", params.a);
  os << ",\"a\":" << buf;
  os << ",\"seed\":" << params.seed << ",\"region\":{\"lo\":[";
  for (int k = 0; k < cloud.d; ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", cloud.region.lo[k]);
    os << (k ? "," : "") << buf;
  }
  os << "],\"hi\":[";
  for (int k = 0; k < cloud.d; ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", cloud.region.hi[k]);
    os << (k ? "," : "") << buf;
  }
  os << "]}}\n";
}

Cloud read_cloud_csv(std::istream& is, const Box& region) {
  Cloud c;
  c.d = region.dim();
  c.region = region;
  std::string line;
  if (!std::getline(is, line)) return c;  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) c.pts.push_back(std::stod(cell));
  }
  if (c.pts.size() % c.d != 0)
    throw invalid_parameter("cloud CSV: ragged row");
  return c;
}

}  // namespace kl
