#pragma once

#include <stdexcept>
#include <string>

namespace kl {

struct invalid_parameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct empty_domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct convergence_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct schedule_infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Interval construction asked for outside the regime where disjointness holds.
struct regime_violation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct insufficient_data : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct divergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Truncated spectrum cannot absorb the requested particle density.
struct saturation_error : std::runtime_error {
  saturation_error(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_density(achieved) {}
  double achieved_density;
};

}  // namespace kl
