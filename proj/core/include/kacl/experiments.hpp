#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "kacl/config.hpp"

namespace kl {

// Static task assignment: index i runs on worker i % jobs, results land in
// caller-owned slots indexed by i, so output is identical for any job count.
void parallel_for(std::int64_t n, int jobs,
                  const std::function<void(std::int64_t)>& fn);

// The complete legal key set for experiment configuration files.
const std::vector<std::string>& config_keys();

struct RunOptions {
  std::string out_dir = ".";
  int jobs = 1;
  bool seed_override = false;
  std::uint64_t seed = 0;
};

// Exit codes: 0 success; 1 invalid configuration or usage; 2 parameters
// outside the supported regime (infeasible schedule, saturation, too little
// data); 3 numerical failure. A manifest.json is written in out_dir in every
// case, recording config hash, version, seed, wall time, and any error.
int run_experiment(const Config& cfg, const RunOptions& opts);

}  // namespace kl
