// Command-line front end: each subcommand runs one experiment kind from a
// flat key=value config file, with flag > environment > file precedence.

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "kacl/config.hpp"
#include "kacl/errors.hpp"
#include "kacl/experiments.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir = ".";
  int jobs = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config_path,
                              "key=value configuration file");
  if (config_required) opt->required();
  cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "master seed (overrides config and env)")
      ->each([&f](const std::string&) { f.seed_set = true; });
}

int run_kind(const std::string& kind, const CommonFlags& f) {
  try {
    kl::Config cfg = f.config_path.empty()
                         ? kl::Config::parse_text("", kl::config_keys())
                         : kl::Config::parse_file(f.config_path, kl::config_keys());
    cfg.apply_env(kl::config_keys());
    cfg.set("kind", kind);
    kl::RunOptions opts;
    opts.out_dir = f.out_dir;
    opts.jobs = f.jobs;
    opts.seed_override = f.seed_set;
    opts.seed = f.seed;
    const int code = kl::run_experiment(cfg, opts);
    if (code != 0) {
      std::fprintf(stderr, "kacl %s failed; see %s/manifest.json\n",
                   kind.c_str(), f.out_dir.c_str());
    }
    return code;
  } catch (const kl::invalid_parameter& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral laboratory for random obstacle models"};
  app.require_subcommand(1);

  const char* kinds[] = {"constants", "sample",   "spectrum", "gap-sweep",
                         "quantile",  "deconc",   "dos",      "bec"};
  const char* blurbs[] = {
      "model constants for the given dimension and intensity",
      "draw one obstacle cloud and write it out",
      "lowest eigenpairs of one realization",
      "spectral gap statistics over many realizations",
      "order-statistic estimate of the small-box eigenvalue quantile",
      "deconcentration ratio experiment",
      "integrated density of states",
      "finite-size condensation sweep"};

  CommonFlags flags[8];
  for (int i = 0; i < 8; ++i) {
    CLI::App* cmd = app.add_subcommand(kinds[i], blurbs[i]);
    const bool config_required =
        std::string(kinds[i]) != "constants";
    add_common(cmd, flags[i], config_required);
  }

  CLI11_PARSE(app, argc, argv);

  for (int i = 0; i < 8; ++i) {
    if (app.get_subcommand(kinds[i])->parsed()) {
      return run_kind(kinds[i], flags[i]);
    }
  }
  return 1;
}
