#include "kacl/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include <json.hpp>

#include "kacl/bec.hpp"
#include "kacl/deconcentration.hpp"
#include "kacl/dos.hpp"
#include "kacl/eigensolver.hpp"
#include "kacl/errors.hpp"
#include "kacl/grid.hpp"
#include "kacl/model.hpp"
#include "kacl/spectral_stats.hpp"

namespace kl {

using nlohmann::json;

void parallel_for(std::int64_t n, int jobs,
                  const std::function<void(std::int64_t)>& fn) {
  if (jobs < 1) throw invalid_parameter("parallel_for: jobs must be >= 1");
  if (jobs == 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mu;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::int64_t i = t; i < n; i += jobs) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "kind",        "d",          "nu",           "a",
      "seed",        "ell",        "h",            "k",
      "n_seeds",     "sigma",      "sigma_list",   "Gamma",
      "eta_hat",     "n_quantile", "bootstrap",    "sigma0",
      "m",           "c_bar",      "c_star",       "t",
      "n_realizations", "lambda_min", "lambda_max", "lambda_step",
      "t_laplace",   "mc_budget",  "bridge_steps", "resolution",
      "estimator",   "fit_lo",     "fit_hi",       "beta",
      "rho",         "N_list",     "seeds_per_N",  "k_exact",
      "grid_step",   "tail_tolerance"};
  return keys;
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ModelParams params_from(const Config& cfg, std::uint64_t seed) {
  ModelParams p;
  p.d = static_cast<int>(cfg.get_int_or("d", 2));
  p.nu = cfg.get_double_or("nu", 1.0);
  p.a = cfg.get_double_or("a", 0.3);
  p.seed = seed;
  p.validate();
  return p;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

void emit_plot(const std::filesystem::path& dir, const std::string& kind) {
  std::string gp = "set datafile separator ','\nset key off\n";
  if (kind == "gap-sweep") {
    gp += "set logscale y\nset xlabel 'seed'\nset ylabel 'gap'\n"
          "plot 'gap_0.csv' using 1:4 skip 1 with points\n";
  } else if (kind == "dos") {
    gp += "set logscale y\nset xlabel 'lambda'\nset ylabel 'M(lambda)'\n"
          "plot 'dos.csv' using 1:2 skip 1 with linespoints\n";
  } else if (kind == "bec") {
    gp += "set xlabel 'N'\nset ylabel 'ground fraction'\n"
          "plot 'bec.csv' using 1:7 skip 1 with points\n";
  } else if (kind == "deconc") {
    gp += "set xlabel 'lambda1'\n"
          "plot 'deconc_seeds.csv' using 2 skip 1 with points\n";
  } else if (kind == "quantile") {
    gp += "set xlabel 'sample'\nset ylabel 'lambda1'\n"
          "plot 'quantile_samples.csv' using 1 skip 1 with points\n";
  } else {
    return;
  }
  write_text(dir / "plot.gp", gp);
}

struct PairSample {
  bool empty = true;
  double l1 = std::numeric_limits<double>::infinity();
  double l2 = std::numeric_limits<double>::infinity();
};

PairSample lowest_two(const ModelParams& params, const Box& box, double h,
                      std::uint64_t master_seed, std::int64_t stream) {
  Rng rng = Rng::keyed(master_seed, stream);
  const Cloud cloud = sample_cloud(box.inflated(params.a), params, rng);
  const GridDomain dom = build_mask(box, cloud, params.a, h);
  PairSample out;
  if (dom.n_active == 0) return out;
  SolveOptions opts;
  opts.seed = rng.split(0x2EED).next_u64();
  const Spectrum spec =
      smallest_eigenpairs(assemble_half_laplacian(dom), 2, opts);
  out.empty = false;
  out.l1 = spec.lambda(0);
  out.l2 = spec.lambda(1);
  return out;
}

void run_constants(const Config& cfg, const RunOptions& opts,
                   std::uint64_t seed, json& report) {
  const ModelParams p = params_from(cfg, seed);
  const Constants c = constants(p.d, p.nu);
  json j = {{"d", p.d},           {"nu", p.nu},
            {"omega_d", c.omega_d}, {"lambda_d", c.lambda_d},
            {"R0", c.R0},         {"c0", c.c0},
            {"c1", c.c1}};
  write_text(std::filesystem::path(opts.out_dir) / "constants.json",
             j.dump(2) + "\n");
  report["constants"] = j;
}

void run_sample(const Config& cfg, const RunOptions& opts, std::uint64_t seed,
                json& report) {
  const ModelParams p = params_from(cfg, seed);
  const double ell = cfg.get_double("ell");
  const Box box = Box::centered(p.d, ell);
  Rng rng = Rng::keyed(seed, 0);
  const Cloud cloud = sample_cloud(box.inflated(p.a), p, rng);
  {
    std::ofstream os(std::filesystem::path(opts.out_dir) / "cloud.csv");
    write_cloud_csv(os, cloud);
  }
  {
    std::ofstream os(std::filesystem::path(opts.out_dir) / "cloud.json");
    write_cloud_sidecar_json(os, cloud, p);
  }
  report["points"] = cloud.size();
}

void run_spectrum(const Config& cfg, const RunOptions& opts,
                  std::uint64_t seed, json& report) {
  const ModelParams p = params_from(cfg, seed);
  const double ell = cfg.get_double("ell");
  const double h = cfg.get_double_or("h", default_spacing(p, ell));
  const int k = static_cast<int>(cfg.get_int_or("k", 2));
  const Box box = Box::centered(p.d, ell);
  Rng rng = Rng::keyed(seed, 0);
  const Cloud cloud = sample_cloud(box.inflated(p.a), p, rng);
  const GridDomain dom = build_mask(box, cloud, p.a, h);
  Spectrum spec;
  if (dom.n_active == 0) {
    spec = infinite_spectrum(h, p.d);
  } else {
    SolveOptions sopts;
    sopts.seed = rng.split(0x2EED).next_u64();
    spec = smallest_eigenpairs(assemble_half_laplacian(dom), k, sopts);
  }
  {
    std::ofstream os(std::filesystem::path(opts.out_dir) / "spectrum.csv");
    write_spectrum_csv(os, spec);
  }
  {
    std::ofstream os(std::filesystem::path(opts.out_dir) / "mask.rle",
                     std::ios::binary);
    write_grid_rle(os, dom);
  }
  report["n_active"] = dom.n_active;
  report["empty_domain"] = spec.empty_domain;
  if (!spec.empty_domain) report["lambda1"] = spec.lambda(0);
}

void run_gap_sweep(const Config& cfg, const RunOptions& opts,
                   std::uint64_t seed, json& report) {
  const ModelParams p = params_from(cfg, seed);
  const double ell = cfg.get_double("ell");
  const double h = cfg.get_double_or("h", default_spacing(p, ell));
  const int n_seeds = static_cast<int>(cfg.get_int_or("n_seeds", 100));
  std::vector<double> sigmas =
      cfg.get_list_or("sigma_list", {cfg.get_double_or("sigma", 1.0)});
  if (n_seeds < 1 || sigmas.empty()) {
    throw invalid_parameter("gap-sweep: need n_seeds >= 1 and a sigma list");
  }
  const Box box = Box::centered(p.d, ell);

  std::vector<PairSample> samples(n_seeds);
  parallel_for(n_seeds, opts.jobs,
               [&](std::int64_t i) { samples[i] = lowest_two(p, box, h, seed, i); });

  const double gap_scale = std::pow(std::log(ell), -(1.0 + 2.0 / p.d));
  json freq = json::array();
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    std::ofstream os(std::filesystem::path(opts.out_dir) /
                     ("gap_" + std::to_string(si) + ".csv"));
    write_gap_csv_header(os);
    std::int64_t hits = 0;
    for (int i = 0; i < n_seeds; ++i) {
      GapRecord rec;
      rec.ell = ell;
      rec.sigma = sigmas[si];
      rec.lambda1 = samples[i].l1;
      rec.lambda2 = samples[i].l2;
      rec.gap = samples[i].l2 - samples[i].l1;
      if (samples[i].empty) rec.gap = std::numeric_limits<double>::infinity();
      rec.resonance = !samples[i].empty && rec.gap < sigmas[si] * gap_scale;
      hits += rec.resonance;
      write_gap_csv_row(os, static_cast<std::uint64_t>(i), rec);
    }
    freq.push_back({{"sigma", sigmas[si]},
                    {"resonance_frequency",
                     static_cast<double>(hits) / n_seeds}});
  }
  report["resonance"] = freq;
}

void run_quantile(const Config& cfg, const RunOptions& opts,
                  std::uint64_t seed, json& report) {
  const ModelParams p = params_from(cfg, seed);
  const double ell = cfg.get_double("ell");
  const double Gamma = cfg.get_double_or("Gamma", 1.0);
  const double sigma = cfg.get_double_or("sigma", 0.1);
  const QuantileSpec spec =
      make_quantile_spec(p, ell, Gamma, sigma, cfg.get_double_or("eta_hat", 0.0));
  const Box D0 = Box::centered(p.d, spec.L0 / 2.0);
  const double h = cfg.get_double_or("h", default_spacing(p, ell));
  const int n = static_cast<int>(cfg.get_int_or("n_quantile", 200));
  std::vector<double> samples(n);
  parallel_for(n, opts.jobs, [&](std::int64_t i) {
    samples[i] = lowest_two(p, D0, h, seed, i).l1;
  });
  const QuantileEstimate est = quantile_t(
      samples, spec, static_cast<int>(cfg.get_int_or("bootstrap", 1000)), seed);
  {
    std::ofstream os(std::filesystem::path(opts.out_dir) / "quantile.csv");
    write_quantile_csv(os, spec, est);
  }
  {
    std::ofstream os(std::filesystem::path(opts.out_dir) /
                     "quantile_samples.csv");
    os << "lambda1\n";
    for (double v : samples) os << v << "\n";
  }
  report["t_hat"] = est.t_hat;
  report["p"] = est.p;
}

void run_deconc(const Config& cfg, const RunOptions& opts, std::uint64_t seed,
                json& report) {
  DeconcOptions d;
  d.params = params_from(cfg, seed);
  d.ell = cfg.get_double("ell");
  d.h = cfg.get_double_or("h", default_spacing(d.params, d.ell));
  d.Gamma = cfg.get_double_or("Gamma", 1.0);
  d.sigma = cfg.get_double_or("sigma", 0.1);
  d.eta_hat = cfg.get_double_or("eta_hat", 0.0);
  d.t = cfg.get_double_or("t", 0.0);
  d.n_seeds = static_cast<int>(cfg.get_int_or("n_seeds", 200));
  d.n_quantile = static_cast<int>(cfg.get_int_or("n_quantile", 200));
  d.seed = seed;
  d.schedule = make_schedule(cfg.get_double_or("sigma0", 0.01),
                             static_cast<int>(cfg.get_int_or("m", 2)),
                             cfg.get_double_or("c_bar", 1.0),
                             cfg.get_double_or("c_star", 5.0));
  const DeconcResult res = deconcentration_experiment(d);

  std::ofstream os(std::filesystem::path(opts.out_dir) / "deconc_seeds.csv");
  os << "seed,lambda1,loc_pass,in_J";
  for (std::size_t j = 0; j < res.intervals.size(); ++j) os << ",in_J" << j + 1;
  os << ",weight\n";
  for (const DeconcSeedRecord& rec : res.records) {
    os << rec.seed << "," << rec.lambda1 << "," << int(rec.loc_pass) << ","
       << int(rec.in_J);
    for (std::uint8_t f : rec.in_Ji) os << "," << int(f);
    os << "," << rec.weight << "\n";
  }

  json intervals = json::array();
  for (const Interval& J : res.intervals) intervals.push_back({J.lo, J.hi});
  json j = {{"t", res.t},         {"eps_ell", res.eps_ell},
            {"K", res.K},         {"n", res.n},
            {"lhs", res.lhs},     {"lhs_se", res.lhs_se},
            {"rhs", res.rhs},     {"rhs_se", res.rhs_se},
            {"ratios", res.ratios}, {"intervals", intervals}};
  write_text(std::filesystem::path(opts.out_dir) / "deconc.json",
             j.dump(2) + "\n");
  report["deconc"] = j;
}

void run_dos(const Config& cfg, const RunOptions& opts, std::uint64_t seed,
             json& report) {
  const ModelParams p = params_from(cfg, seed);
  const std::string estimator = cfg.get_or("estimator", "counting");
  if (estimator == "laplace") {
    const double t = cfg.get_double_or("t_laplace", 1.0);
    const LaplaceEstimate est = dos_laplace(
        t, p, static_cast<int>(cfg.get_int_or("mc_budget", 200)), seed,
        static_cast<int>(cfg.get_int_or("bridge_steps", 256)),
        cfg.get_double_or("resolution", 0.0));
    json j = {{"t", est.t}, {"value", est.value}, {"se", est.se}, {"n", est.n}};
    write_text(std::filesystem::path(opts.out_dir) / "laplace.json",
               j.dump(2) + "\n");
    report["laplace"] = j;
    return;
  }
  if (estimator != "counting") {
    throw invalid_parameter("dos: estimator must be 'counting' or 'laplace'");
  }
  const double ell = cfg.get_double("ell");
  const double h = cfg.get_double_or("h", default_spacing(p, ell));
  const double lo = cfg.get_double("lambda_min");
  const double hi = cfg.get_double("lambda_max");
  const double step = cfg.get_double("lambda_step");
  if (!(lo > 0.0) || !(hi > lo) || !(step > 0.0)) {
    throw invalid_parameter("dos: need 0 < lambda_min < lambda_max and lambda_step > 0");
  }
  std::vector<double> grid;
  for (double v = lo; v <= hi + 1e-12 * hi; v += step) grid.push_back(v);
  const DosEstimate dos = dos_by_counting(
      p, ell, h, grid, static_cast<int>(cfg.get_int_or("n_realizations", 20)),
      seed);
  {
    std::ofstream os(std::filesystem::path(opts.out_dir) / "dos.csv");
    write_dos_csv(os, dos);
  }
  if (cfg.has("fit_lo") && cfg.has("fit_hi")) {
    const LifshitzFit fit =
        lifshitz_fit(dos, p, cfg.get_double("fit_lo"), cfg.get_double("fit_hi"));
    json j = {{"slope", fit.slope},
              {"intercept", fit.intercept},
              {"theory", fit.theory},
              {"relative_error", fit.relative_error},
              {"n_points", fit.n_points}};
    write_text(std::filesystem::path(opts.out_dir) / "lifshitz.json",
               j.dump(2) + "\n");
    report["lifshitz"] = j;
  }
}

void run_bec(const Config& cfg, const RunOptions& opts, std::uint64_t seed,
             json& report) {
  BecOptions b;
  b.params = params_from(cfg, seed);
  b.beta = cfg.get_double_or("beta", 1.0);
  b.rho = cfg.get_double_or("rho", 1.0);
  b.N_list = cfg.get_list_or("N_list", {100, 1000});
  b.seeds_per_N = static_cast<int>(cfg.get_int_or("seeds_per_N", 4));
  b.k_exact = static_cast<int>(cfg.get_int_or("k_exact", 8));
  b.grid_step = cfg.get_double_or("grid_step", 0.25 / b.beta);
  b.tail_tolerance = cfg.get_double_or("tail_tolerance", 1e-6);
  b.h = cfg.get_double_or("h", 0.1);
  b.seed = seed;
  const BecResult res = condensation_experiment(b);
  {
    std::ofstream os(std::filesystem::path(opts.out_dir) / "bec.csv");
    write_bec_csv(os, res.samples);
  }
  json per_n = json::array();
  for (double N : b.N_list) {
    double acc = 0.0;
    int cnt = 0;
    for (const BecSample& s : res.samples) {
      if (s.N == N) {
        acc += s.frac1;
        ++cnt;
      }
    }
    per_n.push_back({{"N", N}, {"mean_frac1", cnt ? acc / cnt : 0.0}});
  }
  report["bec"] = per_n;
}

}  // namespace

int run_experiment(const Config& cfg, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(opts.out_dir);

  std::string kind;
  std::string error;
  int code = 0;
  std::uint64_t seed = 0;
  json report;
  try {
    kind = cfg.get("kind");
    seed = opts.seed_override ? opts.seed
                              : static_cast<std::uint64_t>(cfg.get_int_or("seed", 0));
    if (kind == "constants") {
      run_constants(cfg, opts, seed, report);
    } else if (kind == "sample") {
      run_sample(cfg, opts, seed, report);
    } else if (kind == "spectrum") {
      run_spectrum(cfg, opts, seed, report);
    } else if (kind == "gap-sweep") {
      run_gap_sweep(cfg, opts, seed, report);
    } else if (kind == "quantile") {
      run_quantile(cfg, opts, seed, report);
    } else if (kind == "deconc") {
      run_deconc(cfg, opts, seed, report);
    } else if (kind == "dos") {
      run_dos(cfg, opts, seed, report);
    } else if (kind == "bec") {
      run_bec(cfg, opts, seed, report);
    } else {
      throw invalid_parameter("unknown experiment kind '" + kind + "'");
    }
    emit_plot(opts.out_dir, kind);
  } catch (const invalid_parameter& e) {
    error = e.what();
    code = 1;
  } catch (const schedule_infeasible& e) {
    error = e.what();
    code = 2;
  } catch (const regime_violation& e) {
    error = e.what();
    code = 2;
  } catch (const insufficient_data& e) {
    error = e.what();
    code = 2;
  } catch (const saturation_error& e) {
    error = e.what();
    code = 2;
  } catch (const divergence_error& e) {
    error = e.what();
    code = 2;
  } catch (const empty_domain_error& e) {
    error = e.what();
    code = 2;
  } catch (const std::exception& e) {
    error = e.what();
    code = 3;
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a(cfg.text())));
  json manifest = {{"kind", kind},
                   {"version", "0.1.0"},
                   {"config_hash", hash},
                   {"seed", seed},
                   {"jobs", opts.jobs},
                   {"wall_time_s", wall},
                   {"status", code == 0 ? "ok" : "error"}};
  if (code != 0) manifest["error"] = error;
  if (!report.is_null()) manifest["report"] = report;
  write_text(std::filesystem::path(opts.out_dir) / "manifest.json",
             manifest.dump(2) + "\n");
  return code;
}

}  // namespace kl
