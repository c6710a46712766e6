// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

// Command line front end: run, list, compare, reference build.

#include <CLI11.hpp>
#include <malloc.h>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "acpinn/config.hpp"
#include "acpinn/errors.hpp"
#include "acpinn/experiment.hpp"
#include "acpinn/kernels.hpp"
#include "acpinn/reference.hpp"

namespace fs = std::filesystem;
using namespace acpinn;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw NotFoundError("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cmd_run(const std::string& key, const std::string& config_file, std::uint64_t seed, bool seed_set, bool desk,
            const std::vector<std::string>& sets, std::string out, bool resume) {
  ExperimentConfig cfg = config_file.empty() ? default_config(key) : parse_config(slurp(config_file));
  if (!key.empty() && cfg.problem_key != key) throw ConfigError("config file is for '" + cfg.problem_key + "', not '" + key + "'");
  if (desk) apply_desk_scale(cfg);
  if (seed_set) cfg.seed = seed;
  for (const std::string& s : sets) apply_override(cfg, s);
  cfg.validate();
  if (out.empty()) out = (fs::path(cfg.output_dir) / (cfg.problem_key + "-seed" + std::to_string(cfg.seed))).string();
  const std::string_view isa = kernels::isa_name(kernels::active().isa);
  std::fprintf(stderr, "run %s (seed %llu, %d segments, isa %.*s) -> %s\n", cfg.problem_key.c_str(),
               static_cast<unsigned long long>(cfg.seed), cfg.segment_count(), static_cast<int>(isa.size()), isa.data(), out.c_str());
  RunOptions opt;
  opt.quiet = false;
  opt.resume = resume;
  const RunArtifacts a = run_experiment(cfg, out, opt);
  for (const auto& [name, v] : a.summary.metrics()) std::printf("%s = %.6g\n", name.c_str(), v);
  return 0;
}

int cmd_list() {
  for (const std::string& key : registry_keys()) {
    const BenchmarkDefaults b = registry_lookup(key);
    std::printf("%-20s %s\n", key.c_str(), b.description.c_str());
    std::printf("%-20s depth %d width %d, n_r %d n_b %d n_i %d, lambda_i %g lambda_e %g, dt %g N_max %d, "
                "adam %d lbfgs %d\n",
                "", b.depth, b.width, b.n_r, b.n_b, b.n_i, b.lambda_i, b.lambda_e, b.dt, b.n_max, b.n_adam,
                b.n_lbfgs);
  }
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b) {
  std::printf("%-24s %14s %14s %14s\n", "metric", "a", "b", "b - a");
  for (const MetricDelta& d : compare_runs(a, b))
    std::printf("%-24s %14.6g %14.6g %+14.6g\n", d.metric.c_str(), d.a, d.b, d.delta);
  return 0;
}

int cmd_reference(const std::string& key, std::string out, int n, double dt) {
  if (key != "ac1d-poly") throw ConfigError("reference build: only ac1d-poly has a spectral reference");
  if (out.empty()) out = default_golden_path();
  fs::create_directories(fs::path(out).parent_path());
  const ProblemSpec prob = registry_lookup(key).problem;
  const ReferenceSolution sol = build_default_reference(prob, n, dt);
  write_golden(out, sol, key);
  const EnergySeries e = discrete_energy_series(sol, prob);
  std::printf("wrote %s (%zu snapshots, N = %d, dt = %g, energy violations %zu)\n", out.c_str(), sol.times.size(),
              sol.n, sol.dt, e.violations.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // Training reallocates the same large buffers every epoch; keep them in
  // the heap instead of paying an mmap/munmap round trip each time.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  CLI::App app{"Adaptive time-marching PINN solver for Allen-Cahn benchmarks"};
  app.require_subcommand(1);

  std::string key, config_file, out;
  std::uint64_t seed = 1;
  bool desk = false, resume = false;
  std::vector<std::string> sets;
  CLI::App* run = app.add_subcommand("run", "Train one benchmark and write a run directory");
  run->add_option("key", key, "Registry key")->required();
  run->add_option("--config", config_file, "INI file (defaults to the registry values)");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "Run seed");
  run->add_flag("--desk-scale", desk, "Reduced budgets used by the acceptance runs");
  run->add_option("--set", sets, "Override, e.g. --set budget.n_adam=100")->allow_extra_args(false);
  run->add_option("--out", out, "Run directory");
  run->add_flag("--resume", resume, "Continue from existing segment checkpoints");

  CLI::App* list = app.add_subcommand("list", "List registered benchmarks");

  std::string run_a, run_b;
  CLI::App* compare = app.add_subcommand("compare", "Metric deltas between two run directories");
  compare->add_option("a", run_a)->required();
  compare->add_option("b", run_b)->required();

  std::string ref_key, ref_out;
  int ref_n = 512;
  double ref_dt = 1e-4;
  CLI::App* reference = app.add_subcommand("reference", "Reference solutions");
  CLI::App* build = reference->add_subcommand("build", "Solve and store the golden reference");
  build->add_option("key", ref_key)->required();
  build->add_option("--out", ref_out, "Output CSV path");
  build->add_option("--n", ref_n, "Fourier modes");
  build->add_option("--dt", ref_dt, "Time step");
  reference->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(key, config_file, seed, seed_opt->count() > 0, desk, sets, out, resume);
    if (*list) return cmd_list();
    if (*compare) return cmd_compare(run_a, run_b);
    if (*build) return cmd_reference(ref_key, ref_out, ref_n, ref_dt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
