// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "acpinn/config.hpp"
#include "acpinn/orchestrator.hpp"
#include "acpinn/reference.hpp"

namespace acpinn {

/// Flat metrics written to summary.json.
struct RunSummary {
  std::string problem;
  std::uint64_t seed = 0;
  int segments = 0;
  std::optional<double> relative_l2;  // ac1d-poly only
  double u_min = 0.0;
  double u_max = 0.0;
  double energy_start = 0.0;
  double energy_end = 0.0;
  double energy_max_increase = 0.0;  // largest E(t_{k+1}) - E(t_k)
  bool energy_monotone = true;       // within 1e-3 |E(t_0)|
  long log_clamp_count = 0;
  long adaptive_events = 0;
  long adaptive_points_added = 0;
  double final_loss = 0.0;
  double wall_time_s = 0.0;

  /// Every numeric field by name (wall time included).
  std::vector<std::pair<std::string, double>> metrics() const;
};

struct RunOptions {
  /// Golden reference used for relative_l2; empty selects the shipped
  /// one for ac1d-poly.
  std::string golden_path;
  bool resume = false;
  int stop_after = 0;
  bool quiet = true;
};

/// Directory holding the shipped data files (ACPINN_DATA_DIR overrides).
std::string data_dir();
std::string default_golden_path();

struct RunArtifacts {
  RunSummary summary;
  MarchResult march;
  std::string run_dir;
};

/// Trains, evaluates and writes config.ini, segment_XXX.ckpt, loss.csv,
/// adapt.csv, adapt_points.csv, energy.csv, snapshots.csv and
/// summary.json into run_dir.
RunArtifacts run_experiment(const ExperimentConfig& cfg, const std::string& run_dir,
                            const RunOptions& opt = {});

/// Spatial evaluation grid used for snapshots and bound checks.
PointSet evaluation_grid(const ProblemSpec& prob);

/// relative_l2 of a march against a reference over every reference
/// (t, x) with t inside the covered interval.
double relative_l2_against(const MarchResult& march, const ReferenceSolution& ref);

void write_summary(const std::string& path, const RunSummary& s);
RunSummary read_summary(const std::string& path);

struct MetricDelta {
  std::string metric;
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;  // b - a
};

/// Per-metric differences between two run directories. Throws
/// NotFoundError when either summary is missing.
std::vector<MetricDelta> compare_runs(const std::string& run_a, const std::string& run_b);

}  // namespace acpinn
