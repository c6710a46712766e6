// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acpinn/loss.hpp"
#include "acpinn/problems.hpp"

namespace acpinn {

struct FeatureToggles {
  bool energy_penalty = true;
  bool adaptive_sampling = true;
  bool adaptive_time = true;
  bool transfer_weights = true;
};

/// Everything one run needs. INI layout:
///
///   [problem]  key
///   [network]  depth width
///   [samples]  n_r n_b n_i n_e
///   [weights]  lambda_r lambda_b lambda_i lambda_e
///   [sampler]  tau tol_s
///   [time]     dt n_max horizon
///   [budget]   n_adam n_lbfgs adam_lr
///   [features] energy_penalty adaptive_sampling adaptive_time transfer_weights
///   [energy]   quadrature_nodes
///   [run]      seed ic_seed output_dir snapshot_times
struct ExperimentConfig {
  std::string problem_key;
  int depth = 4;
  int width = 64;
  int n_r = 1, n_b = 1, n_i = 1, n_e = 1;
  LossWeights weights;
  double tau = 0.1;
  double tol_s = 0.05;
  double dt = 0.1;
  int n_max = 1;
  double horizon = 1.0;
  long n_adam = 0;
  long n_lbfgs = 0;
  double adam_lr = 1e-3;
  FeatureToggles features;
  int quadrature_nodes = 0;  // 0: default for the dimension
  std::uint64_t seed = 1;
  std::uint64_t ic_seed = 2024;
  std::string output_dir = "runs";
  std::vector<double> snapshot_times;

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  /// Number of marching segments: min(n_max, ceil(horizon / dt)), or 1
  /// when adaptive_time is off.
  int segment_count() const;
  /// End of the last segment.
  double end_time() const;
};

/// Published defaults for a registry key.
ExperimentConfig default_config(const std::string& key);

/// Reduced budgets used by the acceptance runs.
void apply_desk_scale(ExperimentConfig& cfg);

ExperimentConfig parse_config(const std::string& text);
std::string serialize_config(const ExperimentConfig& cfg);

/// Applies "section.key=value" (or a bare unique key) to cfg. Throws
/// ConfigError for unknown keys or unparsable values.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// The problem the config refers to, with its random field rebuilt from
/// ic_seed.
ProblemSpec resolve_problem(const ExperimentConfig& cfg);

}  // namespace acpinn
