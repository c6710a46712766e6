// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace acpinn {

/// Returns f(x); writes the gradient into g when g is non-empty.
using Objective = std::function<double(std::span<const double> x, std::span<double> g)>;

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// Bias-corrected Adam update in place. A non-finite gradient leaves
/// params and state untouched and throws TrainingFault.
void adam_step(AdamState& s, std::span<double> params, std::span<const double> grad);

struct LbfgsOptions {
  int memory = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_trials = 25;
  int stagnation_limit = 3;
};

struct LbfgsState {
  LbfgsOptions opt;
  std::deque<std::vector<double>> s;
  std::deque<std::vector<double>> y;
  std::deque<double> rho;
  int consecutive_failures = 0;
  bool have_eval = false;  // f and g below belong to the current params
  double f = 0.0;
  std::vector<double> g;

  /// Drops curvature pairs and the cached evaluation (used when the
  /// objective changes).
  void reset();
  bool stagnated() const { return consecutive_failures >= opt.stagnation_limit; }
};

enum class LbfgsOutcome { wolfe, fallback, failed, converged };

struct LbfgsStepResult {
  LbfgsOutcome outcome = LbfgsOutcome::failed;
  double f = 0.0;
  double step = 0.0;
  int evaluations = 0;
};

/// Two-loop direction (steepest descent on an empty history) and a strong
/// Wolfe line search. When the search runs out of trials the best
/// decreasing trial is accepted; without one the step fails, params stay
/// put and the history is cleared. On return the most recent objective
/// call was made at the returned params.
LbfgsStepResult lbfgs_step(LbfgsState& s, std::span<double> params, const Objective& f);

/// Called after every epoch with the loss evaluated during it. Returning
/// true signals that the objective changed (e.g. new collocation points).
using EpochCallback = std::function<bool(long epoch, double loss, std::span<const double> params)>;

struct HybridResult {
  std::vector<double> history;  // one loss per epoch
  long adam_epochs = 0;
  long lbfgs_steps = 0;
  bool stagnated = false;
};

/// n_adam Adam epochs followed by up to n_lbfgs L-BFGS steps. Faults are
/// rethrown with the epoch index attached.
HybridResult train_hybrid(std::span<double> params, long n_adam, long n_lbfgs, const Objective& f,
                          const EpochCallback& on_epoch = {}, AdamState adam = {},
                          LbfgsOptions lbfgs = {});

}  // namespace acpinn
