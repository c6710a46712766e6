// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "acpinn/config.hpp"
#include "acpinn/loss.hpp"
#include "acpinn/network.hpp"
#include "acpinn/problems.hpp"
#include "acpinn/sampling.hpp"

namespace acpinn {

enum class WarmStart { fresh, transfer };

/// Trained network of one time segment [t0, t1].
struct SegmentModel {
  int index = 0;  // 1-based
  double t0 = 0.0;
  double t1 = 0.0;
  NetworkSpec spec;
  std::vector<double> params;

  std::vector<double> predict(const PointSet& space_time) const;
  /// Value at spatial points at time t.
  std::vector<double> predict_at(const PointSet& space, double t) const;
};

/// Seed for one (segment, purpose) pair, derived from the run seed.
std::uint64_t derive_seed(std::uint64_t seed, int segment, int purpose);

struct LossRow {
  int segment = 0;
  long epoch = 0;
  LossReport report;
};

struct AdaptRecord {
  int segment = 0;
  long epoch = 0;
  AdaptEvent event;
};

struct MarchResult {
  std::vector<SegmentModel> segments;
  std::vector<LossRow> losses;
  std::vector<AdaptRecord> adapt;
  std::vector<double> energy_times;  // t_0, t_1, ..., t_J
  std::vector<double> energy;        // predicted energy at those times
  long log_clamp_count = 0;
  int resumed_segments = 0;

  /// The segment whose interval contains t (the earlier one at a shared
  /// endpoint). Throws ContractViolation outside the covered interval.
  const SegmentModel& segment_for(double t) const;
  /// Evaluates each space-time point with the segment that owns its time.
  std::vector<double> predict(const PointSet& space_time) const;
};

struct MarchOptions {
  /// Directory for segment_XXX.ckpt files; empty disables checkpointing.
  std::string checkpoint_dir;
  /// Load consecutive existing checkpoints and continue after them.
  bool resume = false;
  /// Stop after this many segments (0: all). Used to simulate interruptions.
  int stop_after = 0;
  /// Called after each segment finishes.
  std::function<void(const SegmentModel&)> on_segment;
};

/// Lag values for segment j: the previous model at time t_{j-1}, or the
/// given initial condition when there is no previous model.
LagProvider lagged_mobility_provider(const ProblemSpec& prob, const SegmentModel* previous);

/// Fresh collocation set for segment j on [t0, t1]. Initial targets come
/// from `previous` at t0, or from the initial condition when it is null.
CollocationSet build_collocation(const ProblemSpec& prob, const ExperimentConfig& cfg, int j, double t0,
                                 double t1, const SegmentModel* previous, bool energy_times);

/// Time marching over cfg.segment_count() segments. Throws TrainingFault
/// (with segment and epoch) when training breaks; checkpoints of finished
/// segments remain on disk.
MarchResult march_segments(const ProblemSpec& prob, const ExperimentConfig& cfg,
                           const MarchOptions& opt = {});

/// Segment checkpoint: "ACSEG1", index, t0, t1 and the network blob.
void write_segment(std::ostream& os, const SegmentModel& m);
SegmentModel read_segment(std::istream& is);
std::string segment_filename(int index);

}  // namespace acpinn
