// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "acpinn/geometry.hpp"
#include "acpinn/network.hpp"
#include "acpinn/problems.hpp"

namespace acpinn {

/// Boundary samples in space-time. For Neumann, sample k lies on face
/// (axis[k], side[k]); for periodic, it lies on the low face of axis[k]
/// and is paired with its image on the high face.
struct BoundaryBatch {
  PointSet points;
  std::vector<int> axis;
  std::vector<int> side;

  std::size_t size() const { return axis.size(); }
  void append(const BoundaryBatch& other);
};

/// Previous-segment prediction at the spatial part of each point, used by
/// lagged mobility.
using LagProvider = std::function<std::vector<double>(const PointSet&)>;

struct CollocationSet {
  double t0 = 0.0;
  double t1 = 0.0;
  PointSet interior;                  // space-time, t in (t0, t1]
  std::vector<double> interior_lag;   // empty unless mobility is lagged
  BoundaryBatch boundary;
  PointSet initial;                   // space-time with t = t0
  std::vector<double> initial_targets;
  std::vector<double> energy_times;
};

/// One point per stratum along every axis; jitter uniform inside the
/// stratum. Throws ContractViolation for n < 1 or a zero-extent axis.
PointSet latin_hypercube(std::size_t n, const Box& box, std::uint64_t seed);

/// n boundary samples over the segment [t0, t1]. Faces (Neumann) or
/// periodic axes are assigned round-robin by sample index.
BoundaryBatch sample_boundary(std::size_t n, const ProblemSpec& prob, double t0, double t1,
                              std::uint64_t seed);

/// n spatial LHS points stamped with time t.
PointSet sample_initial(std::size_t n, const Box& domain, double t, std::uint64_t seed);

std::vector<double> sample_times(std::size_t n, double t0, double t1, std::uint64_t seed);

struct DorflerResult {
  std::vector<std::size_t> marked;  // indices into the estimator list
  bool all_zero = false;
};

/// Smallest subset carrying at least tau of the total estimator mass,
/// found by a stable descending sort and the shortest qualifying prefix.
DorflerResult dorfler_mark(std::span<const double> eta, double tau);

/// True iff at least four totals are recorded, epochs > n_ex and the
/// largest of the last three successive differences is >= tol_s.
bool adapt_trigger(std::span<const double> history, double tol_s, long epochs, long n_ex = 1000);

struct AdaptState {
  double tau = 0.1;
  double tol_s = 0.05;
  long n_ex = 1000;
  double growth = 0.20;
  long cadence = 100;
};

struct AdaptEvent {
  std::size_t candidates = 0;
  std::size_t marked = 0;
  std::size_t new_total = 0;
  bool all_zero = false;
  PointSet marked_interior;
  BoundaryBatch marked_boundary;
};

/// Draws ceil(growth * (interior + boundary)) fresh candidates split in
/// proportion to the current counts, marks them with the squared PDE
/// residual and squared boundary residual norm, and appends the marked
/// points to `set`.
AdaptEvent adaptive_resample(const AdaptState& state, CollocationSet& set, const Network& net,
                             std::span<const double> params, const ProblemSpec& prob,
                             const LagProvider& lag, std::uint64_t seed);

}  // namespace acpinn
