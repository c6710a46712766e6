// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "acpinn/problems.hpp"

namespace acpinn {

/// Snapshots of a 1D field on a uniform grid. For periodic data the grid
/// covers [lo, lo + length) and omits the right endpoint.
struct ReferenceSolution {
  int n = 0;
  double dt = 0.0;
  std::string integrator;
  bool periodic = true;
  double lo = 0.0;
  double length = 0.0;
  std::vector<double> x;
  std::vector<double> times;
  std::vector<std::vector<double>> u;  // one row per snapshot

  /// Trigonometric interpolation of snapshot s at x (periodic data only).
  double interpolate(std::size_t s, double x) const;
};

struct SpectralOptions {
  int n = 512;
  double dt = 1e-4;
  bool nonlinear = true;
  /// Overrides the problem's initial condition when set.
  std::function<double(double)> initial;
};

/// Fourier collocation in space, ETDRK4 in time (diffusion exact, contour
/// integral coefficients). Snapshot times must be multiples of dt.
/// Throws TrainingFault naming the step when the state stops being finite.
ReferenceSolution solve_spectral_1d(const ProblemSpec& prob, const SpectralOptions& opt,
                                    std::span<const double> snapshot_times);

/// ||ref - pred||_2 / ||ref||_2.
double relative_l2(std::span<const double> ref, std::span<const double> pred);

struct EnergySeries {
  std::vector<double> t;
  std::vector<double> energy;
  std::vector<std::size_t> violations;  // k with E[k+1] > E[k] + slack
};

/// Discrete free energy of every snapshot: spectral gradient and equal
/// weights for periodic data, second-order differences and the trapezoid
/// rule otherwise.
EnergySeries discrete_energy_series(const ReferenceSolution& sol, const ProblemSpec& prob,
                                    double slack = 1e-10);

/// Writes `<path>` as CSV (t,x,u) and `<path>.meta.json` with the solver
/// parameters and the SHA-256 of the CSV bytes.
void write_golden(const std::string& path, const ReferenceSolution& sol, const std::string& problem_key);

/// Reads a golden file, verifying its sidecar hash. Throws FormatError on
/// a missing file, a malformed row or a hash mismatch.
ReferenceSolution read_golden(const std::string& path);

std::string sha256_hex(const std::string& bytes);

/// Default golden reference for the 1D benchmark: snapshots every 0.01 on
/// [0, 1].
ReferenceSolution build_default_reference(const ProblemSpec& prob, int n = 512, double dt = 1e-4);

}  // namespace acpinn
