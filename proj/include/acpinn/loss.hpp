// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "acpinn/network.hpp"
#include "acpinn/problems.hpp"
#include "acpinn/sampling.hpp"

namespace acpinn {

struct LossWeights {
  double lambda_r = 1.0;
  double lambda_i = 1.0;
  double lambda_b = 1.0;
  double lambda_e = 0.0;

  void validate() const;
};

struct LossReport {
  double loss_r = 0.0;
  double loss_i = 0.0;
  double loss_b = 0.0;
  double loss_e = 0.0;
  double total = 0.0;
};

double total_loss(const LossReport& components, const LossWeights& w);

/// Tensor-product grid over the spatial domain. Neumann problems use the
/// trapezoid rule on n nodes per axis (endpoints included); periodic ones
/// use n equally spaced nodes with equal weights.
struct EnergyQuadrature {
  PointSet nodes;
  std::vector<double> weights;
};

EnergyQuadrature make_quadrature(const Box& domain, BoundaryKind bc, int nodes_per_axis);

/// 256 (1D), 64 (2D) or 24 (3D) nodes per axis.
int default_quadrature_nodes(int dim);

/// Shared options for the training-time loss components. When `grad` is
/// non-empty each component adds scale * d(component)/d(params) to it.
struct GradSink {
  std::span<double> grad;
  double scale = 1.0;
};

/// Counts logarithmic-potential inputs that had to be clamped.
struct ClampCounter {
  long count = 0;
};

/// Per-point PDE residuals. `lag` is required exactly when the mobility is
/// lagged. With a counter the logarithmic potential is clamped instead of
/// raising DomainError.
std::vector<double> pointwise_residuals(const Network& net, std::span<const double> params,
                                        const ProblemSpec& prob, const PointSet& interior,
                                        std::span<const double> lag, ClampCounter* clamps = nullptr);

/// Squared boundary residual norm per sample.
std::vector<double> pointwise_boundary_sq(const Network& net, std::span<const double> params,
                                          const ProblemSpec& prob, const BoundaryBatch& batch);

double mse_residual(const Network& net, std::span<const double> params, const ProblemSpec& prob,
                    const PointSet& interior, std::span<const double> lag, GradSink sink = {},
                    ClampCounter* clamps = nullptr);

double mse_initial(const Network& net, std::span<const double> params, const PointSet& initial,
                   std::span<const double> targets, GradSink sink = {});

double mse_boundary(const Network& net, std::span<const double> params, const ProblemSpec& prob,
                    const BoundaryBatch& batch, GradSink sink = {});

/// Quadrature of eps^2/2 |grad u|^2 + F(u) (+ |beta|^2 / 2 with advection)
/// at time t.
double energy_at_time(const Network& net, std::span<const double> params, const ProblemSpec& prob,
                      const EnergyQuadrature& quad, double t, ClampCounter* clamps = nullptr);

/// Exact dE/dt at each time: sum_w (eps^2 grad u . grad u_t + f(u) u_t).
std::vector<double> energy_rates(const Network& net, std::span<const double> params,
                                 const ProblemSpec& prob, const EnergyQuadrature& quad,
                                 std::span<const double> times, ClampCounter* clamps = nullptr);

/// (1/n_e) sum_k max(0, dE/dt(t_k))^2.
double energy_penalty(const Network& net, std::span<const double> params, const ProblemSpec& prob,
                      const EnergyQuadrature& quad, std::span<const double> times,
                      GradSink sink = {}, ClampCounter* clamps = nullptr);

/// Composite training objective on one collocation set.
class TrainingObjective {
 public:
  /// The quadrature is only built when lambda_e > 0.
  TrainingObjective(const Network& net, const ProblemSpec& prob, const CollocationSet& set,
                    LossWeights weights, int quadrature_nodes);

  /// Weighted total; fills grad (overwritten) when non-empty and the
  /// per-component report when given.
  double operator()(std::span<const double> params, std::span<double> grad,
                    LossReport* report = nullptr) const;

  bool has_quadrature() const { return quad_.has_value(); }
  const EnergyQuadrature* quadrature() const { return quad_ ? &*quad_ : nullptr; }
  long clamp_count() const { return clamps_.count; }

 private:
  const Network& net_;
  const ProblemSpec& prob_;
  const CollocationSet& set_;
  LossWeights w_;
  std::optional<EnergyQuadrature> quad_;
  mutable ClampCounter clamps_;
};

}  // namespace acpinn
