// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acpinn/geometry.hpp"
#include "acpinn/network.hpp"

namespace acpinn {

// ---------------------------------------------------------------------------
// Potentials

enum class PotentialKind { polynomial, logarithmic };

struct PotentialSpec {
  PotentialKind kind = PotentialKind::polynomial;
  double theta = 0.0;    // logarithmic only
  double theta_c = 0.0;  // logarithmic only

  void validate() const;
};

struct PotentialValue {
  double F = 0.0;
  double f = 0.0;
};

/// F(u) and f = F'(u). Throws DomainError for |u| >= 1 with the
/// logarithmic potential.
PotentialValue potential_eval(const PotentialSpec& p, double u);

/// f'(u), same domain rules as potential_eval.
double potential_df(const PotentialSpec& p, double u);

/// Largest |u| fed to the logarithmic potential during training.
inline constexpr double kLogClamp = 1.0 - 1e-7;

/// Clamps u into [-kLogClamp, kLogClamp] for the logarithmic potential and
/// reports whether it had to; polynomial inputs pass through unchanged.
double clamp_for_potential(const PotentialSpec& p, double u, bool* clamped);

/// Positive root s of f(s) = 0: 1 for the polynomial potential, bisection
/// for the logarithmic one (0 when theta == theta_c).
double pure_state_bound(const PotentialSpec& p);

// ---------------------------------------------------------------------------
// Mobility and advection

enum class MobilityKind { constant, degenerate };

struct MobilitySpec {
  MobilityKind kind = MobilityKind::constant;
  double mu0 = 1.0;
  bool lagged = false;
};

double mobility_eval(const MobilitySpec& m, double u);
double mobility_deriv(const MobilitySpec& m, double u);

/// Affine velocity field beta(x) = B x + c.
struct AdvectionSpec {
  bool present = false;
  std::vector<double> matrix;  // d x d, row-major
  std::vector<double> offset;  // d

  std::vector<double> beta(std::span<const double> x) const;
};

// ---------------------------------------------------------------------------
// Initial conditions

/// Truncated complex Fourier series with Gaussian coefficients on a square
/// period cell of side L. Evaluation returns the real part divided by
/// sqrt(number of terms).
struct RandomFieldSpec {
  double L = 0.0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  int m = 0;
  struct Term {
    int j = 0;
    int k = 0;
    std::complex<double> c;
  };
  std::vector<Term> terms;
};

RandomFieldSpec random_field_build(double L, double gamma, std::uint64_t seed);
double random_field_eval(const RandomFieldSpec& rf, double x, double y);

enum class InitialKind { cosine_1d, tanh_sphere, circles, diamond, random_field };

struct InitialCondition {
  InitialKind kind = InitialKind::cosine_1d;
  double epsilon = 0.0;
  double radius = 0.0;         // tanh_sphere
  std::vector<double> center;  // tanh_sphere
  std::vector<std::array<double, 3>> circles;  // (a, b, r)
  RandomFieldSpec field;       // random_field
  double amplitude = 0.05;     // random_field: u0 = amplitude * (2 field - 1)

  double eval(std::span<const double> x) const;
};

// ---------------------------------------------------------------------------
// Problem

enum class BoundaryKind { periodic, neumann };

struct ProblemSpec {
  std::string key;
  Box domain;
  double epsilon = 0.0;
  PotentialSpec potential;
  MobilitySpec mobility;
  AdvectionSpec advection;
  BoundaryKind bc = BoundaryKind::periodic;
  InitialCondition ic;
  double horizon = 1.0;

  int dim() const { return domain.dim(); }
  void validate() const;
};

/// Residual value and its partial derivatives with respect to the jet
/// entries it depends on.
struct ResidualLinearization {
  double r = 0.0;
  double dr_du = 0.0;
  double dr_dut = 0.0;
  double dr_dlap = 0.0;  // same for every diagonal second derivative
  std::array<double, 3> dr_dgrad{};
  bool clamped = false;
};

/// R = u_t - mu(u or u_lag) (eps^2 lap u - f(u)) + beta(x) . grad u.
/// With clamp_log the logarithmic potential sees u clamped to kLogClamp
/// instead of raising DomainError.
ResidualLinearization residual_linearized(const ProblemSpec& prob, std::span<const double> x,
                                          double u, std::span<const double> grad, double lap,
                                          double ut, std::optional<double> u_lag, bool clamp_log);

/// Residual at one point given its jet and spatial location.
double pde_residual(const Jet& jet, const ProblemSpec& prob, std::span<const double> x,
                    std::optional<double> u_lag = std::nullopt);

/// One boundary training sample. For Neumann it is a point on face
/// (axis, side); for periodic it is the pair (x with x[axis] = lo,
/// x with x[axis] = hi) and side is ignored. `point` is space-time.
struct BoundarySample {
  std::vector<double> point;
  int axis = 0;
  int side = 0;
};

/// Periodic: [u(a) - u(b), d_i u(a) - d_i u(b) for each spatial i];
/// Neumann: [grad u . n]. Throws ContractViolation when the sample is off
/// the boundary.
std::vector<double> boundary_residual(const Network& net, std::span<const double> params,
                                      const ProblemSpec& prob, const BoundarySample& s);

// ---------------------------------------------------------------------------
// Registry

/// Defaults of one benchmark as published.
struct BenchmarkDefaults {
  ProblemSpec problem;
  int depth = 0;
  int width = 0;
  int n_r = 0, n_b = 0, n_i = 0;
  double lambda_r = 1, lambda_b = 1, lambda_i = 1, lambda_e = 0;
  double tau = 0.1, tol_s = 0.05;
  double dt = 0.1;
  int n_max = 1;
  int n_adam = 0, n_lbfgs = 0;
  bool transfer_weights = true;
  std::vector<double> snapshot_times;
  std::string description;
};

const std::vector<std::string>& registry_keys();

/// Throws ConfigError for unknown keys. ic_seed drives the random field
/// of the random-initial benchmarks.
BenchmarkDefaults registry_lookup(const std::string& key, std::uint64_t ic_seed = 2024);

}  // namespace acpinn
