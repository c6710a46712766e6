// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#include "acpinn/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "acpinn/errors.hpp"

namespace acpinn {

using std::numbers::pi;

void PotentialSpec::validate() const {
  if (kind == PotentialKind::logarithmic)
    require(theta > 0.0 && theta <= theta_c, "logarithmic potential needs 0 < theta <= theta_c");
}

PotentialValue potential_eval(const PotentialSpec& p, double u) {
  if (p.kind == PotentialKind::polynomial) {
    const double w = 1.0 - u * u;
    return {0.25 * w * w, u * u * u - u};
  }
  if (!(std::abs(u) < 1.0)) throw DomainError("logarithmic potential evaluated at |u| >= 1");
  const double a = std::log1p(u), b = std::log1p(-u);
  return {0.5 * p.theta * ((1.0 + u) * a + (1.0 - u) * b) - 0.5 * p.theta_c * u * u,
          0.5 * p.theta * (a - b) - p.theta_c * u};
}

double potential_df(const PotentialSpec& p, double u) {
  if (p.kind == PotentialKind::polynomial) return 3.0 * u * u - 1.0;
  if (!(std::abs(u) < 1.0)) throw DomainError("logarithmic potential evaluated at |u| >= 1");
  return p.theta / ((1.0 - u) * (1.0 + u)) - p.theta_c;
}

double clamp_for_potential(const PotentialSpec& p, double u, bool* clamped) {
  if (p.kind == PotentialKind::logarithmic && std::abs(u) > kLogClamp) {
    if (clamped) *clamped = true;
    return std::copysign(kLogClamp, u);
  }
  return u;
}

double pure_state_bound(const PotentialSpec& p) {
  if (p.kind == PotentialKind::polynomial) return 1.0;
  p.validate();
  if (p.theta >= p.theta_c) return 0.0;
  // f < 0 just right of 0 (f'(0) = theta - theta_c < 0) and f -> +inf at 1.
  double lo = 0.0, hi = 1.0 - 1e-15;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (potential_eval(p, mid).f < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double mobility_eval(const MobilitySpec& m, double u) {
  if (m.kind == MobilityKind::constant) return m.mu0;
  return std::max(0.0, m.mu0 * (1.0 - u * u));
}

double mobility_deriv(const MobilitySpec& m, double u) {
  if (m.kind == MobilityKind::constant || 1.0 - u * u <= 0.0) return 0.0;
  return -2.0 * m.mu0 * u;
}

std::vector<double> AdvectionSpec::beta(std::span<const double> x) const {
  const std::size_t d = x.size();
  std::vector<double> b(d, 0.0);
  if (!present) return b;
  require(matrix.size() == d * d && offset.size() == d, "AdvectionSpec: dimension mismatch");
  for (std::size_t i = 0; i < d; ++i) {
    double s = offset[i];
    for (std::size_t j = 0; j < d; ++j) s += matrix[i * d + j] * x[j];
    b[i] = s;
  }
  return b;
}

RandomFieldSpec random_field_build(double L, double gamma, std::uint64_t seed) {
  require(L > 0.0 && gamma > 0.0, "random_field_build: L and gamma must be positive");
  RandomFieldSpec rf;
  rf.L = L;
  rf.gamma = gamma;
  rf.seed = seed;
  rf.m = static_cast<int>(std::floor(L / gamma));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int k = -rf.m; k <= rf.m; ++k) {
    const int mk = static_cast<int>(std::floor(std::sqrt(static_cast<double>(rf.m * rf.m - k * k))));
    for (int j = -mk; j <= mk; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      rf.terms.push_back({j, k, {re, im}});
    }
  }
  return rf;
}

double random_field_eval(const RandomFieldSpec& rf, double x, double y) {
  const double w = 2.0 * pi / rf.L;
  double s = 0.0;
  for (const auto& t : rf.terms) {
    const double phase = w * (t.j * x + t.k * y);
    s += t.c.real() * std::cos(phase) - t.c.imag() * std::sin(phase);
  }
  return s / std::sqrt(static_cast<double>(rf.terms.size()));
}

double InitialCondition::eval(std::span<const double> x) const {
  switch (kind) {
    case InitialKind::cosine_1d:
      return x[0] * x[0] * std::cos(pi * x[0]);
    case InitialKind::tanh_sphere: {
      double r2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - center[i]) * (x[i] - center[i]);
      return std::tanh((radius - std::sqrt(r2)) / (2.0 * epsilon));
    }
    case InitialKind::circles: {
      double u = -1.0;
      for (const auto& c : circles) {
        const double s = std::hypot(x[0] - c[0], x[1] - c[1]) - c[2];
        if (s < 0.0) u += 2.0 * std::exp(-epsilon * epsilon / (s * s));
      }
      return u;
    }
    case InitialKind::diamond: {
      const double v = std::abs(x[0] + x[1] - 1.0) + std::abs(x[0] - x[1]) - 0.1;
      return -std::tanh(v / (std::sqrt(2.0) * epsilon));
    }
    case InitialKind::random_field:
      return amplitude * (2.0 * random_field_eval(field, x[0], x[1]) - 1.0);
  }
  return 0.0;
}

void ProblemSpec::validate() const {
  require(dim() >= 1 && dim() <= 3, "ProblemSpec: spatial dimension must be 1, 2 or 3");
  for (int a = 0; a < dim(); ++a) require(domain.extent(a) > 0.0, "ProblemSpec: empty domain");
  require(epsilon > 0.0, "ProblemSpec: epsilon must be > 0");
  require(horizon > 0.0, "ProblemSpec: horizon must be > 0");
  require(mobility.mu0 >= 0.0, "ProblemSpec: mu0 must be >= 0");
  potential.validate();
  if (advection.present)
    require(advection.matrix.size() == static_cast<std::size_t>(dim() * dim()) &&
                advection.offset.size() == static_cast<std::size_t>(dim()),
            "ProblemSpec: advection field dimension mismatch");
}

ResidualLinearization residual_linearized(const ProblemSpec& prob, std::span<const double> x,
                                          double u, std::span<const double> grad, double lap,
                                          double ut, std::optional<double> u_lag, bool clamp_log) {
  require(u_lag.has_value() == prob.mobility.lagged,
          "pde_residual: lagged value must be supplied exactly when mobility is lagged");
  ResidualLinearization out;
  const double e2 = prob.epsilon * prob.epsilon;
  double uc = u;
  if (clamp_log) uc = clamp_for_potential(prob.potential, u, &out.clamped);
  const PotentialValue pv = potential_eval(prob.potential, uc);
  const double dfdu = out.clamped ? 0.0 : potential_df(prob.potential, uc);
  const double chem = e2 * lap - pv.f;
  const double mu = mobility_eval(prob.mobility, u_lag ? *u_lag : u);
  const double dmu = u_lag ? 0.0 : mobility_deriv(prob.mobility, u);

  out.r = ut - mu * chem;
  out.dr_dut = 1.0;
  out.dr_dlap = -mu * e2;
  out.dr_du = -dmu * chem + mu * dfdu;
  if (prob.advection.present) {
    const std::vector<double> b = prob.advection.beta(x);
    for (std::size_t i = 0; i < b.size(); ++i) {
      out.r += b[i] * grad[i];
      out.dr_dgrad[i] = b[i];
    }
  }
  return out;
}

double pde_residual(const Jet& jet, const ProblemSpec& prob, std::span<const double> x,
                    std::optional<double> u_lag) {
  require(static_cast<int>(jet.du_dx.size()) == prob.dim() &&
              static_cast<int>(jet.d2u_dx2.size()) == prob.dim() &&
              static_cast<int>(x.size()) == prob.dim(),
          "pde_residual: dimension mismatch");
  double lap = 0.0;
  for (double v : jet.d2u_dx2) lap += v;
  return residual_linearized(prob, x, jet.u, jet.du_dx, lap, jet.du_dt, u_lag, false).r;
}

std::vector<double> boundary_residual(const Network& net, std::span<const double> params,
                                      const ProblemSpec& prob, const BoundarySample& s) {
  const int d = prob.dim();
  require(static_cast<int>(s.point.size()) == d + 1, "boundary_residual: point dimension mismatch");
  require(s.axis >= 0 && s.axis < d, "boundary_residual: axis out of range");
  const double tol = 1e-12 * std::max(1.0, std::abs(prob.domain.hi[s.axis]));
  const ChannelSet cs = ChannelSet::gradient(d);
  if (prob.bc == BoundaryKind::neumann) {
    const double face = s.side ? prob.domain.hi[s.axis] : prob.domain.lo[s.axis];
    require(std::abs(s.point[s.axis] - face) <= tol, "boundary_residual: point not on the boundary");
    PointSet ps(d + 1);
    ps.push_back(s.point);
    JetBatch b = net.forward(params, cs, ps);
    const double sign = s.side ? 1.0 : -1.0;
    return {sign * b.channel(cs.first_index(s.axis))[0]};
  }
  require(std::abs(s.point[s.axis] - prob.domain.lo[s.axis]) <= tol,
          "boundary_residual: periodic sample must sit on the low face");
  PointSet ps(d + 1);
  ps.push_back(s.point);
  std::vector<double> q = s.point;
  q[s.axis] = prob.domain.hi[s.axis];
  ps.push_back(q);
  JetBatch b = net.forward(params, cs, ps);
  std::vector<double> r;
  r.push_back(b.channel(0)[0] - b.channel(0)[1]);
  for (int i = 0; i < d; ++i) {
    const auto c = b.channel(cs.first_index(i));
    r.push_back(c[0] - c[1]);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Registry

namespace {

Box cube(int d, double lo, double hi) {
  return Box{std::vector<double>(d, lo), std::vector<double>(d, hi)};
}

std::vector<double> even_times(double t_end, int pieces) {
  std::vector<double> t;
  for (int i = 0; i <= pieces; ++i) t.push_back(t_end * i / pieces);
  return t;
}

BenchmarkDefaults ac1d_poly() {
  BenchmarkDefaults b;
  ProblemSpec& p = b.problem;
  p.key = "ac1d-poly";
  p.domain = cube(1, -1.0, 1.0);
  // u_t - 1e-4 u_xx + 5 (u^3 - u) = 0 written as mu (eps^2 u_xx - f)
  p.mobility = {MobilityKind::constant, 5.0, false};
  p.epsilon = std::sqrt(2e-5);
  p.bc = BoundaryKind::periodic;
  p.ic.kind = InitialKind::cosine_1d;
  b.depth = 4;
  b.width = 100;
  b.n_r = 500, b.n_b = 42, b.n_i = 128;
  b.lambda_r = 1, b.lambda_b = 1, b.lambda_i = 100, b.lambda_e = 542;
  b.tau = 0.1, b.tol_s = 5e-2;
  b.dt = 0.1, b.n_max = 20;
  b.n_adam = 5000, b.n_lbfgs = 5000;
  b.transfer_weights = false;
  p.horizon = 1.0;
  b.snapshot_times = even_times(1.0, 4);
  b.description = "1D, quartic potential, periodic, u0 = x^2 cos(pi x)";
  return b;
}

BenchmarkDefaults ac2d_poly() {
  BenchmarkDefaults b;
  ProblemSpec& p = b.problem;
  p.key = "ac2d-poly";
  p.domain = cube(2, 0.0, 1.0);
  p.epsilon = 0.025;
  p.mobility = {MobilityKind::constant, 10.0, false};
  p.bc = BoundaryKind::neumann;
  p.ic = {InitialKind::tanh_sphere, p.epsilon, 0.35, {0.5, 0.5}, {}, {}, 0.05};
  b.depth = 6;
  b.width = 128;
  b.n_r = 5000, b.n_b = 200, b.n_i = 2601;
  b.lambda_r = 1, b.lambda_b = 1, b.lambda_i = 1000, b.lambda_e = 5200;
  b.tau = 0.05, b.tol_s = 1e-2;
  b.dt = 0.25, b.n_max = 40;
  b.n_adam = 5000, b.n_lbfgs = 2000;
  p.horizon = b.dt * b.n_max;
  b.snapshot_times = even_times(p.horizon, 4);
  b.description = "2D, quartic potential, Neumann, shrinking circle";
  return b;
}

BenchmarkDefaults ac3d_poly() {
  BenchmarkDefaults b;
  ProblemSpec& p = b.problem;
  p.key = "ac3d-poly";
  p.domain = cube(3, 0.0, 1.0);
  p.epsilon = 0.05;
  p.mobility = {MobilityKind::constant, 10.0, false};
  p.bc = BoundaryKind::neumann;
  p.ic = {InitialKind::tanh_sphere, p.epsilon, 0.35, {0.5, 0.5, 0.5}, {}, {}, 0.05};
  b.depth = 6;
  b.width = 128;
  b.n_r = 5000, b.n_b = 300, b.n_i = 9261;
  b.lambda_r = 1, b.lambda_b = 1, b.lambda_i = 1000, b.lambda_e = 5300;
  b.tau = 0.05, b.tol_s = 1e-2;
  b.dt = 0.1, b.n_max = 13;
  b.n_adam = 5000, b.n_lbfgs = 2000;
  p.horizon = b.dt * b.n_max;
  b.snapshot_times = even_times(p.horizon, 4);
  b.description = "3D, quartic potential, Neumann, shrinking sphere";
  return b;
}

BenchmarkDefaults ac2d_log() {
  BenchmarkDefaults b;
  ProblemSpec& p = b.problem;
  p.key = "ac2d-log";
  p.domain = cube(2, 0.0, 2.0 * pi);
  p.epsilon = 0.1;
  p.potential = {PotentialKind::logarithmic, 0.25, 1.0};
  p.mobility = {MobilityKind::constant, 1.0, false};
  p.bc = BoundaryKind::periodic;
  p.ic.kind = InitialKind::circles;
  p.ic.epsilon = p.epsilon;
  p.ic.circles = {{pi / 2, pi / 2, pi / 5},          {pi / 4, 3 * pi / 4, 2 * pi / 15},
                  {pi / 2, 5 * pi / 4, 2 * pi / 15}, {pi, pi / 4, pi / 10},
                  {3 * pi / 2, pi / 4, pi / 10},     {pi, pi, pi / 4},
                  {3 * pi / 2, 3 * pi / 2, pi / 4}};
  b.depth = 6;
  b.width = 128;
  b.n_r = 10000, b.n_b = 200, b.n_i = 40401;
  b.lambda_r = 1, b.lambda_b = 1, b.lambda_i = 1000, b.lambda_e = 10200;
  b.tau = 0.05, b.tol_s = 0.1;
  b.dt = 0.125, b.n_max = 40;
  b.n_adam = 5000, b.n_lbfgs = 2000;
  p.horizon = b.dt * b.n_max;
  b.snapshot_times = even_times(p.horizon, 4);
  b.description = "2D, logarithmic potential, periodic, seven circles";
  return b;
}

BenchmarkDefaults ac2d_log_random(std::uint64_t ic_seed) {
  BenchmarkDefaults b;
  ProblemSpec& p = b.problem;
  p.key = "ac2d-log-random";
  p.domain = cube(2, 0.0, 2.0 * pi);
  p.epsilon = 0.04;
  p.potential = {PotentialKind::logarithmic, 0.15, 0.30};
  p.mobility = {MobilityKind::constant, 2.0, false};
  p.bc = BoundaryKind::periodic;
  p.ic.kind = InitialKind::random_field;
  p.ic.field = random_field_build(2.0 * pi, 1.0, ic_seed);
  p.ic.amplitude = 0.05;
  b.depth = 6;
  b.width = 128;
  b.n_r = 5000, b.n_b = 200, b.n_i = 40000;
  b.lambda_r = 1, b.lambda_b = 1, b.lambda_i = 1000, b.lambda_e = 5200;
  b.tau = 0.05, b.tol_s = 0.1;
  b.dt = 1.0, b.n_max = 20;
  b.n_adam = 5000, b.n_lbfgs = 2000;
  p.horizon = b.dt * b.n_max;
  b.snapshot_times = even_times(p.horizon, 4);
  b.description = "2D, logarithmic potential, periodic, random initial field (gamma = 1)";
  return b;
}

BenchmarkDefaults ac2d_log_degenerate(std::uint64_t ic_seed) {
  BenchmarkDefaults b;
  ProblemSpec& p = b.problem;
  p.key = "ac2d-log-degenerate";
  p.domain = cube(2, 0.0, 2.0 * pi);
  p.epsilon = 0.04;
  p.potential = {PotentialKind::logarithmic, 0.5, 0.95};
  p.mobility = {MobilityKind::degenerate, 2.0, true};
  p.bc = BoundaryKind::periodic;
  p.ic.kind = InitialKind::random_field;
  p.ic.field = random_field_build(2.0 * pi, 0.4, ic_seed);
  p.ic.amplitude = 0.05;
  b.depth = 6;
  b.width = 128;
  b.n_r = 7500, b.n_b = 200, b.n_i = 40000;
  b.lambda_r = 1, b.lambda_b = 1, b.lambda_i = 1e5, b.lambda_e = 7700;
  b.tau = 0.05, b.tol_s = 0.1;
  b.dt = 1.0, b.n_max = 10;
  b.n_adam = 3000, b.n_lbfgs = 20000;
  p.horizon = b.dt * b.n_max;
  b.snapshot_times = even_times(p.horizon, 4);
  b.description = "2D, logarithmic potential, degenerate lagged mobility, random initial field (gamma = 0.4)";
  return b;
}

BenchmarkDefaults ac2d_advection() {
  BenchmarkDefaults b;
  ProblemSpec& p = b.problem;
  p.key = "ac2d-advection";
  p.domain = cube(2, 0.0, 1.0);
  p.epsilon = 0.01;
  p.mobility = {MobilityKind::constant, 100.0, false};
  p.advection.present = true;
  p.advection.matrix = {0.0, 0.0, -100.0, 0.0};
  p.advection.offset = {0.0, 50.0};
  p.bc = BoundaryKind::neumann;
  p.ic.kind = InitialKind::diamond;
  p.ic.epsilon = p.epsilon;
  b.depth = 6;
  b.width = 128;
  b.n_r = 10000, b.n_b = 200, b.n_i = 10201;
  b.lambda_r = 1, b.lambda_b = 1, b.lambda_i = 1e5, b.lambda_e = 10200;
  b.tau = 0.05, b.tol_s = 0.1;
  b.dt = 0.005, b.n_max = 12;
  b.n_adam = 5000, b.n_lbfgs = 2000;
  p.horizon = 0.06;
  b.snapshot_times = even_times(p.horizon, 4);
  b.description = "2D, quartic potential with advection beta = (0, -100 (x1 - 0.5)), Neumann, diamond";
  return b;
}

}  // namespace

const std::vector<std::string>& registry_keys() {
  static const std::vector<std::string> keys{"ac1d-poly",       "ac2d-poly",           "ac3d-poly",
                                             "ac2d-log",        "ac2d-log-random",     "ac2d-log-degenerate",
                                             "ac2d-advection"};
  return keys;
}

BenchmarkDefaults registry_lookup(const std::string& key, std::uint64_t ic_seed) {
  if (key == "ac1d-poly") return ac1d_poly();
  if (key == "ac2d-poly") return ac2d_poly();
  if (key == "ac3d-poly") return ac3d_poly();
  if (key == "ac2d-log") return ac2d_log();
  if (key == "ac2d-log-random") return ac2d_log_random(ic_seed);
  if (key == "ac2d-log-degenerate") return ac2d_log_degenerate(ic_seed);
  if (key == "ac2d-advection") return ac2d_advection();
  throw ConfigError("unknown problem key '" + key + "'");
}

}  // namespace acpinn
