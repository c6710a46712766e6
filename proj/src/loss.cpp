// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#include "acpinn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "acpinn/errors.hpp"

namespace acpinn {

void LossWeights::validate() const {
  require(lambda_r >= 0 && lambda_i >= 0 && lambda_b >= 0 && lambda_e >= 0,
          "LossWeights: weights must be nonnegative");
}

double total_loss(const LossReport& c, const LossWeights& w) {
  return w.lambda_r * c.loss_r + w.lambda_i * c.loss_i + w.lambda_b * c.loss_b + w.lambda_e * c.loss_e;
}

int default_quadrature_nodes(int dim) {
  switch (dim) {
    case 1: return 256;
    case 2: return 64;
    default: return 24;
  }
}

EnergyQuadrature make_quadrature(const Box& domain, BoundaryKind bc, int n) {
  const int d = domain.dim();
  require(d >= 1 && n >= 2, "make_quadrature: need a spatial box and >= 2 nodes per axis");
  std::vector<std::vector<double>> x(d), w(d);
  for (int a = 0; a < d; ++a) {
    const double len = domain.extent(a);
    require(len > 0.0, "make_quadrature: zero-extent axis");
    if (bc == BoundaryKind::periodic) {
      const double h = len / n;
      for (int i = 0; i < n; ++i) {
        x[a].push_back(domain.lo[a] + i * h);
        w[a].push_back(h);
      }
    } else {
      const double h = len / (n - 1);
      for (int i = 0; i < n; ++i) {
        x[a].push_back(i == n - 1 ? domain.hi[a] : domain.lo[a] + i * h);
        w[a].push_back(i == 0 || i == n - 1 ? 0.5 * h : h);
      }
    }
  }
  EnergyQuadrature q;
  q.nodes = PointSet(d);
  std::vector<int> idx(d, 0);
  std::vector<double> p(d);
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(n);
  for (std::size_t k = 0; k < total; ++k) {
    double wt = 1.0;
    for (int a = 0; a < d; ++a) {
      p[a] = x[a][idx[a]];
      wt *= w[a][idx[a]];
    }
    q.nodes.push_back(p);
    q.weights.push_back(wt);
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return q;
}

namespace {

// Forward pass, loss + adjoint from `fn`, then scaled reverse pass into the
// sink when it has a gradient buffer.
template <class Fn>
double run_term(const Network& net, std::span<const double> params, const ChannelSet& cs,
                const PointSet& points, GradSink sink, Fn&& fn) {
  JetBatch b = net.forward(params, cs, points);
  std::vector<double> adj(b.outputs().size(), 0.0);
  const double v = fn(b, std::span<double>(adj));
  if (!std::isfinite(v)) throw TrainingFault("loss component is not finite");
  if (!sink.grad.empty() && sink.scale != 0.0) {
    for (double& a : adj) a *= sink.scale;
    b.backward(params, adj, sink.grad);
  }
  return v;
}

double clamp_u(const ProblemSpec& prob, double u, ClampCounter* clamps, bool* was) {
  if (!clamps) return u;
  bool c = false;
  const double v = clamp_for_potential(prob.potential, u, &c);
  if (c) ++clamps->count;
  if (was) *was = c;
  return v;
}

PointSet with_time(const PointSet& space, std::span<const double> times) {
  const int d = space.dim;
  PointSet out(d + 1);
  out.coords.reserve(space.size() * times.size() * (d + 1));
  for (double t : times) {
    for (std::size_t n = 0; n < space.size(); ++n) {
      const auto p = space[n];
      out.coords.insert(out.coords.end(), p.begin(), p.end());
      out.coords.push_back(t);
    }
  }
  return out;
}

// Residuals at every point; optionally writes d(mean R^2)/d(outputs).
void residuals_from_batch(const JetBatch& b, const PointSet& pts, const ProblemSpec& prob,
                          std::span<const double> lag, ClampCounter* clamps, std::vector<double>& r,
                          std::span<double> adj) {
  const int d = prob.dim();
  const ChannelSet& cs = b.channels();
  const std::size_t n = b.size();
  r.resize(n);
  const auto u = b.channel(0);
  const auto ut = b.channel(cs.first_index(d));
  std::vector<double> grad(d);
  for (std::size_t k = 0; k < n; ++k) {
    double lap = 0.0;
    for (int i = 0; i < d; ++i) {
      grad[i] = b.channel(cs.first_index(i))[k];
      lap += b.channel(cs.second_index(i, i))[k];
    }
    const auto x = pts[k].first(d);
    const std::optional<double> ul = lag.empty() ? std::nullopt : std::optional<double>(lag[k]);
    ResidualLinearization lin = residual_linearized(prob, x, u[k], grad, lap, ut[k], ul, clamps != nullptr);
    if (lin.clamped) ++clamps->count;
    r[k] = lin.r;
    if (adj.empty()) continue;
    const double g = 2.0 * lin.r / static_cast<double>(n);
    adj[k] += g * lin.dr_du;
    adj[cs.first_index(d) * n + k] += g * lin.dr_dut;
    for (int i = 0; i < d; ++i) {
      adj[cs.first_index(i) * n + k] += g * lin.dr_dgrad[i];
      adj[cs.second_index(i, i) * n + k] += g * lin.dr_dlap;
    }
  }
}

void check_lag(const ProblemSpec& prob, const PointSet& pts, std::span<const double> lag) {
  if (prob.mobility.lagged)
    require(lag.size() == pts.size(), "lagged mobility needs one lag value per interior point");
  else
    require(lag.empty(), "lag values given for a non-lagged mobility");
}

}  // namespace

std::vector<double> pointwise_residuals(const Network& net, std::span<const double> params,
                                        const ProblemSpec& prob, const PointSet& interior,
                                        std::span<const double> lag, ClampCounter* clamps) {
  check_lag(prob, interior, lag);
  if (interior.empty()) return {};
  JetBatch b = net.forward(params, ChannelSet::pde(prob.dim()), interior);
  std::vector<double> r;
  residuals_from_batch(b, interior, prob, lag, clamps, r, {});
  return r;
}

double mse_residual(const Network& net, std::span<const double> params, const ProblemSpec& prob,
                    const PointSet& interior, std::span<const double> lag, GradSink sink,
                    ClampCounter* clamps) {
  require(!interior.empty(), "mse_residual: empty interior batch");
  check_lag(prob, interior, lag);
  return run_term(net, params, ChannelSet::pde(prob.dim()), interior, sink,
                  [&](const JetBatch& b, std::span<double> adj) {
                    std::vector<double> r;
                    residuals_from_batch(b, interior, prob, lag, clamps, r,
                                         sink.grad.empty() ? std::span<double>() : adj);
                    double s = 0.0;
                    for (double v : r) s += v * v;
                    return s / static_cast<double>(r.size());
                  });
}

double mse_initial(const Network& net, std::span<const double> params, const PointSet& initial,
                   std::span<const double> targets, GradSink sink) {
  require(!initial.empty(), "mse_initial: empty initial batch");
  require(targets.size() == initial.size(), "mse_initial: one target per point required");
  return run_term(net, params, ChannelSet::value(), initial, sink,
                  [&](const JetBatch& b, std::span<double> adj) {
                    const auto u = b.channel(0);
                    const double n = static_cast<double>(u.size());
                    double s = 0.0;
                    for (std::size_t k = 0; k < u.size(); ++k) {
                      const double e = u[k] - targets[k];
                      s += e * e;
                      adj[k] = 2.0 * e / n;
                    }
                    return s / n;
                  });
}

namespace {

PointSet boundary_eval_points(const ProblemSpec& prob, const BoundaryBatch& batch) {
  if (prob.bc == BoundaryKind::neumann) return batch.points;
  PointSet pts = batch.points;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    std::vector<double> q(batch.points[k].begin(), batch.points[k].end());
    q[batch.axis[k]] = prob.domain.hi[batch.axis[k]];
    pts.push_back(q);
  }
  return pts;
}

// Residual entries of sample k and their output-adjoint positions.
template <class Visit>
void visit_boundary_entries(const JetBatch& b, const ProblemSpec& prob, const BoundaryBatch& batch,
                            Visit&& visit) {
  const int d = prob.dim();
  const ChannelSet& cs = b.channels();
  const std::size_t n = batch.size();
  const std::size_t np = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (prob.bc == BoundaryKind::neumann) {
      const int c = cs.first_index(batch.axis[k]);
      const double sign = batch.side[k] ? 1.0 : -1.0;
      visit(k, sign * b.channel(c)[k], c * np + k, sign, c * np + k, 0.0);
    } else {
      for (int c = 0; c <= d; ++c) {
        const double v = b.channel(c)[k] - b.channel(c)[n + k];
        visit(k, v, c * np + k, 1.0, c * np + n + k, -1.0);
      }
    }
  }
}

void check_boundary(const ProblemSpec& prob, const BoundaryBatch& batch) {
  const int d = prob.dim();
  require(batch.points.dim == d + 1, "boundary batch dimension mismatch");
  require(batch.axis.size() == batch.points.size() && batch.side.size() == batch.points.size(),
          "boundary batch bookkeeping mismatch");
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const int a = batch.axis[k];
    require(a >= 0 && a < d, "boundary sample axis out of range");
    const double face = prob.bc == BoundaryKind::neumann && batch.side[k] ? prob.domain.hi[a] : prob.domain.lo[a];
    require(std::abs(batch.points[k][a] - face) <= 1e-12 * std::max(1.0, std::abs(face)),
            "boundary sample not on the boundary");
  }
}

}  // namespace

std::vector<double> pointwise_boundary_sq(const Network& net, std::span<const double> params,
                                          const ProblemSpec& prob, const BoundaryBatch& batch) {
  check_boundary(prob, batch);
  std::vector<double> out(batch.size(), 0.0);
  if (batch.size() == 0) return out;
  JetBatch b = net.forward(params, ChannelSet::gradient(prob.dim()), boundary_eval_points(prob, batch));
  visit_boundary_entries(b, prob, batch, [&](std::size_t k, double v, std::size_t, double, std::size_t, double) {
    out[k] += v * v;
  });
  return out;
}

double mse_boundary(const Network& net, std::span<const double> params, const ProblemSpec& prob,
                    const BoundaryBatch& batch, GradSink sink) {
  require(batch.size() > 0, "mse_boundary: empty boundary batch");
  check_boundary(prob, batch);
  const std::size_t entries =
      batch.size() * (prob.bc == BoundaryKind::neumann ? 1 : static_cast<std::size_t>(prob.dim() + 1));
  return run_term(net, params, ChannelSet::gradient(prob.dim()), boundary_eval_points(prob, batch), sink,
                  [&](const JetBatch& b, std::span<double> adj) {
                    double s = 0.0;
                    const double n = static_cast<double>(entries);
                    visit_boundary_entries(b, prob, batch,
                                           [&](std::size_t, double v, std::size_t ia, double sa,
                                               std::size_t ib, double sb) {
                                             s += v * v;
                                             adj[ia] += 2.0 * v * sa / n;
                                             if (sb != 0.0) adj[ib] += 2.0 * v * sb / n;
                                           });
                    return s / n;
                  });
}

double energy_at_time(const Network& net, std::span<const double> params, const ProblemSpec& prob,
                      const EnergyQuadrature& quad, double t, ClampCounter* clamps) {
  const int d = prob.dim();
  require(quad.nodes.dim == d, "energy_at_time: quadrature dimension mismatch");
  const double times[1] = {t};
  const PointSet pts = with_time(quad.nodes, times);
  JetBatch b = net.forward(params, ChannelSet::gradient(d), pts);
  const double e2 = prob.epsilon * prob.epsilon;
  const auto u = b.channel(0);
  double e = 0.0;
  for (std::size_t n = 0; n < pts.size(); ++n) {
    double g2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double gi = b.channel(1 + i)[n];
      g2 += gi * gi;
    }
    double density = 0.5 * e2 * g2 + potential_eval(prob.potential, clamp_u(prob, u[n], clamps, nullptr)).F;
    if (prob.advection.present) {
      const auto beta = prob.advection.beta(quad.nodes[n]);
      for (double bi : beta) density += 0.5 * bi * bi;
    }
    e += quad.weights[n] * density;
  }
  return e;
}

namespace {

// dE/dt per time and, when adj is non-empty, accumulates sum_k c_k d(rate_k)/d(outputs).
std::vector<double> rates_from_batch(const JetBatch& b, const ProblemSpec& prob, const EnergyQuadrature& quad,
                                     std::size_t ntimes, ClampCounter* clamps,
                                     std::span<const double> coeff, std::span<double> adj) {
  const int d = prob.dim();
  const ChannelSet& cs = b.channels();
  const std::size_t nq = quad.weights.size();
  const std::size_t np = b.size();
  const double e2 = prob.epsilon * prob.epsilon;
  const auto u = b.channel(0);
  const auto ut = b.channel(cs.first_index(d));
  std::vector<double> rates(ntimes, 0.0);
  for (std::size_t k = 0; k < ntimes; ++k) {
    const double c = coeff.empty() ? 0.0 : coeff[k];
    double s = 0.0;
    for (std::size_t n = 0; n < nq; ++n) {
      const std::size_t p = k * nq + n;
      const double w = quad.weights[n];
      bool was = false;
      const double uc = clamp_u(prob, u[p], clamps, &was);
      const double f = potential_eval(prob.potential, uc).f;
      double g = 0.0;
      for (int i = 0; i < d; ++i) {
        const double gx = b.channel(cs.first_index(i))[p];
        const double gxt = b.channel(cs.second_index(i, d))[p];
        g += gx * gxt;
        if (c != 0.0) {
          adj[cs.first_index(i) * np + p] += c * w * e2 * gxt;
          adj[cs.second_index(i, d) * np + p] += c * w * e2 * gx;
        }
      }
      s += w * (e2 * g + f * ut[p]);
      if (c != 0.0) {
        adj[cs.first_index(d) * np + p] += c * w * f;
        if (!was) adj[p] += c * w * potential_df(prob.potential, uc) * ut[p];
      }
    }
    rates[k] = s;
  }
  return rates;
}

}  // namespace

std::vector<double> energy_rates(const Network& net, std::span<const double> params,
                                 const ProblemSpec& prob, const EnergyQuadrature& quad,
                                 std::span<const double> times, ClampCounter* clamps) {
  require(quad.nodes.dim == prob.dim(), "energy_rates: quadrature dimension mismatch");
  if (times.empty()) return {};
  const PointSet pts = with_time(quad.nodes, times);
  JetBatch b = net.forward(params, ChannelSet::energy_rate(prob.dim()), pts);
  return rates_from_batch(b, prob, quad, times.size(), clamps, {}, {});
}

double energy_penalty(const Network& net, std::span<const double> params, const ProblemSpec& prob,
                      const EnergyQuadrature& quad, std::span<const double> times, GradSink sink,
                      ClampCounter* clamps) {
  require(quad.nodes.dim == prob.dim(), "energy_penalty: quadrature dimension mismatch");
  require(!times.empty(), "energy_penalty: no energy times");
  const PointSet pts = with_time(quad.nodes, times);
  return run_term(net, params, ChannelSet::energy_rate(prob.dim()), pts, sink,
                  [&](const JetBatch& b, std::span<double> adj) {
                    const double ne = static_cast<double>(times.size());
                    // The hinge pattern is only known after the rates, so
                    // evaluate once, then accumulate adjoints with the
                    // resulting coefficients.
                    ClampCounter local;
                    std::vector<double> r =
                        rates_from_batch(b, prob, quad, times.size(), clamps ? &local : nullptr, {}, {});
                    if (clamps) clamps->count += local.count;
                    double s = 0.0;
                    std::vector<double> coeff(r.size(), 0.0);
                    for (std::size_t k = 0; k < r.size(); ++k) {
                      const double h = std::max(0.0, r[k]);
                      s += h * h;
                      coeff[k] = 2.0 * h / ne;
                    }
                    if (!sink.grad.empty() && s > 0.0) {
                      ClampCounter scratch;
                      rates_from_batch(b, prob, quad, times.size(), clamps ? &scratch : nullptr, coeff, adj);
                    }
                    return s / ne;
                  });
}

TrainingObjective::TrainingObjective(const Network& net, const ProblemSpec& prob, const CollocationSet& set,
                                     LossWeights weights, int quadrature_nodes)
    : net_(net), prob_(prob), set_(set), w_(weights) {
  w_.validate();
  if (w_.lambda_e > 0.0) quad_ = make_quadrature(prob.domain, prob.bc, quadrature_nodes);
}

double TrainingObjective::operator()(std::span<const double> params, std::span<double> grad,
                                     LossReport* report) const {
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  ClampCounter* clamps = prob_.potential.kind == PotentialKind::logarithmic ? &clamps_ : nullptr;
  LossReport r;
  r.loss_r = mse_residual(net_, params, prob_, set_.interior, set_.interior_lag, {grad, w_.lambda_r}, clamps);
  r.loss_i = mse_initial(net_, params, set_.initial, set_.initial_targets, {grad, w_.lambda_i});
  r.loss_b = mse_boundary(net_, params, prob_, set_.boundary, {grad, w_.lambda_b});
  if (quad_) r.loss_e = energy_penalty(net_, params, prob_, *quad_, set_.energy_times, {grad, w_.lambda_e}, clamps);
  r.total = total_loss(r, w_);
  if (!std::isfinite(r.total)) throw TrainingFault("total loss is not finite");
  if (!grad.empty()) {
    for (double g : grad)
      if (!std::isfinite(g)) throw TrainingFault("loss gradient is not finite");
  }
  if (report) *report = r;
  return r.total;
}

}  // namespace acpinn
