// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#include "acpinn/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "acpinn/errors.hpp"
#include "acpinn/loss.hpp"

namespace acpinn {

void BoundaryBatch::append(const BoundaryBatch& other) {
  if (other.size() == 0) return;
  if (points.dim == 0) points.dim = other.points.dim;
  points.append(other.points);
  axis.insert(axis.end(), other.axis.begin(), other.axis.end());
  side.insert(side.end(), other.side.begin(), other.side.end());
}

PointSet latin_hypercube(std::size_t n, const Box& box, std::uint64_t seed) {
  require(n >= 1, "latin_hypercube: n must be >= 1");
  const int d = box.dim();
  require(d >= 1, "latin_hypercube: empty box");
  for (int a = 0; a < d; ++a) require(box.extent(a) > 0.0, "latin_hypercube: zero-extent axis");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PointSet out(d);
  out.coords.resize(n * d);
  std::vector<std::size_t> perm(n);
  for (int a = 0; a < d; ++a) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const double lo = box.lo[a], len = box.extent(a);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = lo + len * (static_cast<double>(perm[i]) + unif(rng)) / static_cast<double>(n);
      out.coords[i * d + a] = std::min(v, box.hi[a]);
    }
  }
  return out;
}

BoundaryBatch sample_boundary(std::size_t n, const ProblemSpec& prob, double t0, double t1,
                              std::uint64_t seed) {
  const int d = prob.dim();
  BoundaryBatch b;
  b.points = latin_hypercube(n, space_time_box(prob.domain, t0, t1), seed);
  for (std::size_t k = 0; k < n; ++k) {
    int axis = 0, side = 0;
    if (prob.bc == BoundaryKind::neumann) {
      const int face = static_cast<int>(k % static_cast<std::size_t>(2 * d));
      axis = face / 2;
      side = face % 2;
    } else {
      axis = static_cast<int>(k % static_cast<std::size_t>(d));
    }
    b.points[k][axis] = side ? prob.domain.hi[axis] : prob.domain.lo[axis];
    b.axis.push_back(axis);
    b.side.push_back(side);
  }
  return b;
}

PointSet sample_initial(std::size_t n, const Box& domain, double t, std::uint64_t seed) {
  const PointSet space = latin_hypercube(n, domain, seed);
  PointSet out(domain.dim() + 1);
  out.coords.reserve(n * (domain.dim() + 1));
  for (std::size_t k = 0; k < n; ++k) {
    out.coords.insert(out.coords.end(), space[k].begin(), space[k].end());
    out.coords.push_back(t);
  }
  return out;
}

std::vector<double> sample_times(std::size_t n, double t0, double t1, std::uint64_t seed) {
  const PointSet p = latin_hypercube(n, Box{{t0}, {t1}}, seed);
  return p.coords;
}

DorflerResult dorfler_mark(std::span<const double> eta, double tau) {
  require(tau > 0.0 && tau <= 1.0, "dorfler_mark: tau must lie in (0, 1]");
  double total = 0.0;
  for (double e : eta) {
    require(e >= 0.0 && std::isfinite(e), "dorfler_mark: estimators must be finite and nonnegative");
    total += e;
  }
  DorflerResult out;
  if (total == 0.0) {
    out.all_zero = true;
    return out;
  }
  std::vector<std::size_t> order(eta.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return eta[a] > eta[b]; });
  const double target = tau * total;
  double acc = 0.0;
  for (std::size_t i : order) {
    out.marked.push_back(i);
    acc += eta[i];
    if (acc >= target) break;
  }
  return out;
}

bool adapt_trigger(std::span<const double> h, double tol_s, long epochs, long n_ex) {
  if (h.size() < 4 || epochs <= n_ex) return false;
  const std::size_t k = h.size() - 1;
  const double l0 = h[k] - h[k - 1], l1 = h[k - 1] - h[k - 2], l2 = h[k - 2] - h[k - 3];
  return std::max({l0, l1, l2}) >= tol_s;
}

AdaptEvent adaptive_resample(const AdaptState& state, CollocationSet& set, const Network& net,
                             std::span<const double> params, const ProblemSpec& prob,
                             const LagProvider& lag, std::uint64_t seed) {
  require(state.tau > 0.0 && state.tau < 1.0, "adaptive_resample: tau must lie in (0, 1)");
  const std::size_t nr = set.interior.size(), nb = set.boundary.size();
  const std::size_t nv = static_cast<std::size_t>(std::ceil(state.growth * static_cast<double>(nr + nb)));
  std::size_t nv_r = nr + nb > 0 ? static_cast<std::size_t>(std::llround(static_cast<double>(nv) * nr / (nr + nb))) : 0;
  nv_r = std::min(nv_r, nv);
  const std::size_t nv_b = nv - nv_r;

  AdaptEvent ev;
  ev.candidates = nv;
  ev.marked_interior = PointSet(prob.dim() + 1);
  ev.marked_boundary.points = PointSet(prob.dim() + 1);

  const Box st = space_time_box(prob.domain, set.t0, set.t1);
  PointSet cand_r(prob.dim() + 1);
  std::vector<double> cand_lag;
  BoundaryBatch cand_b;
  cand_b.points = PointSet(prob.dim() + 1);
  std::vector<double> eta;
  ClampCounter clamps;
  if (nv_r > 0) {
    cand_r = latin_hypercube(nv_r, st, seed);
    if (prob.mobility.lagged) cand_lag = lag(cand_r);
    for (double r : pointwise_residuals(net, params, prob, cand_r, cand_lag, &clamps)) eta.push_back(r * r);
  }
  if (nv_b > 0) {
    cand_b = sample_boundary(nv_b, prob, set.t0, set.t1, seed ^ 0x9e3779b97f4a7c15ULL);
    for (double v : pointwise_boundary_sq(net, params, prob, cand_b)) eta.push_back(v);
  }

  const DorflerResult m = dorfler_mark(eta, state.tau);
  ev.all_zero = m.all_zero;
  for (std::size_t i : m.marked) {
    if (i < nv_r) {
      ev.marked_interior.push_back(cand_r[i]);
      set.interior.push_back(cand_r[i]);
      if (prob.mobility.lagged) set.interior_lag.push_back(cand_lag[i]);
    } else {
      const std::size_t j = i - nv_r;
      ev.marked_boundary.points.push_back(cand_b.points[j]);
      ev.marked_boundary.axis.push_back(cand_b.axis[j]);
      ev.marked_boundary.side.push_back(cand_b.side[j]);
    }
  }
  set.boundary.append(ev.marked_boundary);
  ev.marked = m.marked.size();
  ev.new_total = set.interior.size() + set.boundary.size();
  return ev;
}

}  // namespace acpinn
