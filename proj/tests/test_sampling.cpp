// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "acpinn/errors.hpp"
#include "acpinn/loss.hpp"
#include "acpinn/sampling.hpp"
#include "helpers.hpp"

using namespace acpinn;

namespace {

// Exhaustive minimum-cardinality subset meeting the bulk bound.
std::size_t brute_force_min(const std::vector<double>& eta, double tau) {
  const std::size_t n = eta.size();
  double total = 0.0;
  for (double e : eta) total += e;
  std::size_t best = n + 1;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double s = 0.0;
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        s += eta[i];
        ++c;
      }
    if (s >= tau * total && c < best) best = c;
  }
  return best;
}

bool stratified(const PointSet& p, const Box& box) {
  const std::size_t n = p.size();
  for (int a = 0; a < box.dim(); ++a) {
    std::set<long> bins;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (p[i][a] - box.lo[a]) / box.extent(a);
      if (u < 0.0 || u > 1.0) return false;
      long bin = static_cast<long>(std::floor(u * n));
      if (bin == static_cast<long>(n)) bin = n - 1;
      bins.insert(bin);
    }
    if (bins.size() != n) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("latin hypercube stratification for every n <= 64 and d <= 4") {
  for (int d = 1; d <= 4; ++d) {
    Box box{std::vector<double>(d, -1.0), std::vector<double>(d, 2.0)};
    box.hi[0] = 5.0;
    for (std::size_t n = 1; n <= 64; ++n) CHECK(stratified(latin_hypercube(n, box, 100 * d + n), box));
  }
  Box unit{{0.0, 0.0}, {1.0, 1.0}};
  auto a = latin_hypercube(4, unit, 9), b = latin_hypercube(4, unit, 9);
  CHECK(a.coords == b.coords);
  CHECK(latin_hypercube(4, unit, 10).coords != a.coords);
  auto one = latin_hypercube(1, unit, 1);
  CHECK(unit.contains(one[0]));
  CHECK_THROWS_AS(latin_hypercube(0, unit, 1), ContractViolation);
  CHECK_THROWS_AS(latin_hypercube(3, Box{{0.0}, {0.0}}, 1), ContractViolation);
}

TEST_CASE("boundary samples sit on the boundary") {
  for (const auto& key : registry_keys()) {
    const ProblemSpec p = registry_lookup(key).problem;
    BoundaryBatch b = sample_boundary(40, p, 0.2, 0.3, 4);
    REQUIRE(b.size() == 40);
    std::set<std::pair<int, int>> faces;
    for (std::size_t k = 0; k < b.size(); ++k) {
      const int a = b.axis[k];
      const double face = b.side[k] ? p.domain.hi[a] : p.domain.lo[a];
      CHECK(b.points[k][a] == face);
      CHECK(b.points[k][p.dim()] >= 0.2);
      CHECK(b.points[k][p.dim()] <= 0.3);
      faces.insert({a, b.side[k]});
    }
    CHECK(faces.size() == static_cast<std::size_t>(p.bc == BoundaryKind::neumann ? 2 * p.dim() : p.dim()));
  }
}

TEST_CASE("initial samples and times") {
  Box dom{{0.0, 0.0}, {2.0, 1.0}};
  PointSet s = sample_initial(10, dom, 0.7, 2);
  for (std::size_t k = 0; k < s.size(); ++k) CHECK(s[k][2] == 0.7);
  auto t = sample_times(5, 1.0, 2.0, 3);
  CHECK(t.size() == 5);
  for (double v : t) {
    CHECK(v >= 1.0);
    CHECK(v <= 2.0);
  }
}

TEST_CASE("dorfler marking hand cases") {
  std::vector<double> e{0.5, 0.3, 0.2};
  auto a = dorfler_mark(e, 0.5);
  REQUIRE(a.marked.size() == 1);
  CHECK(a.marked[0] == 0);
  auto b = dorfler_mark(e, 0.6);
  REQUIRE(b.marked.size() == 2);
  CHECK(b.marked[0] == 0);
  CHECK(b.marked[1] == 1);
  auto c = dorfler_mark(std::vector<double>{0.1, 0.9, 0.4}, 1e-12);
  REQUIRE(c.marked.size() == 1);
  CHECK(c.marked[0] == 1);
  auto z = dorfler_mark(std::vector<double>{0.0, 0.0}, 0.5);
  CHECK(z.all_zero);
  CHECK(z.marked.empty());
  // Ties keep original order.
  auto t = dorfler_mark(std::vector<double>{0.25, 0.25, 0.25, 0.25}, 0.5);
  REQUIRE(t.marked.size() == 2);
  CHECK(t.marked[0] == 0);
  CHECK(t.marked[1] == 1);
  CHECK_THROWS_AS(dorfler_mark(std::vector<double>{-1.0}, 0.5), ContractViolation);
  // One estimator carrying more than tau of the mass is marked alone.
  auto one = dorfler_mark(std::vector<double>{0.01, 5.0, 0.02, 0.03}, 0.9);
  REQUIRE(one.marked.size() == 1);
  CHECK(one.marked[0] == 1);
}

TEST_CASE("dorfler marking is minimal on random instances") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 15);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> eta(size(rng));
    for (auto& e : eta) e = unif(rng) < 0.2 ? 0.0 : std::pow(unif(rng), 3);
    eta[0] += 1e-3;
    const double tau = 0.02 + 0.96 * unif(rng);
    auto r = dorfler_mark(eta, tau);
    double total = 0.0, s = 0.0;
    for (double e : eta) total += e;
    for (auto i : r.marked) s += eta[i];
    if (r.marked.size() != brute_force_min(eta, tau) || s < tau * total) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("adapt trigger") {
  CHECK_FALSE(adapt_trigger(std::vector<double>{1.0, 0.8, 0.7, 0.65}, 0.05, 2000));
  CHECK(adapt_trigger(std::vector<double>{1.0, 0.8, 0.9, 0.95}, 0.05, 2000));
  CHECK_FALSE(adapt_trigger(std::vector<double>{1.0, 0.8, 0.9, 0.95}, 0.05, 1000));
  CHECK_FALSE(adapt_trigger(std::vector<double>{1.0, 2.0, 3.0}, 0.05, 5000));
}

TEST_CASE("adaptive resample") {
  const ProblemSpec p = registry_lookup("ac2d-poly").problem;
  NetworkSpec s;
  s.depth = 2;
  s.width = 8;
  s.input_dim = 3;
  s.normalize_to(space_time_box(p.domain, 0.0, 0.25));
  Network net(s);
  CollocationSet set;
  set.t1 = 0.25;
  set.interior = latin_hypercube(50, space_time_box(p.domain, 0.0, 0.25), 1);
  set.boundary = sample_boundary(10, p, 0.0, 0.25, 2);
  AdaptState st{0.3, 0.01};

  // Zero network: every estimator vanishes, nothing added.
  std::vector<double> zero(net.num_params(), 0.0);
  auto ev0 = adaptive_resample(st, set, net, zero, p, {}, 3);
  CHECK(ev0.all_zero);
  CHECK(ev0.marked == 0);
  CHECK(set.interior.size() == 50);
  CHECK(ev0.candidates == 12);

  auto params = init_params(s, 4).values;
  std::size_t before = set.interior.size() + set.boundary.size();
  for (int round = 0; round < 3; ++round) {
    auto ev = adaptive_resample(st, set, net, params, p, {}, 10 + round);
    const std::size_t nv = static_cast<std::size_t>(std::ceil(0.2 * before));
    CHECK(ev.candidates == nv);
    CHECK(ev.marked <= nv);
    CHECK(ev.marked >= 1);
    CHECK(ev.new_total == before + ev.marked);
    CHECK(ev.marked_interior.size() + ev.marked_boundary.size() == ev.marked);
    CHECK(set.boundary.points.size() == set.boundary.axis.size());
    before = ev.new_total;
  }
  std::set<std::vector<double>> uniq;
  for (std::size_t k = 0; k < set.interior.size(); ++k)
    uniq.insert(std::vector<double>(set.interior[k].begin(), set.interior[k].end()));
  CHECK(uniq.size() == set.interior.size());
}
