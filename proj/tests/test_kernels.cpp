// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "acpinn/kernels.hpp"

using namespace acpinn::kernels;

namespace {

std::vector<double> randn(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
  return m;
}

}  // namespace

TEST_CASE("scalar gemm variants agree with naive triple loops") {
  std::mt19937_64 rng(3);
  const std::size_t m = 5, n = 7, k = 3;
  auto a = randn(m * k, rng), b = randn(k * n, rng);
  std::vector<double> c(m * n), ref(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < k; ++l) ref[i * n + j] += a[i * k + l] * b[l * n + j];
  scalar_table().gemm_nn(m, n, k, a.data(), k, b.data(), n, c.data(), n);
  CHECK(max_rel(ref, c) < 1e-14);

  // tn: C[k x n] = A[m x k]^T B[m x n]
  auto b2 = randn(m * n, rng);
  std::vector<double> c2(k * n), ref2(k * n, 0.0);
  for (std::size_t l = 0; l < k; ++l)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < m; ++i) ref2[l * n + j] += a[i * k + l] * b2[i * n + j];
  scalar_table().gemm_tn(m, n, k, a.data(), k, b2.data(), n, c2.data(), n);
  CHECK(max_rel(ref2, c2) < 1e-14);

  // nt_acc: C[m x k] += A[m x n] B[k x n]^T
  auto a3 = randn(m * n, rng), b3 = randn(k * n, rng);
  std::vector<double> c3(m * k, 1.0), ref3(m * k, 1.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t l = 0; l < k; ++l)
      for (std::size_t j = 0; j < n; ++j) ref3[i * k + l] += a3[i * n + j] * b3[l * n + j];
  scalar_table().gemm_nt_acc(m, n, k, a3.data(), n, b3.data(), n, c3.data(), k);
  CHECK(max_rel(ref3, c3) < 1e-14);
}

TEST_CASE("avx2 kernels match the scalar reference") {
  const KernelTable* v = avx2_table();
  if (!v) {
    MESSAGE("AVX2 unavailable on this host; equivalence skipped");
    return;
  }
  const KernelTable& s = scalar_table();
  std::mt19937_64 rng(11);
  // Shapes chosen to hit full 4x8 tiles and every ragged edge.
  for (std::size_t m : {1, 3, 4, 7, 64}) {
    for (std::size_t n : {1, 5, 8, 13, 67}) {
      for (std::size_t k : {1, 2, 9, 64}) {
        auto a = randn(m * k, rng), b = randn(k * n, rng);
        std::vector<double> cs(m * n), cv(m * n);
        s.gemm_nn(m, n, k, a.data(), k, b.data(), n, cs.data(), n);
        v->gemm_nn(m, n, k, a.data(), k, b.data(), n, cv.data(), n);
        CHECK(max_rel(cs, cv) < 1e-13);

        auto b2 = randn(m * n, rng);
        std::vector<double> ts(k * n), tv(k * n);
        s.gemm_tn(m, n, k, a.data(), k, b2.data(), n, ts.data(), n);
        v->gemm_tn(m, n, k, a.data(), k, b2.data(), n, tv.data(), n);
        CHECK(max_rel(ts, tv) < 1e-13);

        auto a3 = randn(m * n, rng), b3 = randn(k * n, rng);
        std::vector<double> ns(m * k, 0.5), nv(m * k, 0.5);
        s.gemm_nt_acc(m, n, k, a3.data(), n, b3.data(), n, ns.data(), k);
        v->gemm_nt_acc(m, n, k, a3.data(), n, b3.data(), n, nv.data(), k);
        CHECK(max_rel(ns, nv) < 1e-13);
      }
    }
  }

  std::vector<double> x;
  for (double t = -30.0; t <= 30.0; t += 0.0137) x.push_back(t);
  x.push_back(0.0);
  x.push_back(-0.0);
  x.push_back(1e-300);
  std::vector<double> ys(x.size()), yv(x.size());
  s.tanh(x.data(), ys.data(), x.size());
  v->tanh(x.data(), yv.data(), x.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(ys[i] - yv[i]));
  CHECK(worst < 1e-15);

  double nanv = std::nan(""), out = 0.0;
  v->tanh(&nanv, &out, 1);
  CHECK(std::isnan(out));

  for (std::size_t n : {0, 1, 3, 4, 17, 1000}) {
    auto p = randn(n, rng), q = randn(n, rng);
    CHECK(std::abs(s.dot(p.data(), q.data(), n) - v->dot(p.data(), q.data(), n)) <
          1e-12 * (1.0 + n));
    auto r1 = q, r2 = q;
    s.axpy(0.3, p.data(), r1.data(), n);
    v->axpy(0.3, p.data(), r2.data(), n);
    CHECK(max_rel(r1, r2) < 1e-15);
  }
}

TEST_CASE("isa selection") {
  const Isa before = active().isa;
  select(Isa::scalar);
  CHECK(active().isa == Isa::scalar);
  if (avx2_table()) {
    select(Isa::avx2);
    CHECK(active().isa == Isa::avx2);
  } else {
    CHECK_THROWS_AS(select(Isa::avx2), std::invalid_argument);
  }
  select(before);
  CHECK(isa_name(Isa::avx2) == "avx2");
}
