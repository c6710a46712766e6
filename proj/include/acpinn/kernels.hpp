// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string_view>

/// Dense arithmetic kernels used by the network evaluator.
///
/// Every kernel has a portable scalar reference and, where the build and
/// the host allow it, an AVX2+FMA variant. The active table is picked once
/// at startup from CPUID; setting ACPINN_ISA=scalar in the environment
/// forces the reference path. All matrices are row-major with explicit
/// leading dimensions.
namespace acpinn::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;

  /// C[m x n] = A[m x k] * B[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, std::size_t lda,
                  const double* b, std::size_t ldb,
                  double* c, std::size_t ldc);

  /// C[k x n] = A[m x k]^T * B[m x n]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, std::size_t lda,
                  const double* b, std::size_t ldb,
                  double* c, std::size_t ldc);

  /// C[m x k] += A[m x n] * B[k x n]^T
  void (*gemm_nt_acc)(std::size_t m, std::size_t n, std::size_t k,
                      const double* a, std::size_t lda,
                      const double* b, std::size_t ldb,
                      double* c, std::size_t ldc);

  /// y[i] = tanh(x[i]); in-place allowed.
  void (*tanh)(const double* x, double* y, std::size_t n);

  double (*dot)(const double* x, const double* y, std::size_t n);

  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_table();

/// Null when the binary was built without AVX2 support or the CPU lacks
/// AVX2/FMA.
const KernelTable* avx2_table();

/// The table used by the library.
const KernelTable& active();

/// Overrides the runtime choice; throws std::invalid_argument when the
/// requested ISA is unavailable.
void select(Isa isa);

}  // namespace acpinn::kernels
