// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#include "acpinn/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"

namespace acpinn::kernels {
namespace {

constexpr KernelTable kScalar{Isa::scalar,      scalar::gemm_nn, scalar::gemm_tn,
                              scalar::gemm_nt_acc, scalar::tanh, scalar::dot,
                              scalar::axpy};

#if defined(ACPINN_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2,       avx2::gemm_nn, avx2::gemm_tn,
                            avx2::gemm_nt_acc, avx2::tanh,  avx2::dot,
                            avx2::axpy};
#endif

bool cpu_has_avx2() {
#if defined(ACPINN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_choice() {
  if (const char* env = std::getenv("ACPINN_ISA"); env && std::string(env) == "scalar")
    return &kScalar;
  if (const KernelTable* t = avx2_table()) return t;
  return &kScalar;
}

const KernelTable*& current() {
  static const KernelTable* table = initial_choice();
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if defined(ACPINN_HAVE_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *current(); }

void select(Isa isa) {
  if (isa == Isa::scalar) {
    current() = &kScalar;
    return;
  }
  const KernelTable* t = avx2_table();
  if (!t) throw std::invalid_argument("AVX2 kernels are not available on this host");
  current() = t;
}

}  // namespace acpinn::kernels
