#pragma once

#include <cstddef>
#include <string_view>

namespace fallpred::nn::kernels {

// Inner loops of the convolution and dense layers. Every kernel has a scalar
// reference implementation; vector variants are chosen once at runtime from
// the CPU's capabilities. Setting FALLPRED_ISA=scalar in the environment pins
// the scalar path.

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);
bool isa_supported(Isa isa);
/// ISA used by dot()/axpy(); decided on first use.
Isa active_isa();
/// Overrides the runtime choice (tests and benchmarks). Throws if unsupported.
void set_active_isa(Isa isa);

/// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);
/// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define FALLPRED_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2
#endif

}  // namespace fallpred::nn::kernels
