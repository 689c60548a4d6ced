#include "fallpred/nn/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fallpred::nn::kernels {

namespace {

struct Table {
  Isa isa;
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
};

constexpr Table kScalar{Isa::scalar, &scalar::dot, &scalar::axpy};
#ifdef FALLPRED_HAVE_AVX2_KERNELS
constexpr Table kAvx2{Isa::avx2, &avx2::dot, &avx2::axpy};
#endif

const Table* table_for(Isa isa) {
#ifdef FALLPRED_HAVE_AVX2_KERNELS
  if (isa == Isa::avx2) return &kAvx2;
#endif
  return &kScalar;
}

const Table* detect() {
  if (const char* env = std::getenv("FALLPRED_ISA"); env && std::string(env) == "scalar") return &kScalar;
  return isa_supported(Isa::avx2) ? table_for(Isa::avx2) : &kScalar;
}

std::atomic<const Table*> g_table{nullptr};

const Table& table() {
  const Table* t = g_table.load(std::memory_order_acquire);
  if (!t) {
    t = detect();
    g_table.store(t, std::memory_order_release);
  }
  return *t;
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) {
  if (isa == Isa::scalar) return true;
#ifdef FALLPRED_HAVE_AVX2_KERNELS
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return table().isa; }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) throw std::runtime_error("ISA " + std::string(to_string(isa)) + " is not supported here");
  g_table.store(table_for(isa), std::memory_order_release);
}

double dot(const double* a, const double* b, std::size_t n) { return table().dot(a, b, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) { table().axpy(alpha, x, y, n); }

}  // namespace fallpred::nn::kernels
