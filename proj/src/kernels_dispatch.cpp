#include "gadnr/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace gadnr::kernels {

namespace {

struct Table {
  Isa isa;
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  void (*axpy)(double*, double, const double*, std::size_t);
  void (*scal)(double*, double, const double*, std::size_t);
  void (*add)(double*, const double*, const double*, std::size_t);
  void (*sub)(double*, const double*, const double*, std::size_t);
  void (*mul)(double*, const double*, const double*, std::size_t);
  void (*madd)(double*, const double*, const double*, std::size_t);
  void (*relu)(double*, const double*, std::size_t);
  void (*relu_bwd)(double*, const double*, const double*, std::size_t);
};

constexpr Table kScalar = {
    Isa::scalar,        detail::scalar_dot, detail::scalar_sum,  detail::scalar_axpy,
    detail::scalar_scal, detail::scalar_add, detail::scalar_sub,  detail::scalar_mul,
    detail::scalar_madd, detail::scalar_relu, detail::scalar_relu_bwd,
};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2 = {
    Isa::avx2,         detail::avx2_dot, detail::avx2_sum,  detail::avx2_axpy,
    detail::avx2_scal, detail::avx2_add, detail::avx2_sub,  detail::avx2_mul,
    detail::avx2_madd, detail::avx2_relu, detail::avx2_relu_bwd,
};
#endif

const Table* resolve() {
  if (const char* env = std::getenv("GADNR_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return &kScalar;
#if defined(__x86_64__) || defined(_M_X64)
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return &kAvx2;
#endif
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (cpu_has_avx2()) return &kAvx2;
#endif
  return &kScalar;
}

const Table* g_table = nullptr;

const Table& table() {
  if (!g_table) g_table = resolve();
  return *g_table;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return table().isa; }

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void force_isa(Isa isa) {
  if (isa == Isa::scalar) {
    g_table = &kScalar;
    return;
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::avx2 && cpu_has_avx2()) {
    g_table = &kAvx2;
    return;
  }
#endif
  throw std::runtime_error("requested SIMD ISA not supported on this CPU");
}

double dot(const double* a, const double* b, std::size_t n) { return table().dot(a, b, n); }
double sum(const double* a, std::size_t n) { return table().sum(a, n); }
void axpy(double* y, double alpha, const double* x, std::size_t n) { table().axpy(y, alpha, x, n); }
void scal(double* out, double alpha, const double* a, std::size_t n) { table().scal(out, alpha, a, n); }
void add(double* out, const double* a, const double* b, std::size_t n) { table().add(out, a, b, n); }
void sub(double* out, const double* a, const double* b, std::size_t n) { table().sub(out, a, b, n); }
void mul(double* out, const double* a, const double* b, std::size_t n) { table().mul(out, a, b, n); }
void madd(double* dst, const double* a, const double* b, std::size_t n) { table().madd(dst, a, b, n); }
void relu(double* out, const double* a, std::size_t n) { table().relu(out, a, n); }
void relu_bwd(double* dst, const double* g, const double* a, std::size_t n) {
  table().relu_bwd(dst, g, a, n);
}

}  // namespace gadnr::kernels
