#pragma once
#include <cstddef>

// Data-parallel inner loops behind the dense math. Every kernel has a scalar
// reference implementation and (on x86-64 with AVX2+FMA) a vector variant;
// the active set is chosen once at runtime. Scalar and SIMD variants are
// equivalence-tested against each other.
namespace gadnr::kernels {

enum class Isa { scalar, avx2 };

// Resolved on first use from CPU capabilities; the GADNR_SIMD environment
// variable ("scalar" or "avx2") overrides the probe.
Isa active_isa();
const char* isa_name(Isa isa);
bool cpu_has_avx2();

// Test hook: switch the dispatch table. Throws if the ISA is unsupported.
void force_isa(Isa isa);

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);

// y += alpha * x
void axpy(double* y, double alpha, const double* x, std::size_t n);
// out = alpha * a
void scal(double* out, double alpha, const double* a, std::size_t n);

void add(double* out, const double* a, const double* b, std::size_t n);
void sub(double* out, const double* a, const double* b, std::size_t n);
void mul(double* out, const double* a, const double* b, std::size_t n);
// dst += a .* b
void madd(double* dst, const double* a, const double* b, std::size_t n);

void relu(double* out, const double* a, std::size_t n);
// dst += g .* (a > 0)
void relu_bwd(double* dst, const double* g, const double* a, std::size_t n);

namespace detail {
double scalar_dot(const double* a, const double* b, std::size_t n);
double scalar_sum(const double* a, std::size_t n);
void scalar_axpy(double* y, double alpha, const double* x, std::size_t n);
void scalar_scal(double* out, double alpha, const double* a, std::size_t n);
void scalar_add(double* out, const double* a, const double* b, std::size_t n);
void scalar_sub(double* out, const double* a, const double* b, std::size_t n);
void scalar_mul(double* out, const double* a, const double* b, std::size_t n);
void scalar_madd(double* dst, const double* a, const double* b, std::size_t n);
void scalar_relu(double* out, const double* a, std::size_t n);
void scalar_relu_bwd(double* dst, const double* g, const double* a, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
double avx2_dot(const double* a, const double* b, std::size_t n);
double avx2_sum(const double* a, std::size_t n);
void avx2_axpy(double* y, double alpha, const double* x, std::size_t n);
void avx2_scal(double* out, double alpha, const double* a, std::size_t n);
void avx2_add(double* out, const double* a, const double* b, std::size_t n);
void avx2_sub(double* out, const double* a, const double* b, std::size_t n);
void avx2_mul(double* out, const double* a, const double* b, std::size_t n);
void avx2_madd(double* dst, const double* a, const double* b, std::size_t n);
void avx2_relu(double* out, const double* a, std::size_t n);
void avx2_relu_bwd(double* dst, const double* g, const double* a, std::size_t n);
#endif
}  // namespace detail

}  // namespace gadnr::kernels
