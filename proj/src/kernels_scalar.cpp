#include "gadnr/kernels.hpp"

namespace gadnr::kernels::detail {

double scalar_dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double scalar_sum(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

void scalar_axpy(double* y, double alpha, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scalar_scal(double* out, double alpha, const double* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * a[i];
}

void scalar_add(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void scalar_sub(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void scalar_mul(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scalar_madd(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += a[i] * b[i];
}

void scalar_relu(double* out, const double* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void scalar_relu_bwd(double* dst, const double* g, const double* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] > 0.0) dst[i] += g[i];
  }
}

}  // namespace gadnr::kernels::detail
