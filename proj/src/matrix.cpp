#include "gadnr/matrix.hpp"

#include <cmath>

#include "gadnr/errors.hpp"
#include "gadnr/kernels.hpp"

namespace gadnr {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw NumericError("matmul: inner dimensions disagree");
  Matrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (int k = 0; k < a.cols; ++k) {
      if (ai[k] != 0.0) kernels::axpy(ci, ai[k], b.row(k), static_cast<std::size_t>(b.cols));
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw NumericError("matmul_tn: row counts disagree");
  Matrix c(a.cols, b.cols);
  for (int m = 0; m < a.rows; ++m) {
    const double* am = a.row(m);
    const double* bm = b.row(m);
    for (int i = 0; i < a.cols; ++i) {
      if (am[i] != 0.0) kernels::axpy(c.row(i), am[i], bm, static_cast<std::size_t>(b.cols));
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw NumericError("matmul_nt: column counts disagree");
  Matrix c(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (int j = 0; j < b.rows; ++j)
      ci[j] = kernels::dot(ai, b.row(j), static_cast<std::size_t>(a.cols));
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

bool all_finite(const Matrix& a) {
  for (double v : a.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace gadnr
