#include "gadnr/linalg.hpp"

#include <cmath>

#include "gadnr/errors.hpp"
#include "gadnr/kernels.hpp"

namespace gadnr {

Matrix cholesky(const Matrix& a) {
  if (a.rows != a.cols) throw NumericError("cholesky: matrix not square");
  const int n = a.rows;
  Matrix l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a(i, j) - kernels::dot(l.row(i), l.row(j), static_cast<std::size_t>(j));
      if (i == j) {
        if (s <= 0.0 || !std::isfinite(s))
          throw NumericError("cholesky: matrix not positive definite");
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

double logdet_from_cholesky(const Matrix& l) {
  double acc = 0.0;
  for (int i = 0; i < l.rows; ++i) acc += std::log(l(i, i));
  return 2.0 * acc;
}

Matrix inverse_from_cholesky(const Matrix& l) {
  const int n = l.rows;
  // Solve L L^T X = I column by column.
  Matrix inv(n, n);
  std::vector<double> y(n);
  for (int col = 0; col < n; ++col) {
    // Forward: L y = e_col
    for (int i = 0; i < n; ++i) {
      double s = (i == col) ? 1.0 : 0.0;
      s -= kernels::dot(l.row(i), y.data(), static_cast<std::size_t>(i));
      y[i] = s / l(i, i);
    }
    // Backward: L^T x = y
    for (int i = n - 1; i >= 0; --i) {
      double s = y[i];
      for (int k = i + 1; k < n; ++k) s -= l(k, i) * inv(k, col);
      inv(i, col) = s / l(i, i);
    }
  }
  return symmetrize(inv);
}

Matrix symmetrize(const Matrix& a) {
  Matrix s(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

}  // namespace gadnr
