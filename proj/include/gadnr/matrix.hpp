#pragma once
#include <cstddef>
#include <vector>

#include "gadnr/rng.hpp"

namespace gadnr {

// Dense row-major matrix of doubles. Vectors are 1xn or nx1 matrices.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  Matrix(int r, int c, double fill)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix randn(int r, int c, Rng& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (auto& v : m.data) v = scale * rng.normal();
    return m;
  }

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

  double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  bool empty() const { return data.empty(); }
};

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

bool all_finite(const Matrix& a);

}  // namespace gadnr
