#pragma once
#include "gadnr/matrix.hpp"

namespace gadnr {

// Sample mean (1xp) and covariance (pxp, n-1 denominator) of a row set.
struct Moments {
  Matrix mean;
  Matrix cov;
};

// rows: dxp with d >= 1. For d == 1 the covariance is the zero matrix.
// Throws NumericError for d == 0. Plain values; never differentiated.
Moments empirical_moments(const Matrix& rows);

// KL(N(mu1, cov1 + cI) || N(mu2, cov2 + cI)) in closed form,
//   1/2 [ log(|S2|/|S1|) - p + tr(S2^{-1} S1) + (m2-m1) S2^{-1} (m2-m1)^T ]
// with gradients with respect to the second (decoded) Gaussian only.
// Means are 1xp row vectors; covariances pxp symmetric.
struct GaussianKl {
  double value;
  Matrix d_mu2;   // 1xp
  Matrix d_cov2;  // pxp, symmetric
};

GaussianKl gaussian_kl_with_grad(const Matrix& mu1, const Matrix& cov1, const Matrix& mu2,
                                 const Matrix& cov2, double c);

double gaussian_kl(const Matrix& mu1, const Matrix& cov1, const Matrix& mu2, const Matrix& cov2,
                   double c);

}  // namespace gadnr
