#pragma once
#include "gadnr/matrix.hpp"

namespace gadnr {

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
// Throws NumericError on non-PD input.
Matrix cholesky(const Matrix& a);

// log|A| given A's Cholesky factor.
double logdet_from_cholesky(const Matrix& l);

// A^{-1} given A's Cholesky factor.
Matrix inverse_from_cholesky(const Matrix& l);

// (A + A^T) / 2
Matrix symmetrize(const Matrix& a);

}  // namespace gadnr
