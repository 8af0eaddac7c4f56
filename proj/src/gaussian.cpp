#include "gadnr/gaussian.hpp"

#include <cmath>

#include "gadnr/errors.hpp"
#include "gadnr/kernels.hpp"

namespace gadnr {

Moments empirical_moments(const Matrix& rows) {
  const int d = rows.rows;
  const int p = rows.cols;
  if (d == 0) throw NumericError("empirical_moments: empty row set");
  Moments m;
  m.mean = Matrix(1, p);
  for (int i = 0; i < d; ++i)
    kernels::axpy(m.mean.row(0), 1.0 / d, rows.row(i), static_cast<std::size_t>(p));
  m.cov = Matrix(p, p);
  if (d == 1) return m;
  std::vector<double> centered(static_cast<std::size_t>(p));
  for (int i = 0; i < d; ++i) {
    kernels::sub(centered.data(), rows.row(i), m.mean.row(0), static_cast<std::size_t>(p));
    for (int a = 0; a < p; ++a)
      kernels::axpy(m.cov.row(a), centered[a], centered.data(), static_cast<std::size_t>(p));
  }
  kernels::scal(m.cov.data.data(), 1.0 / (d - 1), m.cov.data.data(), m.cov.size());
  return m;
}

namespace {

// In-place Cholesky on the lower triangle; scalar loops beat the dispatched
// kernels at the p <= 128 sizes this runs at.
void cholesky_lower(Matrix& a, int p) {
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a(i, j);
      const double* li = a.row(i);
      const double* lj = a.row(j);
      for (int k = 0; k < j; ++k) s -= li[k] * lj[k];
      if (i == j) {
        if (s <= 0.0 || !std::isfinite(s))
          throw NumericError("gaussian_kl: regularized covariance not positive definite");
        a(i, i) = std::sqrt(s);
      } else {
        a(i, j) = s / a(j, j);
      }
    }
  }
}

}  // namespace

GaussianKl gaussian_kl_with_grad(const Matrix& mu1, const Matrix& cov1, const Matrix& mu2,
                                 const Matrix& cov2, double c) {
  const int p = mu1.cols;
  if (mu1.rows != 1 || mu2.rows != 1 || mu2.cols != p || cov1.rows != p || cov1.cols != p ||
      cov2.rows != p || cov2.cols != p)
    throw NumericError("gaussian_kl: dimension mismatch");
  if (c < 0.0) throw NumericError("gaussian_kl: negative regularizer");

  // Lower-triangular factors of both regularized covariances.
  Matrix l1 = cov1;
  Matrix l2 = cov2;
  for (int i = 0; i < p; ++i) {
    l1(i, i) += c;
    l2(i, i) += c;
  }
  cholesky_lower(l1, p);
  cholesky_lower(l2, p);

  double logdet1 = 0.0, logdet2 = 0.0;
  for (int i = 0; i < p; ++i) {
    logdet1 += std::log(l1(i, i));
    logdet2 += std::log(l2(i, i));
  }

  // T = L2^{-1} (lower triangular), so K = S2^{-1} = T^T T.
  Matrix t(p, p);
  for (int j = 0; j < p; ++j) {
    t(j, j) = 1.0 / l2(j, j);
    for (int i = j + 1; i < p; ++i) {
      double s = 0.0;
      for (int k = j; k < i; ++k) s += l2(i, k) * t(k, j);
      t(i, j) = -s / l2(i, i);
    }
  }
  Matrix k(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int r = i; r < p; ++r) s += t(r, i) * t(r, j);  // rows >= max(i,j)
      k(i, j) = k(j, i) = s;
    }

  // tr(S2^{-1} S1) = ||L2^{-1} L1||_F^2 with W = T L1 (both lower triangular).
  double trace = 0.0;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) {
      double w = 0.0;
      for (int r = j; r <= i; ++r) w += t(i, r) * l1(r, j);
      trace += w * w;
    }

  std::vector<double> m(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) m[static_cast<std::size_t>(i)] = mu2(0, i) - mu1(0, i);

  GaussianKl out;
  out.d_mu2 = Matrix(1, p);  // K (mu2 - mu1)
  double quad = 0.0;
  for (int i = 0; i < p; ++i) {
    double s = 0.0;
    for (int j = 0; j < p; ++j) s += k(i, j) * m[static_cast<std::size_t>(j)];
    out.d_mu2(0, i) = s;
    quad += m[static_cast<std::size_t>(i)] * s;
  }

  out.value = 0.5 * (2.0 * (logdet2 - logdet1) - p + trace + quad);

  // d/dS2 = 1/2 (K - K S1 K - (Km)(Km)^T); K S1 K = (K L1)(K L1)^T.
  Matrix kl1(p, p);  // K L1, exploiting L1's lower triangle
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      double s = 0.0;
      for (int r = j; r < p; ++r) s += k(i, r) * l1(r, j);
      kl1(i, j) = s;
    }
  out.d_cov2 = Matrix(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      const double* ai = kl1.row(i);
      const double* aj = kl1.row(j);
      for (int r = 0; r < p; ++r) s += ai[r] * aj[r];
      const double v = 0.5 * (k(i, j) - s - out.d_mu2(0, i) * out.d_mu2(0, j));
      out.d_cov2(i, j) = out.d_cov2(j, i) = v;
    }
  return out;
}

double gaussian_kl(const Matrix& mu1, const Matrix& cov1, const Matrix& mu2, const Matrix& cov2,
                   double c) {
  return gaussian_kl_with_grad(mu1, cov1, mu2, cov2, c).value;
}

}  // namespace gadnr
