#include "hermitian_kernels.hpp"

#include <algorithm>

namespace mipt::kernels {

namespace {

// Column-j coefficients s1 conj(a_j), s2 conj(b_j) of the rank-2 term.
struct ColumnCoeffs {
  double ar, ai, br, bi;
};

inline ColumnCoeffs column_coeffs(std::ptrdiff_t j, double s1, const double* a_re,
                                  const double* a_im, double s2, const double* b_re,
                                  const double* b_im) {
  return {s1 * a_re[j], -s1 * a_im[j], s2 * b_re[j], -s2 * b_im[j]};
}

}  // namespace

void hermitian_matvec(std::ptrdiff_t n, std::ptrdiff_t ld, const double* re, const double* im,
                      const double* __restrict u_re, const double* __restrict u_im,
                      double* __restrict w_re, double* __restrict w_im) {
  std::fill(w_re, w_re + n, 0.0);
  std::fill(w_im, w_im + n, 0.0);
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const double* __restrict cr = re + j * ld;
    const double* __restrict ci = im + j * ld;
    const double ujr = u_re[j];
    const double uji = u_im[j];
    double acc_r = 0.0;
    double acc_i = 0.0;
#pragma omp simd reduction(+ : acc_r, acc_i)
    for (std::ptrdiff_t i = 0; i < j; ++i) {
      const double mr = cr[i];
      const double mi = ci[i];
      // w_i += M_ij u_j
      w_re[i] += mr * ujr - mi * uji;
      w_im[i] += mr * uji + mi * ujr;
      // w_j += conj(M_ij) u_i
      acc_r += mr * u_re[i] + mi * u_im[i];
      acc_i += mr * u_im[i] - mi * u_re[i];
    }
    w_re[j] += acc_r + cr[j] * ujr;
    w_im[j] += acc_i + cr[j] * uji;
  }
}

void hermitian_rank2_update(std::ptrdiff_t n, std::ptrdiff_t ld, double* re, double* im,
                            double s1, const double* __restrict a_re,
                            const double* __restrict a_im, double s2,
                            const double* __restrict b_re, const double* __restrict b_im,
                            const double* __restrict c_re, const double* __restrict c_im,
                            double* __restrict w_re, double* __restrict w_im) {
  const bool probe = c_re != nullptr;
  auto update_diag = [&](std::ptrdiff_t j) {
    const double d = re[j * ld + j] + s1 * (a_re[j] * a_re[j] + a_im[j] * a_im[j]) +
                     s2 * (b_re[j] * b_re[j] + b_im[j] * b_im[j]);
    re[j * ld + j] = d;
    im[j * ld + j] = 0.0;
    if (probe) {
      w_re[j] += d * c_re[j];
      w_im[j] += d * c_im[j];
    }
  };

  if (!probe) {
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      double* __restrict cr = re + j * ld;
      double* __restrict ci = im + j * ld;
      const ColumnCoeffs k = column_coeffs(j, s1, a_re, a_im, s2, b_re, b_im);
#pragma omp simd
      for (std::ptrdiff_t i = 0; i < j; ++i) {
        cr[i] += a_re[i] * k.ar - a_im[i] * k.ai + b_re[i] * k.br - b_im[i] * k.bi;
        ci[i] += a_re[i] * k.ai + a_im[i] * k.ar + b_re[i] * k.bi + b_im[i] * k.br;
      }
      update_diag(j);
    }
    return;
  }

  std::fill(w_re, w_re + n, 0.0);
  std::fill(w_im, w_im + n, 0.0);
  // Columns are swept in pairs so each load of a, b, c and w serves two
  // matrix entries.
  std::ptrdiff_t j = 0;
  for (; j + 1 < n; j += 2) {
    double* __restrict r0 = re + j * ld;
    double* __restrict i0 = im + j * ld;
    double* __restrict r1 = r0 + ld;
    double* __restrict i1 = i0 + ld;
    const ColumnCoeffs k0 = column_coeffs(j, s1, a_re, a_im, s2, b_re, b_im);
    const ColumnCoeffs k1 = column_coeffs(j + 1, s1, a_re, a_im, s2, b_re, b_im);
    const double c0r = c_re[j], c0i = c_im[j];
    const double c1r = c_re[j + 1], c1i = c_im[j + 1];
    double acc0_r = 0.0, acc0_i = 0.0, acc1_r = 0.0, acc1_i = 0.0;
#pragma omp simd reduction(+ : acc0_r, acc0_i, acc1_r, acc1_i)
    for (std::ptrdiff_t i = 0; i < j; ++i) {
      const double ar = a_re[i], ai = a_im[i], br = b_re[i], bi = b_im[i];
      const double m0r = r0[i] + ar * k0.ar - ai * k0.ai + br * k0.br - bi * k0.bi;
      const double m0i = i0[i] + ar * k0.ai + ai * k0.ar + br * k0.bi + bi * k0.br;
      const double m1r = r1[i] + ar * k1.ar - ai * k1.ai + br * k1.br - bi * k1.bi;
      const double m1i = i1[i] + ar * k1.ai + ai * k1.ar + br * k1.bi + bi * k1.br;
      r0[i] = m0r;
      i0[i] = m0i;
      r1[i] = m1r;
      i1[i] = m1i;
      w_re[i] += m0r * c0r - m0i * c0i + m1r * c1r - m1i * c1i;
      w_im[i] += m0r * c0i + m0i * c0r + m1r * c1i + m1i * c1r;
      const double cr = c_re[i], ci = c_im[i];
      acc0_r += m0r * cr + m0i * ci;
      acc0_i += m0r * ci - m0i * cr;
      acc1_r += m1r * cr + m1i * ci;
      acc1_i += m1r * ci - m1i * cr;
    }
    // Entry (j, j+1) sits above the diagonal of column j+1 only.
    const double mr = r1[j] + a_re[j] * k1.ar - a_im[j] * k1.ai + b_re[j] * k1.br -
                      b_im[j] * k1.bi;
    const double mi = i1[j] + a_re[j] * k1.ai + a_im[j] * k1.ar + b_re[j] * k1.bi +
                      b_im[j] * k1.br;
    r1[j] = mr;
    i1[j] = mi;
    w_re[j] += acc0_r + mr * c1r - mi * c1i;
    w_im[j] += acc0_i + mr * c1i + mi * c1r;
    w_re[j + 1] += acc1_r + mr * c0r + mi * c0i;
    w_im[j + 1] += acc1_i + mr * c0i - mi * c0r;
    update_diag(j);
    update_diag(j + 1);
  }
  if (j < n) {
    double* __restrict cr = re + j * ld;
    double* __restrict ci = im + j * ld;
    const ColumnCoeffs k = column_coeffs(j, s1, a_re, a_im, s2, b_re, b_im);
    const double cjr = c_re[j], cji = c_im[j];
    double acc_r = 0.0, acc_i = 0.0;
#pragma omp simd reduction(+ : acc_r, acc_i)
    for (std::ptrdiff_t i = 0; i < j; ++i) {
      const double mr =
          cr[i] + a_re[i] * k.ar - a_im[i] * k.ai + b_re[i] * k.br - b_im[i] * k.bi;
      const double mi =
          ci[i] + a_re[i] * k.ai + a_im[i] * k.ar + b_re[i] * k.bi + b_im[i] * k.br;
      cr[i] = mr;
      ci[i] = mi;
      w_re[i] += mr * cjr - mi * cji;
      w_im[i] += mr * cji + mi * cjr;
      acc_r += mr * c_re[i] + mi * c_im[i];
      acc_i += mr * c_im[i] - mi * c_re[i];
    }
    w_re[j] += acc_r;
    w_im[j] += acc_i;
    update_diag(j);
  }
}

}  // namespace mipt::kernels
