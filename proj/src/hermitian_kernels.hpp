#pragma once

// Hot loops of the measurement update. A Hermitian matrix is held as two
// column-major real planes (re, im) of leading dimension ld, of which only
// the upper triangle (row <= col) is read or written.

#include <cstddef>

namespace mipt::kernels {

/// w = M u.
void hermitian_matvec(std::ptrdiff_t n, std::ptrdiff_t ld, const double* re, const double* im,
                      const double* u_re, const double* u_im, double* w_re, double* w_im);

/// M += s1 a a^dagger + s2 b b^dagger on the upper triangle, with the
/// diagonal kept exactly real. When c is non-null, also returns w = M' c
/// computed from the updated entries in the same sweep.
void hermitian_rank2_update(std::ptrdiff_t n, std::ptrdiff_t ld, double* re, double* im,
                            double s1, const double* a_re, const double* a_im, double s2,
                            const double* b_re, const double* b_im, const double* c_re,
                            const double* c_im, double* w_re, double* w_im);

}  // namespace mipt::kernels
