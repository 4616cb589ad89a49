#include <immintrin.h>

#include "civl/kernels.hpp"

namespace civl::kernels::avx2 {

// Four rows per iteration, one row per lane. Each lane accumulates its row in
// attribute order with separate multiply and add, matching the scalar kernel.
void dot_rows(const double* rows, std::size_t n, std::size_t dim, const double* coeffs,
              double* out) {
  std::size_t i = 0;
  if (dim > 0) {
    const __m256i stride = _mm256_set_epi64x(3 * static_cast<long long>(dim),
                                             2 * static_cast<long long>(dim),
                                             static_cast<long long>(dim), 0);
    for (; i + 4 <= n; i += 4) {
      const double* base = rows + i * dim;
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t k = 0; k < dim; ++k) {
        __m256d x = _mm256_i64gather_pd(base + k, stride, 8);
        __m256d c = _mm256_set1_pd(coeffs[k]);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(x, c));
      }
      _mm256_storeu_pd(out + i, acc);
    }
  }
  if (i < n) scalar::dot_rows(rows + i * dim, n - i, dim, coeffs, out + i);
}

// Four attributes per vector; min/max are exact so any grouping agrees with scalar.
void column_bounds(const double* rows, std::size_t dim, const std::size_t* sel, std::size_t nsel,
                   double* lo, double* hi) {
  const double* first = rows + sel[0] * dim;
  std::size_t k = 0;
  for (; k + 4 <= dim; k += 4) {
    __m256d vlo = _mm256_loadu_pd(first + k);
    __m256d vhi = vlo;
    for (std::size_t s = 1; s < nsel; ++s) {
      __m256d x = _mm256_loadu_pd(rows + sel[s] * dim + k);
      vlo = _mm256_min_pd(x, vlo);
      vhi = _mm256_max_pd(x, vhi);
    }
    _mm256_storeu_pd(lo + k, vlo);
    _mm256_storeu_pd(hi + k, vhi);
  }
  for (; k < dim; ++k) {
    lo[k] = hi[k] = first[k];
    for (std::size_t s = 1; s < nsel; ++s) {
      double v = rows[sel[s] * dim + k];
      if (v < lo[k]) lo[k] = v;
      if (v > hi[k]) hi[k] = v;
    }
  }
}

std::size_t box_membership(const double* rows, std::size_t n, std::size_t dim, const double* lo,
                           const double* hi, std::uint8_t* inside) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = rows + i * dim;
    bool in = true;
    std::size_t k = 0;
    for (; k + 4 <= dim && in; k += 4) {
      __m256d x = _mm256_loadu_pd(r + k);
      __m256d ge = _mm256_cmp_pd(x, _mm256_loadu_pd(lo + k), _CMP_GE_OQ);
      __m256d le = _mm256_cmp_pd(x, _mm256_loadu_pd(hi + k), _CMP_LE_OQ);
      in = _mm256_movemask_pd(_mm256_and_pd(ge, le)) == 0xF;
    }
    for (; k < dim && in; ++k) in = lo[k] <= r[k] && r[k] <= hi[k];
    inside[i] = in ? 1 : 0;
    count += in;
  }
  return count;
}

}  // namespace civl::kernels::avx2
