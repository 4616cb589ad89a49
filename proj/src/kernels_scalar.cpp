#include "civl/kernels.hpp"

namespace civl::kernels::scalar {

void dot_rows(const double* rows, std::size_t n, std::size_t dim, const double* coeffs,
              double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = rows + i * dim;
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) acc = acc + r[k] * coeffs[k];
    out[i] = acc;
  }
}

void column_bounds(const double* rows, std::size_t dim, const std::size_t* sel, std::size_t nsel,
                   double* lo, double* hi) {
  const double* first = rows + sel[0] * dim;
  for (std::size_t k = 0; k < dim; ++k) lo[k] = hi[k] = first[k];
  for (std::size_t s = 1; s < nsel; ++s) {
    const double* r = rows + sel[s] * dim;
    for (std::size_t k = 0; k < dim; ++k) {
      if (r[k] < lo[k]) lo[k] = r[k];
      if (r[k] > hi[k]) hi[k] = r[k];
    }
  }
}

std::size_t box_membership(const double* rows, std::size_t n, std::size_t dim, const double* lo,
                           const double* hi, std::uint8_t* inside) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = rows + i * dim;
    bool in = true;
    for (std::size_t k = 0; k < dim && in; ++k) in = lo[k] <= r[k] && r[k] <= hi[k];
    inside[i] = in ? 1 : 0;
    count += in;
  }
  return count;
}

}  // namespace civl::kernels::scalar
