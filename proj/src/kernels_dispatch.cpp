#include <atomic>
#include <cstdlib>
#include <string>

#include "civl/error.hpp"
#include "civl/kernels.hpp"

namespace civl::kernels {

#ifndef CIVL_WITH_AVX2
namespace avx2 {
// Never dispatched when the variant is not compiled in.
void dot_rows(const double* rows, std::size_t n, std::size_t dim, const double* coeffs,
              double* out) {
  scalar::dot_rows(rows, n, dim, coeffs, out);
}
void column_bounds(const double* rows, std::size_t dim, const std::size_t* sel, std::size_t nsel,
                   double* lo, double* hi) {
  scalar::column_bounds(rows, dim, sel, nsel, lo, hi);
}
std::size_t box_membership(const double* rows, std::size_t n, std::size_t dim, const double* lo,
                           const double* hi, std::uint8_t* inside) {
  return scalar::box_membership(rows, n, dim, lo, hi, inside);
}
}  // namespace avx2
#endif

namespace {

bool cpu_has_avx2() {
#if defined(CIVL_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() {
  const char* force = std::getenv("CIVL_FORCE_SCALAR");
  if (force && std::string(force) != "0") return Isa::scalar;
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::scalar};
  if (cpu_has_avx2()) out.push_back(Isa::avx2);
  return out;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && !cpu_has_avx2())
    throw Error("kernel variant 'avx2' is not available on this build/CPU");
  active().store(isa, std::memory_order_relaxed);
}

void dot_rows(std::span<const double> rows, std::size_t dim, std::span<const double> coeffs,
              std::span<double> out) {
  if (coeffs.size() != dim) throw Error("dot_rows: coefficient count does not match dimension");
  const std::size_t n = out.size();
  if (rows.size() != n * dim) throw Error("dot_rows: row matrix does not match output size");
  if (active_isa() == Isa::avx2)
    avx2::dot_rows(rows.data(), n, dim, coeffs.data(), out.data());
  else
    scalar::dot_rows(rows.data(), n, dim, coeffs.data(), out.data());
}

void column_bounds(std::span<const double> rows, std::size_t dim,
                   std::span<const std::size_t> selected, std::span<double> lo,
                   std::span<double> hi) {
  if (selected.empty()) throw Error("column_bounds: no rows selected");
  if (lo.size() != dim || hi.size() != dim) throw Error("column_bounds: bound size mismatch");
  const std::size_t n = dim ? rows.size() / dim : 0;
  for (std::size_t s : selected)
    if (s >= n) throw Error("column_bounds: row index out of range");
  if (active_isa() == Isa::avx2)
    avx2::column_bounds(rows.data(), dim, selected.data(), selected.size(), lo.data(), hi.data());
  else
    scalar::column_bounds(rows.data(), dim, selected.data(), selected.size(), lo.data(), hi.data());
}

std::size_t box_membership(std::span<const double> rows, std::size_t dim,
                           std::span<const double> lo, std::span<const double> hi,
                           std::span<std::uint8_t> inside) {
  if (lo.size() != dim || hi.size() != dim) throw Error("box_membership: bound size mismatch");
  const std::size_t n = inside.size();
  if (rows.size() != n * dim) throw Error("box_membership: row matrix does not match output size");
  if (active_isa() == Isa::avx2)
    return avx2::box_membership(rows.data(), n, dim, lo.data(), hi.data(), inside.data());
  return scalar::box_membership(rows.data(), n, dim, lo.data(), hi.data(), inside.data());
}

}  // namespace civl::kernels
