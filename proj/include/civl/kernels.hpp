#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation and, on x86-64, an AVX2 variant. The active variant is
// chosen once at startup from CPU features; all variants produce
// bit-identical results (no FMA contraction, same per-lane operation order).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace civl::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Variants compiled in and supported by this CPU, scalar first.
std::vector<Isa> available_isas();

/// Currently dispatched variant. CIVL_FORCE_SCALAR=1 in the environment pins scalar.
Isa active_isa();

/// Overrides dispatch (tests and benchmarks). Throws if `isa` is unavailable.
void set_active_isa(Isa isa);

/// out[i] = sum_k rows[i*dim + k] * coeffs[k], accumulated in k order.
void dot_rows(std::span<const double> rows, std::size_t dim, std::span<const double> coeffs,
              std::span<double> out);

/// Componentwise min/max over the selected rows. `lo`/`hi` have `dim` entries.
/// Requires at least one selected row.
void column_bounds(std::span<const double> rows, std::size_t dim,
                   std::span<const std::size_t> selected, std::span<double> lo,
                   std::span<double> hi);

/// inside[i] = 1 iff lo[k] <= rows[i*dim+k] <= hi[k] for all k. Returns the count.
std::size_t box_membership(std::span<const double> rows, std::size_t dim,
                           std::span<const double> lo, std::span<const double> hi,
                           std::span<std::uint8_t> inside);

// Direct access to each variant for equivalence tests.
namespace scalar {
void dot_rows(const double* rows, std::size_t n, std::size_t dim, const double* coeffs, double* out);
void column_bounds(const double* rows, std::size_t dim, const std::size_t* sel, std::size_t nsel,
                   double* lo, double* hi);
std::size_t box_membership(const double* rows, std::size_t n, std::size_t dim, const double* lo,
                           const double* hi, std::uint8_t* inside);
}  // namespace scalar

namespace avx2 {
void dot_rows(const double* rows, std::size_t n, std::size_t dim, const double* coeffs, double* out);
void column_bounds(const double* rows, std::size_t dim, const std::size_t* sel, std::size_t nsel,
                   double* lo, double* hi);
std::size_t box_membership(const double* rows, std::size_t n, std::size_t dim, const double* lo,
                           const double* hi, std::uint8_t* inside);
}  // namespace avx2

}  // namespace civl::kernels
