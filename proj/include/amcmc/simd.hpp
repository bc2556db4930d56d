#pragma once

// Data-parallel inner loops used by the kernel and Poisson code.
//
// Every kernel has a portable scalar reference in `simd::scalar` and, when the
// build targets the architecture, an intrinsics variant (`simd::avx2` on
// x86-64, `simd::neon` on AArch64). The free functions in `simd` dispatch to
// the best variant the running CPU supports; the choice is made once at first
// use and can be overridden with `set_isa` (tests use this to compare lanes).

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace amcmc::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa) noexcept;

/// Best ISA supported by both the build and the running CPU.
Isa detected_isa() noexcept;

/// ISA currently used by the dispatching entry points.
Isa active_isa() noexcept;

/// Select the dispatch target. Throws std::invalid_argument if `isa` is not
/// available on this machine.
void set_isa(Isa isa);

/// True iff `isa` was compiled in and the CPU reports support for it.
bool isa_available(Isa isa) noexcept;

/// All ISAs available on this machine, scalar first.
std::vector<Isa> available_isas();

// Dispatching entry points. Lengths of paired spans must match (checked by
// callers; the kernels assume it).
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double l1_distance(std::span<const double> a, std::span<const double> b) noexcept;
double sum(std::span<const double> a) noexcept;
/// y[i] = sum_j m[i*cols + j] * x[j] for a row-major rows x cols matrix.
void matvec(std::span<const double> m, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) noexcept;
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double l1_distance(std::span<const double> a, std::span<const double> b) noexcept;
double sum(std::span<const double> a) noexcept;
void matvec(std::span<const double> m, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) noexcept;
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;
}  // namespace scalar

#if defined(AMCMC_HAVE_AVX2)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double l1_distance(std::span<const double> a, std::span<const double> b) noexcept;
double sum(std::span<const double> a) noexcept;
void matvec(std::span<const double> m, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) noexcept;
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;
}  // namespace avx2
#endif

#if defined(AMCMC_HAVE_NEON)
namespace neon {
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double l1_distance(std::span<const double> a, std::span<const double> b) noexcept;
double sum(std::span<const double> a) noexcept;
void matvec(std::span<const double> m, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) noexcept;
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;
}  // namespace neon
#endif

}  // namespace amcmc::simd
