#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "amcmc/simd.hpp"

namespace amcmc::simd {

namespace {

struct KernelTable {
  Isa isa;
  double (*dot)(std::span<const double>, std::span<const double>) noexcept;
  double (*l1_distance)(std::span<const double>, std::span<const double>) noexcept;
  double (*sum)(std::span<const double>) noexcept;
  void (*matvec)(std::span<const double>, std::size_t, std::size_t, std::span<const double>,
                 std::span<double>) noexcept;
  void (*axpy)(double, std::span<const double>, std::span<double>) noexcept;
};

constexpr KernelTable kScalar{Isa::Scalar, scalar::dot, scalar::l1_distance, scalar::sum,
                              scalar::matvec, scalar::axpy};
#if defined(AMCMC_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::Avx2, avx2::dot, avx2::l1_distance, avx2::sum, avx2::matvec,
                            avx2::axpy};
#endif
#if defined(AMCMC_HAVE_NEON)
constexpr KernelTable kNeon{Isa::Neon, neon::dot, neon::l1_distance, neon::sum, neon::matvec,
                            neon::axpy};
#endif

const KernelTable* table_for(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return &kScalar;
#if defined(AMCMC_HAVE_AVX2)
    case Isa::Avx2: return &kAvx2;
#endif
#if defined(AMCMC_HAVE_NEON)
    case Isa::Neon: return &kNeon;
#endif
    default: return nullptr;
  }
}

// AMCMC_SIMD=scalar forces the reference lane.
const KernelTable* initial_table() noexcept {
  if (const char* env = std::getenv("AMCMC_SIMD"); env != nullptr) {
    const std::string want(env);
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
      if (want == to_string(isa) && isa_available(isa)) return table_for(isa);
    }
  }
  return table_for(detected_isa());
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(AMCMC_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(AMCMC_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() noexcept {
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa active_isa() noexcept { return current().load(std::memory_order_acquire)->isa; }

void set_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("SIMD ISA not available: " + std::string(to_string(isa)));
  }
  current().store(table_for(isa), std::memory_order_release);
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
    if (isa_available(isa)) out.push_back(isa);
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  return current().load(std::memory_order_acquire)->dot(a, b);
}

double l1_distance(std::span<const double> a, std::span<const double> b) noexcept {
  return current().load(std::memory_order_acquire)->l1_distance(a, b);
}

double sum(std::span<const double> a) noexcept {
  return current().load(std::memory_order_acquire)->sum(a);
}

void matvec(std::span<const double> m, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) noexcept {
  current().load(std::memory_order_acquire)->matvec(m, rows, cols, x, y);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  current().load(std::memory_order_acquire)->axpy(alpha, x, y);
}

}  // namespace amcmc::simd
