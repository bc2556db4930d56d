#include <cmath>

#include "amcmc/simd.hpp"

namespace amcmc::simd::scalar {

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double l1_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
  return acc;
}

double sum(std::span<const double> a) noexcept {
  double acc = 0.0;
  for (double v : a) acc += v;
  return acc;
}

void matvec(std::span<const double> m, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) noexcept {
  for (std::size_t i = 0; i < rows; ++i) {
    y[i] = dot(m.subspan(i * cols, cols), x);
  }
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace amcmc::simd::scalar
