#include <arm_neon.h>

#include <cmath>

#include "amcmc/simd.hpp"

namespace amcmc::simd::neon {

namespace {
constexpr std::size_t kLanes = 2;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  const std::size_t n = a.size();
  const double* pa = a.data();
  const double* pb = b.data();
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 * kLanes <= n; i += 2 * kLanes) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(pa + i), vld1q_f64(pb + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(pa + i + kLanes), vld1q_f64(pb + i + kLanes));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += pa[i] * pb[i];
  return acc;
}

double l1_distance(std::span<const double> a, std::span<const double> b) noexcept {
  const std::size_t n = a.size();
  const double* pa = a.data();
  const double* pb = b.data();
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 * kLanes <= n; i += 2 * kLanes) {
    acc0 = vaddq_f64(acc0, vabdq_f64(vld1q_f64(pa + i), vld1q_f64(pb + i)));
    acc1 = vaddq_f64(acc1, vabdq_f64(vld1q_f64(pa + i + kLanes), vld1q_f64(pb + i + kLanes)));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += std::fabs(pa[i] - pb[i]);
  return acc;
}

double sum(std::span<const double> a) noexcept {
  const std::size_t n = a.size();
  const double* pa = a.data();
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 * kLanes <= n; i += 2 * kLanes) {
    acc0 = vaddq_f64(acc0, vld1q_f64(pa + i));
    acc1 = vaddq_f64(acc1, vld1q_f64(pa + i + kLanes));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += pa[i];
  return acc;
}

void matvec(std::span<const double> m, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) noexcept {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(m.subspan(r * cols, cols), x);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  const std::size_t n = x.size();
  const double* px = x.data();
  double* py = y.data();
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    vst1q_f64(py + i, vfmaq_f64(vld1q_f64(py + i), va, vld1q_f64(px + i)));
  }
  for (; i < n; ++i) py[i] += alpha * px[i];
}

}  // namespace amcmc::simd::neon
