#include "qkad/simd/simd.hpp"

namespace qkad::simd::detail {

double l2sq_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void abs2_scalar(const std::complex<double>* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = a[i].real();
    const double im = a[i].imag();
    out[i] = re * re + im * im;
  }
}

void apply_gate1_scalar(std::complex<double>* amps, std::size_t n,
                        unsigned target, const std::complex<double> m[4]) {
  const std::size_t stride = std::size_t{1} << target;
  for (std::size_t base = 0; base < n; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const std::complex<double> a0 = amps[i];
      const std::complex<double> a1 = amps[i + stride];
      amps[i] = m[0] * a0 + m[1] * a1;
      amps[i + stride] = m[2] * a0 + m[3] * a1;
    }
  }
}

}  // namespace qkad::simd::detail
