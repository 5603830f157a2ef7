#pragma once

#include <complex>
#include <cstddef>

// Hot inner loops (Gram distances, statevector updates) in two builds: a
// scalar reference and an AVX2 variant compiled in its own translation unit.
// The active variant is picked at runtime from CPUID; tests pin each level
// and check the variants agree.

namespace qkad::simd {

enum class Level { scalar = 0, avx2 = 1 };

const char* level_name(Level level);

// Best level this CPU supports.
Level detect();

// Level currently routing the entry points below.
Level active_level();

// Forces a level. Requests above detect() fall back to it. Returns the level
// now in effect. Intended for tests and for the --simd override.
Level set_level(Level level);

// sum_i (a[i] - b[i])^2
double l2sq(const double* a, const double* b, std::size_t n);

double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// out[i] = |a[i]|^2
void abs2(const std::complex<double>* a, double* out, std::size_t n);

// In-place one-qubit gate on a length-n statevector (n a power of two,
// target < log2(n)). For every amplitude pair (i, i + 2^target) with bit
// `target` of i clear:
//   a0' = m[0] a0 + m[1] a1
//   a1' = m[2] a0 + m[3] a1
void apply_gate1(std::complex<double>* amps, std::size_t n, unsigned target,
                 const std::complex<double> m[4]);

namespace detail {

double l2sq_scalar(const double* a, const double* b, std::size_t n);
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void abs2_scalar(const std::complex<double>* a, double* out, std::size_t n);
void apply_gate1_scalar(std::complex<double>* amps, std::size_t n,
                        unsigned target, const std::complex<double> m[4]);

#if defined(QKAD_HAVE_AVX2)
double l2sq_avx2(const double* a, const double* b, std::size_t n);
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void abs2_avx2(const std::complex<double>* a, double* out, std::size_t n);
void apply_gate1_avx2(std::complex<double>* amps, std::size_t n,
                      unsigned target, const std::complex<double> m[4]);
#endif

}  // namespace detail

}  // namespace qkad::simd
