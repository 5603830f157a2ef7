// Compiled with -mavx2 -mfma; only dispatch.cpp may call into this TU after
// checking CPU support.

#include "qkad/simd/simd.hpp"

#if defined(QKAD_HAVE_AVX2)

#include <immintrin.h>

namespace qkad::simd::detail {

namespace {

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// (mre + i*mim) * v for interleaved re/im lanes. mre/mim carry the scalar
// replicated per complex slot; fmaddsub gives re*vr - im*vi in even lanes and
// re*vi + im*vr in odd lanes.
inline __m256d cmul(__m256d mre, __m256d mim, __m256d v) {
  const __m256d sw = _mm256_permute_pd(v, 0x5);
  return _mm256_fmaddsub_pd(mre, v, _mm256_mul_pd(mim, sw));
}

}  // namespace

double l2sq_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    tail += d * d;
  }
  return hsum(acc) + tail;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return hsum(acc) + tail;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r =
        _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void abs2_avx2(const std::complex<double>* a, double* out, std::size_t n) {
  const double* p = reinterpret_cast<const double*>(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(p + 2 * i);
    const __m256d vb = _mm256_loadu_pd(p + 2 * i + 4);
    const __m256d h =
        _mm256_hadd_pd(_mm256_mul_pd(va, va), _mm256_mul_pd(vb, vb));
    // hadd interleaves the two sources: [c0, c2, c1, c3]
    _mm256_storeu_pd(out + i, _mm256_permute4x64_pd(h, _MM_SHUFFLE(3, 1, 2, 0)));
  }
  for (; i < n; ++i) {
    const double re = a[i].real();
    const double im = a[i].imag();
    out[i] = re * re + im * im;
  }
}

void apply_gate1_avx2(std::complex<double>* amps, std::size_t n,
                      unsigned target, const std::complex<double> m[4]) {
  double* p = reinterpret_cast<double*>(amps);
  const std::size_t stride = std::size_t{1} << target;

  if (stride == 1) {
    // Pair members are adjacent; one vector holds (a0, a1).
    const __m256d reA = _mm256_set_pd(m[2].real(), m[2].real(), m[0].real(),
                                      m[0].real());
    const __m256d imA = _mm256_set_pd(m[2].imag(), m[2].imag(), m[0].imag(),
                                      m[0].imag());
    const __m256d reB = _mm256_set_pd(m[3].real(), m[3].real(), m[1].real(),
                                      m[1].real());
    const __m256d imB = _mm256_set_pd(m[3].imag(), m[3].imag(), m[1].imag(),
                                      m[1].imag());
    for (std::size_t i = 0; i < n; i += 2) {
      const __m256d v = _mm256_loadu_pd(p + 2 * i);
      const __m256d va = _mm256_permute2f128_pd(v, v, 0x00);
      const __m256d vb = _mm256_permute2f128_pd(v, v, 0x11);
      _mm256_storeu_pd(p + 2 * i,
                       _mm256_add_pd(cmul(reA, imA, va), cmul(reB, imB, vb)));
    }
    return;
  }

  const __m256d re00 = _mm256_set1_pd(m[0].real());
  const __m256d im00 = _mm256_set1_pd(m[0].imag());
  const __m256d re01 = _mm256_set1_pd(m[1].real());
  const __m256d im01 = _mm256_set1_pd(m[1].imag());
  const __m256d re10 = _mm256_set1_pd(m[2].real());
  const __m256d im10 = _mm256_set1_pd(m[2].imag());
  const __m256d re11 = _mm256_set1_pd(m[3].real());
  const __m256d im11 = _mm256_set1_pd(m[3].imag());

  for (std::size_t base = 0; base < n; base += 2 * stride) {
    for (std::size_t i = base; i + 2 <= base + stride; i += 2) {
      const __m256d v0 = _mm256_loadu_pd(p + 2 * i);
      const __m256d v1 = _mm256_loadu_pd(p + 2 * (i + stride));
      _mm256_storeu_pd(
          p + 2 * i,
          _mm256_add_pd(cmul(re00, im00, v0), cmul(re01, im01, v1)));
      _mm256_storeu_pd(
          p + 2 * (i + stride),
          _mm256_add_pd(cmul(re10, im10, v0), cmul(re11, im11, v1)));
    }
  }
}

}  // namespace qkad::simd::detail

#endif  // QKAD_HAVE_AVX2
